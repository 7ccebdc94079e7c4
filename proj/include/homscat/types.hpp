#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "homscat/errors.hpp"

namespace homscat {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Row4 = Eigen::RowVector4d;

// Coordinate ordering is (x, y, u, v) throughout: (x, y) the hyperbolic
// pair, (u, v) the elliptic pair, with the 2-form  Omega = dx^dy + du^dv.
struct PhasePoint {
    double x = 0, y = 0, u = 0, v = 0;

    PhasePoint() = default;
    PhasePoint(double x_, double y_, double u_, double v_) : x(x_), y(y_), u(u_), v(v_) {
        if (!finite()) throw Error("PhasePoint: non-finite component");
    }
    explicit PhasePoint(const Vec4& z) : PhasePoint(z[0], z[1], z[2], z[3]) {}

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(u) && std::isfinite(v);
    }
    Vec4 vec() const { return Vec4(x, y, u, v); }
    double norm() const { return vec().norm(); }

    friend PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) {
        return PhasePoint(a.x - b.x, a.y - b.y, a.u - b.u, a.v - b.v);
    }
    friend PhasePoint operator+(const PhasePoint& a, const PhasePoint& b) {
        return PhasePoint(a.x + b.x, a.y + b.y, a.u + b.u, a.v + b.v);
    }
};

inline double distance(const PhasePoint& a, const PhasePoint& b) { return (a.vec() - b.vec()).norm(); }

// Tangent vector (xi, eta, chi1, chi2) attached to a base point.
struct TangentVector {
    Vec4 comp = Vec4::Zero();  // (xi, eta, chi1, chi2)
    PhasePoint base;

    TangentVector() = default;
    TangentVector(const Vec4& c, const PhasePoint& b) : comp(c), base(b) {
        if (!c.allFinite()) throw Error("TangentVector: non-finite component");
    }
    double xi() const { return comp[0]; }
    double eta() const { return comp[1]; }
    Vec2 chi() const { return comp.tail<2>(); }
};

// Structure matrix of Omega in the (x,y,u,v) ordering: Omega(z,w) = z^T * Jmat * w.
inline const Mat4& symplectic_structure() {
    static const Mat4 J = [] {
        Mat4 m = Mat4::Zero();
        m(0, 1) = 1;
        m(1, 0) = -1;
        m(2, 3) = 1;
        m(3, 2) = -1;
        return m;
    }();
    return J;
}

inline double omega(const Vec4& a, const Vec4& b) { return a.dot(symplectic_structure() * b); }

// || D^T J D - J ||_inf
inline double symplecticity_residual(const Mat4& D) {
    const Mat4& J = symplectic_structure();
    return (D.transpose() * J * D - J).cwiseAbs().maxCoeff();
}

inline Mat2 rotation2(double angle) {
    Mat2 r;
    const double c = std::cos(angle), s = std::sin(angle);
    r << c, -s, s, c;
    return r;
}

inline Mat4 block_diag(const Mat2& h, const Mat2& c) {
    Mat4 m = Mat4::Zero();
    m.topLeftCorner<2, 2>() = h;
    m.bottomRightCorner<2, 2>() = c;
    return m;
}

// blockdiag(diag(mu, 1/mu), R_alpha) -- the linear part of the normal form.
inline Mat4 one_elliptic_linear(double mu, double alpha) {
    Mat2 h;
    h << mu, 0, 0, 1.0 / mu;
    return block_diag(h, rotation2(alpha));
}

// 2x2 blocks of a 4x4 matrix in the permuted ordering (x, u, y, v), the one
// used in the transversality lemma.  In that ordering the structure matrix is
// the standard [[0, I], [-I, 0]] and a symplectic L = [[a, b], [c, d]] obeys
//   a^T c = c^T a,   b^T d = d^T b,   d^T a - b^T c = I.
struct Lemma1Blocks {
    Mat2 a, b, c, d;
};

inline Lemma1Blocks lemma1_blocks(const Mat4& L) {
    // index map (x,u,y,v) -> (0,2,1,3) in the native (x,y,u,v) ordering
    static const int p[4] = {0, 2, 1, 3};
    Mat4 P;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) P(i, j) = L(p[i], p[j]);
    Lemma1Blocks B;
    B.a = P.topLeftCorner<2, 2>();
    B.b = P.topRightCorner<2, 2>();
    B.c = P.bottomLeftCorner<2, 2>();
    B.d = P.bottomRightCorner<2, 2>();
    return B;
}

struct BlockIdentityReport {
    double res_atc = 0;  // || a^T c - c^T a ||_inf
    double res_btd = 0;  // || b^T d - d^T b ||_inf
    double res_dta = 0;  // || d^T a - b^T c - I ||_inf
    double max_residual() const { return std::max(res_atc, std::max(res_btd, res_dta)); }
    bool pass(double tol) const { return max_residual() <= tol; }
};

inline BlockIdentityReport check_symplectic_block_identities(const Mat4& L) {
    const Lemma1Blocks B = lemma1_blocks(L);
    BlockIdentityReport r;
    r.res_atc = (B.a.transpose() * B.c - B.c.transpose() * B.a).cwiseAbs().maxCoeff();
    r.res_btd = (B.b.transpose() * B.d - B.d.transpose() * B.b).cwiseAbs().maxCoeff();
    r.res_dta = (B.d.transpose() * B.a - B.b.transpose() * B.c - Mat2::Identity()).cwiseAbs().maxCoeff();
    return r;
}

}  // namespace homscat
