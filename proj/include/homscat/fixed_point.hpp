#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <functional>

#include "homscat/errors.hpp"
#include "homscat/map.hpp"
#include "homscat/model.hpp"
#include "homscat/types.hpp"

namespace homscat {

// Newton on f(p) - p = 0.  The basin is diagnosed, not assumed: divergence or
// escape from the domain box raises NewtonDivergence.
inline PhasePoint find_fixed_point(const SmoothMap4& map, const PhasePoint& guess,
                                   double tol = 1e-12, int max_iter = 50) {
    PhasePoint p = guess;
    for (int it = 0; it < max_iter; ++it) {
        if (!map.domain().contains(p, map.domain_margin))
            throw NewtonDivergence("find_fixed_point: iterate left the domain box");
        const Vec4 r = map.eval_raw(p).vec() - p.vec();
        if (r.norm() <= tol) return p;
        const Mat4 A = map.jacobian_unchecked(p) - Mat4::Identity();
        const Vec4 step = A.partialPivLu().solve(r);
        const Vec4 z = p.vec() - step;
        if (!z.allFinite()) throw NewtonDivergence("find_fixed_point: non-finite Newton iterate");
        p = PhasePoint(z);
    }
    throw NewtonDivergence("find_fixed_point: no convergence after max_iter");
}

// Spectrum {mu, mu^{-1}, e^{+-i alpha}} of a 1-elliptic fixed point together
// with a symplectic eigenbasis C such that C^{-1} J C = blockdiag(diag(mu,
// 1/mu), R_alpha).
struct Spectrum1Elliptic {
    double mu = 0;        // |real multiplier| in (0,1)
    double alpha = 0;     // in (0,pi)
    int orientation = 1;  // sign of the real pair
    bool center_orientation_reversed = false;  // center block conjugate to R_{-alpha}
    Mat4 basis = Mat4::Identity();
    double basis_symplectic_residual = 0;
    double block_diag_residual = 0;
};

inline Spectrum1Elliptic classify_spectrum(const Mat4& J, double tol_eig = 1e-9,
                                           double tol_res = 1e-3) {
    Eigen::EigenSolver<Mat4> es(J);
    if (es.info() != Eigen::Success) throw NotOneElliptic("classify_spectrum: eigensolver failed");
    const auto& ev = es.eigenvalues();
    const auto& V = es.eigenvectors();

    int i_re_in = -1, i_re_out = -1, i_c = -1;
    for (int i = 0; i < 4; ++i) {
        const std::complex<double> l = ev[i];
        if (std::abs(l.imag()) <= tol_eig * std::max(1.0, std::abs(l))) {
            if (std::abs(std::abs(l.real()) - 1.0) <= tol_eig)
                throw NotOneElliptic("classify_spectrum: real multiplier on the unit circle");
            if (std::abs(l.real()) < 1.0)
                i_re_in = i;
            else
                i_re_out = i;
        } else if (std::abs(std::abs(l) - 1.0) <= tol_eig) {
            if (l.imag() > 0) i_c = i;
        } else {
            throw NotOneElliptic("classify_spectrum: complex multiplier off the unit circle");
        }
    }
    if (i_re_in < 0 || i_re_out < 0 || i_c < 0)
        throw NotOneElliptic("classify_spectrum: multiplier pattern is not 1-elliptic");

    Spectrum1Elliptic S;
    const double lam_in = ev[i_re_in].real();
    S.orientation = lam_in >= 0 ? 1 : -1;
    S.mu = std::abs(lam_in);
    if (std::abs(S.mu * std::abs(ev[i_re_out].real()) - 1.0) > 100 * tol_eig)
        throw NotOneElliptic("classify_spectrum: real pair is not reciprocal");

    const std::complex<double> lc = ev[i_c];
    S.alpha = std::abs(std::arg(lc));
    if (S.alpha < tol_eig || S.alpha > kPi - tol_eig)
        throw NotOneElliptic("classify_spectrum: elliptic angle degenerate (0 or pi)");
    if (std::abs(S.alpha - kPi / 2) < tol_res || std::abs(S.alpha - 2 * kPi / 3) < tol_res)
        throw StrongResonance("classify_spectrum: alpha within tol_res of pi/2 or 2pi/3");

    auto real_vec = [&](int i) {
        Vec4 r = V.col(i).real();
        if (r.norm() < 1e-8) r = V.col(i).imag();
        return Vec4(r / r.norm());
    };
    Vec4 vs = real_vec(i_re_in);
    Vec4 vu = real_vec(i_re_out);
    const double c = omega(vs, vu);
    if (std::abs(c) < 1e-12) throw NotOneElliptic("classify_spectrum: hyperbolic pair Omega-degenerate");
    vu /= c;

    const Vec4 wr = V.col(i_c).real(), wi = V.col(i_c).imag();
    const double d = omega(wr, wi);
    if (std::abs(d) < 1e-12) throw NotOneElliptic("classify_spectrum: elliptic pair Omega-degenerate");
    Vec4 b3, b4;
    if (d < 0) {  // (wi, wr)/sqrt(-d) carries the map to R_{+alpha}
        b3 = wi / std::sqrt(-d);
        b4 = wr / std::sqrt(-d);
    } else {
        b3 = wr / std::sqrt(d);
        b4 = wi / std::sqrt(d);
        S.center_orientation_reversed = true;
    }

    Mat4 C;
    C.col(0) = vs;
    C.col(1) = vu;
    C.col(2) = b3;
    C.col(3) = b4;
    S.basis = C;
    S.basis_symplectic_residual = symplecticity_residual(C);
    const Mat4 target = block_diag((Mat2() << lam_in, 0, 0, 1.0 / lam_in).finished(),
                                   rotation2(S.center_orientation_reversed ? -S.alpha : S.alpha));
    S.block_diag_residual = (C.inverse() * J * C - target).cwiseAbs().maxCoeff();
    return S;
}

// Curve (x, y(x), u(x), v(x)) with y'(0) = u'(0) = v'(0) = 0, supplied with
// first and second derivatives.
struct CurveData {
    std::function<double(double)> y, u, v;
    std::function<double(double)> dy, du, dv;
    std::function<double(double)> d2y, d2u, d2v;
};

// Symplectic straightening of an invariant curve onto the xi-axis:
//   xi  = x
//   eta = y - y(x) - v'(x) (u - u(x)) + u'(x) (v - v(x))
//   nu  = u - u(x)
//   om  = v - v(x)
inline SmoothMap4 straighten_invariant_curve(const CurveData& cd, double half_width = 1.0,
                                             double tol = 1e-9) {
    if (std::abs(cd.dy(0)) > tol || std::abs(cd.du(0)) > tol || std::abs(cd.dv(0)) > tol)
        throw BadCurveData("straighten_invariant_curve: curve derivatives at 0 must vanish");
    auto ev = [cd](const PhasePoint& p) {
        const double yc = cd.y(p.x), uc = cd.u(p.x), vc = cd.v(p.x);
        const double duc = cd.du(p.x), dvc = cd.dv(p.x);
        return PhasePoint(p.x, p.y - yc - dvc * (p.u - uc) + duc * (p.v - vc), p.u - uc, p.v - vc);
    };
    auto jc = [cd](const PhasePoint& p) {
        const double uc = cd.u(p.x), vc = cd.v(p.x);
        const double dyc = cd.dy(p.x), duc = cd.du(p.x), dvc = cd.dv(p.x);
        const double d2uc = cd.d2u(p.x), d2vc = cd.d2v(p.x);
        Mat4 D = Mat4::Identity();
        D(1, 0) = -dyc - d2vc * (p.u - uc) + d2uc * (p.v - vc);
        D(1, 2) = -dvc;
        D(1, 3) = duc;
        D(2, 0) = -duc;
        D(3, 0) = -dvc;
        return D;
    };
    auto inv = [cd](const PhasePoint& q) {
        const double yc = cd.y(q.x), uc = cd.u(q.x), vc = cd.v(q.x);
        const double duc = cd.du(q.x), dvc = cd.dv(q.x);
        // q = (xi, eta, nu, om)
        return PhasePoint(q.x, q.y + yc + dvc * q.u - duc * q.v, q.u + uc, q.v + vc);
    };
    return SmoothMap4("straighten", DomainBox::cube(half_width), ev, jc, inv);
}

}  // namespace homscat
