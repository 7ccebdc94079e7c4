#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/map.hpp"
#include "homscat/types.hpp"

namespace homscat {

inline constexpr double kPi = 3.14159265358979323846;

// Parameters of the local map in normal-form coordinates.
//
// The map realizes the third-order normal form
//   x' = mu x (1 + a xy + b(u^2+v^2) + ...)
//   y' = mu^{-1} y (1 - a xy - b(u^2+v^2) + ...)
//   (u',v') = R_{alpha + nu (u^2+v^2) + kappa xy} (u,v) + ...
// as a composition of closed-form Hamiltonian flow steps, so it is
// symplectic to machine precision on the whole domain, not just near 0.
// Exact symplecticity of such a truncation forces kappa = -2 b (the cubic
// part of a symplectic map must be a Hamiltonian vector field); make()
// derives kappa accordingly and the builder rejects inconsistent values.
struct LocalModelParams {
    double mu = 0.5;        // in (0,1)
    double alpha = 1.0;     // in (0,pi), away from pi/2 and 2pi/3
    double a = 0.0;         // hyperbolic self-coupling
    double b = 0.0;         // hyperbolic-elliptic cross coefficient
    double nu = 0.1;        // twist; must be nonzero
    double kappa = 0.0;     // = -2 b, see above
    double eps_pert = 0.0;  // amplitude of the built-in order->=4 terms
    double h = 1.0;         // domain half-width

    double tol_res = 1e-3;  // strong-resonance exclusion width

    static LocalModelParams make(double mu, double alpha, double a, double b, double nu,
                                 double eps_pert = 0.0, double h = 1.0) {
        LocalModelParams p;
        p.mu = mu;
        p.alpha = alpha;
        p.a = a;
        p.b = b;
        p.nu = nu;
        p.kappa = -2.0 * b;
        p.eps_pert = eps_pert;
        p.h = h;
        return p;
    }

    void validate(bool require_twist = true) const {
        if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("LocalModelParams: mu must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < kPi)) throw ValidationError("LocalModelParams: alpha must lie in (0,pi)");
        if (std::abs(alpha - kPi / 2.0) < tol_res || std::abs(alpha - 2.0 * kPi / 3.0) < tol_res)
            throw StrongResonance("LocalModelParams: alpha within tol_res of a strong resonance (pi/2 or 2pi/3)");
        if (require_twist && nu == 0.0) throw ZeroTwist("LocalModelParams: twist coefficient nu must be nonzero");
        if (std::abs(kappa + 2.0 * b) > 1e-12)
            throw ValidationError(
                "LocalModelParams: kappa must equal -2*b; any other value has no exactly "
                "symplectic realization of the truncated normal form");
        if (!(eps_pert >= 0.0)) throw ValidationError("LocalModelParams: eps_pert must be >= 0");
        if (!(h > 0.0)) throw ValidationError("LocalModelParams: domain half-width h must be > 0");
    }
};

namespace detail {

// Time-1 flow of H(J,K) = (a/2) J^2 + b J K - (nu/4) K^2 with J = xy,
// K = u^2+v^2, composed after the linear part by the caller.  J and K are
// first integrals, so the flow has the closed form below.
struct TwistStep {
    double a, b, nu, kappa;

    void scales(double J, double K, double& E, double& Th) const {
        E = a * J + b * K;
        Th = kappa * J + nu * K;
    }
    PhasePoint eval(const PhasePoint& p) const {
        const double J = p.x * p.y, K = p.u * p.u + p.v * p.v;
        double E, Th;
        scales(J, K, E, Th);
        const double s = std::exp(E);
        const double c = std::cos(Th), sn = std::sin(Th);
        return PhasePoint(p.x * s, p.y / s, c * p.u - sn * p.v, sn * p.u + c * p.v);
    }
    PhasePoint invert(const PhasePoint& q) const {
        const double J = q.x * q.y, K = q.u * q.u + q.v * q.v;  // both invariant
        double E, Th;
        scales(J, K, E, Th);
        const double s = std::exp(E);
        const double c = std::cos(Th), sn = std::sin(Th);
        return PhasePoint(q.x / s, q.y * s, c * q.u + sn * q.v, -sn * q.u + c * q.v);
    }
    Mat4 jac(const PhasePoint& p) const {
        const double J = p.x * p.y, K = p.u * p.u + p.v * p.v;
        double E, Th;
        scales(J, K, E, Th);
        const double s = std::exp(E);
        const double c = std::cos(Th), sn = std::sin(Th);
        const double ur = c * p.u - sn * p.v, vr = sn * p.u + c * p.v;
        Mat4 D;
        // dE = a(y dx + x dy) + 2b(u du + v dv);  dTh = kappa(y dx + x dy) + 2nu(u du + v dv)
        D(0, 0) = s * (1 + p.x * a * p.y);
        D(0, 1) = s * p.x * a * p.x;
        D(0, 2) = s * p.x * 2 * b * p.u;
        D(0, 3) = s * p.x * 2 * b * p.v;
        D(1, 0) = -p.y / s * a * p.y;
        D(1, 1) = (1 - a * J) / s;
        D(1, 2) = -p.y / s * 2 * b * p.u;
        D(1, 3) = -p.y / s * 2 * b * p.v;
        // center rows: R_Th + (-vr, ur)^T (dTh)
        D(2, 0) = -vr * kappa * p.y;
        D(2, 1) = -vr * kappa * p.x;
        D(2, 2) = c - vr * 2 * nu * p.u;
        D(2, 3) = -sn - vr * 2 * nu * p.v;
        D(3, 0) = ur * kappa * p.y;
        D(3, 1) = ur * kappa * p.x;
        D(3, 2) = sn + ur * 2 * nu * p.u;
        D(3, 3) = c + ur * 2 * nu * p.v;
        return D;
    }
};

// Time-1 flow of eps * (xy)^2 u: contributes the x^2 y^2-family terms.
struct JSquareStep {
    double eps;

    PhasePoint eval(const PhasePoint& p) const {
        const double J = p.x * p.y;
        const double s = std::exp(2 * eps * J * p.u);
        return PhasePoint(p.x * s, p.y / s, p.u, p.v - eps * J * J);
    }
    PhasePoint invert(const PhasePoint& q) const {
        const double J = q.x * q.y;  // invariant
        const double s = std::exp(2 * eps * J * q.u);
        return PhasePoint(q.x / s, q.y * s, q.u, q.v + eps * J * J);
    }
    Mat4 jac(const PhasePoint& p) const {
        const double J = p.x * p.y;
        const double s = std::exp(2 * eps * J * p.u);
        Mat4 D = Mat4::Identity();
        D(0, 0) = s * (1 + 2 * eps * p.u * J);
        D(0, 1) = s * p.x * 2 * eps * p.u * p.x;
        D(0, 2) = s * p.x * 2 * eps * J;
        D(1, 0) = -p.y / s * 2 * eps * p.u * p.y;
        D(1, 1) = (1 - 2 * eps * p.u * J) / s;
        D(1, 2) = -p.y / s * 2 * eps * J;
        D(3, 0) = -2 * eps * J * p.y;
        D(3, 1) = -2 * eps * J * p.x;
        return D;
    }
};

// Shear kicks from eps/5 u^5 and eps/5 v^5: break integrability on the
// center plane (quartic standard-map-like kicks, order-4 terms vanishing on
// both axes).
struct KickStep {
    double eps;
    bool from_u;  // true: v -= eps u^4;  false: u += eps v^4

    PhasePoint eval(const PhasePoint& p) const {
        if (from_u) {
            const double u2 = p.u * p.u;
            return PhasePoint(p.x, p.y, p.u, p.v - eps * u2 * u2);
        }
        const double v2 = p.v * p.v;
        return PhasePoint(p.x, p.y, p.u + eps * v2 * v2, p.v);
    }
    PhasePoint invert(const PhasePoint& q) const {
        if (from_u) {
            const double u2 = q.u * q.u;
            return PhasePoint(q.x, q.y, q.u, q.v + eps * u2 * u2);
        }
        const double v2 = q.v * q.v;
        return PhasePoint(q.x, q.y, q.u - eps * v2 * v2, q.v);
    }
    Mat4 jac(const PhasePoint& p) const {
        Mat4 D = Mat4::Identity();
        if (from_u)
            D(3, 2) = -4 * eps * p.u * p.u * p.u;
        else
            D(2, 3) = 4 * eps * p.v * p.v * p.v;
        return D;
    }
};

// Implicit generating-function step from S2 = x Y + u V + eps u (x^3 Y + x Y^3).
// Produces the coupling terms ~ x^3 y, x y^3 whose derivatives survive on the
// homoclinic axis orbit, giving the linearization its exponentially decaying
// off-diagonal blocks.  Exactly symplectic; Y is a scalar Newton solve.
struct GenFunStep {
    double eps;

    double solve_Y(double x, double y, double u) const {
        double Y = y;
        for (int it = 0; it < 50; ++it) {
            const double g = Y + eps * u * (3 * x * x * Y + Y * Y * Y) - y;
            if (std::abs(g) <= 1e-15 * (1.0 + std::abs(y))) return Y;
            const double dg = 1 + eps * u * (3 * x * x + 3 * Y * Y);
            if (std::abs(dg) < 0.1) throw InverseDivergence("GenFunStep: implicit solve left contraction regime");
            Y -= g / dg;
        }
        throw InverseDivergence("GenFunStep: implicit solve for Y did not converge");
    }
    double solve_x(double X, double Y, double u) const {
        double x = X;
        for (int it = 0; it < 50; ++it) {
            const double g = x + eps * u * (x * x * x + 3 * x * Y * Y) - X;
            if (std::abs(g) <= 1e-15 * (1.0 + std::abs(X))) return x;
            const double dg = 1 + eps * u * (3 * x * x + 3 * Y * Y);
            if (std::abs(dg) < 0.1) throw InverseDivergence("GenFunStep: implicit solve left contraction regime");
            x -= g / dg;
        }
        throw InverseDivergence("GenFunStep: implicit solve for x did not converge");
    }

    PhasePoint eval(const PhasePoint& p) const {
        const double Y = solve_Y(p.x, p.y, p.u);
        const double X = p.x + eps * p.u * (p.x * p.x * p.x + 3 * p.x * Y * Y);
        const double V = p.v - eps * (p.x * p.x * p.x * Y + p.x * Y * Y * Y);
        return PhasePoint(X, Y, p.u, V);
    }
    PhasePoint invert(const PhasePoint& q) const {
        const double x = solve_x(q.x, q.y, q.u);
        const double y = q.y + eps * q.u * (3 * x * x * q.y + q.y * q.y * q.y);
        const double v = q.v + eps * (x * x * x * q.y + x * q.y * q.y * q.y);
        return PhasePoint(x, y, q.u, v);
    }
    Mat4 jac(const PhasePoint& p) const {
        const double x = p.x, u = p.u;
        const double Y = solve_Y(x, p.y, u);
        // implicit differentiation of  Y + eps u (3x^2 Y + Y^3) = y
        const double gY = 1 + eps * u * (3 * x * x + 3 * Y * Y);
        const double Yx = -eps * u * 6 * x * Y / gY;
        const double Yy = 1.0 / gY;
        const double Yu = -eps * (3 * x * x * Y + Y * Y * Y) / gY;
        const double P = x * x * x + 3 * x * Y * Y;   // W_Y / (eps u) factor
        const double Q = x * x * x * Y + x * Y * Y * Y;
        const double Px = 3 * x * x + 3 * Y * Y;      // dP/dx at fixed Y
        Mat4 D = Mat4::Zero();
        // X = x + eps u P(x, Y)
        D(0, 0) = 1 + eps * u * (Px + 6 * x * Y * Yx);
        D(0, 1) = eps * u * 6 * x * Y * Yy;
        D(0, 2) = eps * P + eps * u * 6 * x * Y * Yu;
        D(0, 3) = 0;
        D(1, 0) = Yx;
        D(1, 1) = Yy;
        D(1, 2) = Yu;
        D(1, 3) = 0;
        D(2, 2) = 1;
        // V = v - eps Q(x, Y)
        D(3, 0) = -eps * ((3 * x * x * Y + Y * Y * Y) + P * Yx);
        D(3, 1) = -eps * P * Yy;
        D(3, 2) = -eps * P * Yu;
        D(3, 3) = 1;
        return D;
    }
};

}  // namespace detail

// Literal truncation of the third-order normal form with all four
// coefficients free.  For kappa != -2b this map is NOT symplectic (no such
// symplectic map exists); it serves as a reference input for the normal-form
// coefficient extraction, so the symplecticity guard is disabled.
inline SmoothMap4 truncated_normal_form_map(double mu, double alpha, double a, double b, double nu,
                                            double kappa, double half_width = 1.0) {
    auto ev = [=](const PhasePoint& p) {
        const double J = p.x * p.y, K = p.u * p.u + p.v * p.v;
        const double th = alpha + nu * K;
        const double c = std::cos(th), s = std::sin(th);
        const double ca = std::cos(alpha), sa = std::sin(alpha);
        return PhasePoint(mu * p.x * (1 + a * J + b * K), (1 / mu) * p.y * (1 - a * J - b * K),
                          c * p.u - s * p.v - kappa * J * (p.u * sa + p.v * ca),
                          s * p.u + c * p.v + kappa * J * (p.u * ca - p.v * sa));
    };
    auto jc = [=](const PhasePoint& p) {
        const double J = p.x * p.y, K = p.u * p.u + p.v * p.v;
        const double th = alpha + nu * K;
        const double c = std::cos(th), s = std::sin(th);
        const double ca = std::cos(alpha), sa = std::sin(alpha);
        const double ur = c * p.u - s * p.v, vr = s * p.u + c * p.v;
        const double w1 = -(p.u * sa + p.v * ca), w2 = p.u * ca - p.v * sa;
        Mat4 D;
        D(0, 0) = mu * (1 + 2 * a * J + b * K);
        D(0, 1) = mu * a * p.x * p.x;
        D(0, 2) = mu * p.x * 2 * b * p.u;
        D(0, 3) = mu * p.x * 2 * b * p.v;
        D(1, 0) = -(1 / mu) * a * p.y * p.y;
        D(1, 1) = (1 / mu) * (1 - 2 * a * J - b * K);
        D(1, 2) = -(1 / mu) * p.y * 2 * b * p.u;
        D(1, 3) = -(1 / mu) * p.y * 2 * b * p.v;
        D(2, 0) = kappa * p.y * w1;
        D(2, 1) = kappa * p.x * w1;
        D(2, 2) = c - vr * 2 * nu * p.u - kappa * J * sa;
        D(2, 3) = -s - vr * 2 * nu * p.v - kappa * J * ca;
        D(3, 0) = kappa * p.y * w2;
        D(3, 1) = kappa * p.x * w2;
        D(3, 2) = s + ur * 2 * nu * p.u + kappa * J * ca;
        D(3, 3) = c + ur * 2 * nu * p.v - kappa * J * sa;
        return D;
    };
    SmoothMap4 m("truncated_nf", DomainBox::cube(half_width), ev, jc);
    m.tol_symp = std::numeric_limits<double>::infinity();
    return m;
}

// Local map in normal-form coordinates.  Composition of exactly symplectic
// closed-form steps; both axes, the center plane and the center-(un)stable
// hyperplanes {y=0}, {x=0} are invariant bitwise.
inline SmoothMap4 build_local_map(const LocalModelParams& params, bool require_twist = true) {
    params.validate(require_twist);
    const Mat4 L = one_elliptic_linear(params.mu, params.alpha);
    const Mat4 Linv = L.inverse();
    const detail::TwistStep twist{params.a, params.b, params.nu, params.kappa};
    const double eps = params.eps_pert;
    const detail::JSquareStep jsq{eps};
    const detail::KickStep kick_u{eps, true};
    const detail::KickStep kick_v{eps, false};
    const detail::GenFunStep gen{eps};
    const bool perturbed = eps != 0.0;

    auto ev = [=](const PhasePoint& p) {
        PhasePoint q(Vec4(L * p.vec()));
        q = twist.eval(q);
        if (perturbed) {
            q = jsq.eval(q);
            q = kick_v.eval(q);
            q = kick_u.eval(q);
            q = gen.eval(q);
        }
        return q;
    };
    auto jc = [=](const PhasePoint& p) {
        PhasePoint q(Vec4(L * p.vec()));
        Mat4 D = twist.jac(q) * L;
        q = twist.eval(q);
        if (perturbed) {
            D = jsq.jac(q) * D;
            q = jsq.eval(q);
            D = kick_v.jac(q) * D;
            q = kick_v.eval(q);
            D = kick_u.jac(q) * D;
            q = kick_u.eval(q);
            D = gen.jac(q) * D;
        }
        return D;
    };
    auto inv = [=](const PhasePoint& q) {
        PhasePoint p = q;
        if (perturbed) {
            p = gen.invert(p);
            p = kick_u.invert(p);
            p = kick_v.invert(p);
            p = jsq.invert(p);
        }
        p = twist.invert(p);
        return PhasePoint(Vec4(Linv * p.vec()));
    };
    return SmoothMap4("local_nf", DomainBox::cube(params.h), ev, jc, inv);
}

// Affine symplectic global map realizing the homoclinic connection.
struct GlobalMapSpec {
    PhasePoint q_minus;  // (0, y1, 0, 0) on the local unstable axis
    PhasePoint q_plus;   // (x0, 0, 0, 0) on the local stable axis
    Mat4 M = Mat4::Identity();

    double tol_symp = 1e-9;
    double tol_trans = 1e-6;

    // det[e_x | M e_y | M e_u | M e_v]; equals the (y,u,v)x(y,u,v) minor of M.
    // Nonzero iff the G-image of {x=0} is transverse to the stable tangent e_x.
    double transversality_det() const {
        Mat4 T;
        T.col(0) = Vec4(1, 0, 0, 0);
        T.col(1) = M * Vec4(0, 1, 0, 0);
        T.col(2) = M * Vec4(0, 0, 1, 0);
        T.col(3) = M * Vec4(0, 0, 0, 1);
        return T.determinant();
    }

    void validate() const {
        if (!(q_minus.x == 0.0 && q_minus.u == 0.0 && q_minus.v == 0.0 && q_minus.y > 0))
            throw ValidationError("GlobalMapSpec: q_minus must be (0, y1, 0, 0) with y1 > 0");
        if (!(q_plus.y == 0.0 && q_plus.u == 0.0 && q_plus.v == 0.0 && q_plus.x > 0))
            throw ValidationError("GlobalMapSpec: q_plus must be (x0, 0, 0, 0) with x0 > 0");
        const double r = symplecticity_residual(M);
        if (r > tol_symp)
            throw NonSymplecticM("GlobalMapSpec: M symplecticity residual " + std::to_string(r));
        const double d = transversality_det();
        if (std::abs(d) <= tol_trans) {
            std::ostringstream os;
            os << "GlobalMapSpec: transversality certificate failed, |det| = " << std::abs(d)
               << " (the image of the unstable tangent must cross {y=0})";
            throw TransversalityFailure(os.str());
        }
    }
};

inline SmoothMap4 build_global_map(const GlobalMapSpec& spec, double domain_half_width) {
    spec.validate();
    const Vec4 qm = spec.q_minus.vec(), qp = spec.q_plus.vec();
    const Mat4 M = spec.M;
    // symplectic inverse, exact up to roundoff
    const Mat4& J = symplectic_structure();
    const Mat4 Minv = -J * M.transpose() * J;
    return SmoothMap4(
        "global_affine", DomainBox::cube(domain_half_width),
        [qm, qp, M](const PhasePoint& p) { return PhasePoint(Vec4(qp + M * (p.vec() - qm))); },
        [M](const PhasePoint&) { return M; },
        [qm, qp, Minv](const PhasePoint& q) { return PhasePoint(Vec4(qm + Minv * (q.vec() - qp))); });
}

// Result of iterating the glued first-return map.
struct OrbitSegment {
    std::vector<PhasePoint> points;
    bool straddled_gluing_ball = false;  // a step jumped across the ball without entering it
};

// Complete glued model: local normal form outside the gluing ball around
// q_minus, affine global map inside it.  The orbit of q_plus is homoclinic by
// construction.
struct MapModel {
    LocalModelParams params;
    GlobalMapSpec gspec;
    double gluing_radius = 0.2;

    SmoothMap4 local;
    SmoothMap4 global;
    SmoothMap4 first_return;

    PhasePoint fixed_point() const { return PhasePoint(0, 0, 0, 0); }
    const PhasePoint& q_minus() const { return gspec.q_minus; }
    const PhasePoint& q_plus() const { return gspec.q_plus; }

    bool in_gluing_ball(const PhasePoint& p) const { return distance(p, gspec.q_minus) < gluing_radius; }

    OrbitSegment iterate_first_return(const PhasePoint& p, long n) const {
        OrbitSegment seg;
        seg.points.push_back(p);
        PhasePoint cur = p;
        for (long k = 0; k < std::labs(n); ++k) {
            PhasePoint nxt = (n > 0) ? first_return.apply(cur) : first_return.invert(cur);
            if (!in_gluing_ball(cur) && !in_gluing_ball(nxt) && segment_hits_ball(cur, nxt))
                seg.straddled_gluing_ball = true;
            seg.points.push_back(nxt);
            cur = nxt;
        }
        return seg;
    }

  private:
    bool segment_hits_ball(const PhasePoint& p, const PhasePoint& q) const {
        const Vec4 a = p.vec(), d = q.vec() - p.vec(), c = gspec.q_minus.vec();
        const double len2 = d.squaredNorm();
        if (len2 == 0.0) return false;
        const double t = std::clamp((c - a).dot(d) / len2, 0.0, 1.0);
        return (a + t * d - c).norm() < gluing_radius;
    }
};

inline MapModel build_model(const LocalModelParams& params, const GlobalMapSpec& gspec,
                            double gluing_radius) {
    params.validate();
    gspec.validate();
    if (!(gluing_radius > 0)) throw ValidationError("build_model: gluing_radius must be > 0");
    if (gspec.q_minus.y + gluing_radius > params.h || gspec.q_plus.x > params.h)
        throw ValidationError("build_model: gluing ball or q_plus outside the local domain");
    if (distance(gspec.q_plus, gspec.q_minus) <= gluing_radius)
        throw GluingOverlap("build_model: q_plus lies inside the gluing ball");
    if ((1.0 - params.mu) * gspec.q_minus.y <= gluing_radius)
        throw GluingOverlap(
            "build_model: backward orbit of q_minus re-enters the gluing ball; shrink the radius");

    MapModel m;
    m.params = params;
    m.gspec = gspec;
    m.gluing_radius = gluing_radius;
    m.local = build_local_map(params);
    m.global = build_global_map(gspec, params.h);

    const SmoothMap4 loc = m.local, glob = m.global;
    const PhasePoint qm = gspec.q_minus;
    const double r = gluing_radius;
    auto in_ball = [qm, r](const PhasePoint& p) { return distance(p, qm) < r; };
    auto ev = [=](const PhasePoint& p) { return in_ball(p) ? glob.eval_raw(p) : loc.eval_raw(p); };
    auto jc = [=](const PhasePoint& p) {
        return in_ball(p) ? glob.jacobian_unchecked(p) : loc.jacobian_unchecked(p);
    };
    auto inv = [=](const PhasePoint& q) {
        const PhasePoint z = glob.invert(q);
        if (in_ball(z)) return z;
        return loc.invert(q);
    };
    m.first_return = SmoothMap4("first_return", DomainBox::cube(params.h), ev, jc, inv);
    return m;
}

// Demo global matrix: antidiagonal swap composed with a shear in the
// hyperbolic pair (the shear makes the transversality certificate pass),
// block-diagonal with the center block B.
inline Mat4 demo_global_matrix(double sigma, double shear, const Mat2& B) {
    Mat2 h;
    h << 0.0, sigma, -1.0 / sigma, shear * sigma;
    return block_diag(h, B);
}

struct DemoConfig {
    LocalModelParams params = LocalModelParams::make(0.5, 1.0, 0.0, 0.0, 0.1, 1e-3, 1.0);
    double x0 = 0.5, y1 = 0.5;
    double sigma = 1.0, shear = 0.25;
    Mat2 B = (Mat2() << 1.5, 0.0, 0.0, 1.0 / 1.5).finished();
    double gluing_radius = 0.2;
};

inline MapModel build_demo_model(const DemoConfig& cfg = DemoConfig{}) {
    GlobalMapSpec gs;
    gs.q_minus = PhasePoint(0, cfg.y1, 0, 0);
    gs.q_plus = PhasePoint(cfg.x0, 0, 0, 0);
    gs.M = demo_global_matrix(cfg.sigma, cfg.shear, cfg.B);
    return build_model(cfg.params, gs, cfg.gluing_radius);
}

}  // namespace homscat
