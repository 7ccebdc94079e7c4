#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/fixed_point.hpp"
#include "homscat/jet.hpp"
#include "homscat/map.hpp"

namespace homscat {

// ---------------------------------------------------------------------------
// Resonance bookkeeping for the multiplier set (mu, mu^{-1}, e^{i a}, e^{-i a}).
//
// An exponent vector (m1, m2, n1, n2), |m|+|n| in {2, 3}, is resonant when one
// of the four relations holds:
//   (1)  m1 = m2 + 1,  a (n1 - n2)     = 2 pi k     [x-row]
//   (2)  m2 = m1 + 1,  a (n1 - n2)     = 2 pi k     [y-row]
//   (3)  m1 = m2,      a (n1 - n2 - 1) = 2 pi k     [z-row]
//   (4)  m1 = m2,      a (n1 - n2 + 1) = 2 pi k     [zbar-row]
// Entries with k != 0 only exist for special alpha; those are the strong
// resonances (alpha = 2 pi/3 at order 2, pi/2 at order 3).
// ---------------------------------------------------------------------------

struct ResonanceEntry {
    std::array<int, 4> exps;  // (m1, m2, n1, n2)
    int relation = 0;         // 1..4
    int k = 0;                // integer in the angle condition
    std::string monomial;
    bool strong = false;  // k != 0 (alpha-specific)
};

struct ResonanceReport {
    double alpha = 0;
    std::vector<ResonanceEntry> entries;
    bool has_strong() const {
        return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.strong; });
    }
    // order-3 entries only, named
    std::vector<std::string> order3_monomials() const {
        std::vector<std::string> out;
        for (const auto& e : entries)
            if (e.exps[0] + e.exps[1] + e.exps[2] + e.exps[3] == 3) out.push_back(e.monomial);
        std::sort(out.begin(), out.end());
        return out;
    }
};

namespace detail {
inline std::string resonant_monomial_name(const std::array<int, 4>& e, int relation) {
    const int m1 = e[0], m2 = e[1], n1 = e[2], n2 = e[3];
    // the generic order-3 set, named as in the real normal form
    if (relation == 1 && m1 == 2 && m2 == 1 && n1 == 0 && n2 == 0) return "x^2 y";
    if (relation == 1 && m1 == 1 && m2 == 0 && n1 == 1 && n2 == 1) return "x(u^2+v^2)";
    if (relation == 2 && m1 == 1 && m2 == 2 && n1 == 0 && n2 == 0) return "x y^2";
    if (relation == 2 && m1 == 0 && m2 == 1 && n1 == 1 && n2 == 1) return "y(u^2+v^2)";
    if (relation == 3 && m1 == 1 && m2 == 1 && n1 == 1 && n2 == 0) return "xyu";
    if (relation == 4 && m1 == 1 && m2 == 1 && n1 == 0 && n2 == 1) return "xyv";
    if (relation == 3 && m1 == 0 && m2 == 0 && n1 == 2 && n2 == 1) return "u(u^2+v^2)";
    if (relation == 4 && m1 == 0 && m2 == 0 && n1 == 1 && n2 == 2) return "v(u^2+v^2)";
    // strong / exotic cases: complex-monomial naming
    std::string s = "x^" + std::to_string(m1) + " y^" + std::to_string(m2) + " z^" +
                    std::to_string(n1) + " zb^" + std::to_string(n2) + " [row " +
                    std::to_string(relation) + "]";
    return s;
}
}  // namespace detail

inline ResonanceReport enumerate_resonances(double alpha, int max_order = 3, double tol_res = 1e-3) {
    if (!(alpha > 0 && alpha < kPi)) throw ValidationError("enumerate_resonances: alpha must lie in (0,pi)");
    ResonanceReport rep;
    rep.alpha = alpha;
    auto angle_zero = [&](int j, int& k_out) {
        // is alpha*j = 2 pi k for some integer k, within tol_res on the angle?
        const double t = alpha * j / (2 * kPi);
        const int k = static_cast<int>(std::lround(t));
        k_out = k;
        return std::abs(alpha * j - 2 * kPi * k) < tol_res;
    };
    for (int deg = 2; deg <= max_order; ++deg)
        for (int m1 = 0; m1 <= deg; ++m1)
            for (int m2 = 0; m1 + m2 <= deg; ++m2)
                for (int n1 = 0; m1 + m2 + n1 <= deg; ++n1) {
                    const int n2 = deg - m1 - m2 - n1;
                    int k = 0;
                    auto add = [&](int rel) {
                        ResonanceEntry e;
                        e.exps = {m1, m2, n1, n2};
                        e.relation = rel;
                        e.k = k;
                        e.strong = (k != 0);
                        e.monomial = detail::resonant_monomial_name(e.exps, rel);
                        rep.entries.push_back(e);
                    };
                    if (m1 == m2 + 1 && angle_zero(n1 - n2, k)) add(1);
                    if (m2 == m1 + 1 && angle_zero(n1 - n2, k)) add(2);
                    if (m1 == m2 && angle_zero(n1 - n2 - 1, k)) add(3);
                    if (m1 == m2 && angle_zero(n1 - n2 + 1, k)) add(4);
                }
    return rep;
}

// ---------------------------------------------------------------------------
// Third-order normal-form coefficient extraction.
// ---------------------------------------------------------------------------

struct NormalFormCoeffs {
    double a = 0, b = 0, nu = 0, kappa = 0;
    double residual = 0;       // remaining non-resonant order<=3 mass after reduction
    double linear_residual = 0;  // distance of the linear jet from blockdiag(diag(mu,1/mu), R_alpha)
    bool twist_certified() const { return nu != 0; }
};

struct NormalFormOptions {
    double fd_step = 1e-2;
    double tol_div = 1e-4;   // minimal homological divisor
    double tol_res = 1e-3;   // resonance detection width on the angle
};

namespace detail {

// Homological removal of non-resonant monomials of one degree, in the
// complexified variables.  Returns the conjugated jet.
inline jet::MapJet remove_degree(const jet::MapJet& g, int degree,
                                 const std::array<std::complex<double>, 4>& lambda,
                                 double alpha, double tol_div, double tol_res) {
    using jet::cplx;
    const auto& T = jet::table();
    jet::MapJet X;  // change generator: T_change = id + X
    for (int row = 0; row < 4; ++row) {
        for (size_t m = 0; m < T.size(); ++m) {
            const auto& e = T.exps[m];
            if (e[0] + e[1] + e[2] + e[3] != degree) continue;
            const cplx c = g.comp[row].c[m];
            // eigenvalue weight of the monomial
            cplx lw = std::pow(lambda[0], e[0]) * std::pow(lambda[1], e[1]) *
                      std::pow(lambda[2], e[2]) * std::pow(lambda[3], e[3]);
            const cplx divisor = lw - lambda[row];
            // integer-resonance test mirrors enumerate_resonances
            const int dm = e[0] - e[1];
            const int dn = e[2] - e[3];
            bool resonant = false;
            auto angle_zero = [&](int j) {
                const int k = static_cast<int>(std::lround(alpha * j / (2 * kPi)));
                return std::abs(alpha * j - 2 * kPi * k) < tol_res;
            };
            switch (row) {
                case 0: resonant = (dm == 1 && angle_zero(dn)); break;
                case 1: resonant = (dm == -1 && angle_zero(dn)); break;
                case 2: resonant = (dm == 0 && angle_zero(dn - 1)); break;
                case 3: resonant = (dm == 0 && angle_zero(dn + 1)); break;
            }
            if (resonant) continue;  // stays in the normal form
            if (std::abs(divisor) < tol_div)
                throw IllConditionedHomological(
                    "extract_normal_form: homological divisor below tol_div for a non-resonant monomial");
            X.comp[row].c[m] = c / (lw - lambda[row]);
        }
    }
    // conjugate: g' = T^{-1} o g o T with T = id + X
    jet::MapJet T_change = jet::MapJet::identity();
    for (int r = 0; r < 4; ++r) T_change.comp[r] += X.comp[r];
    const jet::MapJet T_inv = T_change.inverse();
    return T_inv.compose(g.compose(T_change));
}

}  // namespace detail

// Reads the third-order normal-form coefficients of `map` near the fixed
// point at `fp`, in the symplectic eigenbasis provided by `spec`.  Taylor
// data comes from Richardson-extrapolated central differences of the
// evaluation rule.
inline NormalFormCoeffs extract_normal_form(const SmoothMap4& map, const Spectrum1Elliptic& spec,
                                            const PhasePoint& fp = PhasePoint(0, 0, 0, 0),
                                            const NormalFormOptions& opt = NormalFormOptions{}) {
    using jet::cplx;
    const double mu = spec.mu, alpha = spec.center_orientation_reversed ? -spec.alpha : spec.alpha;
    const Mat4 C = spec.basis;
    const Mat4 Cinv = C.inverse();
    const Vec4 base = fp.vec();

    auto conj_eval = [&](const Vec4& z) -> Vec4 {
        const PhasePoint p(Vec4(base + C * z));
        return Cinv * (map.eval_raw(p).vec() - base);
    };
    jet::MapJet gj = jet::extract_map_jet(conj_eval, Vec4::Zero(), opt.fd_step);
    jet::MapJet g = jet::complexify(gj);

    const std::array<cplx, 4> lambda = {cplx(spec.orientation * mu, 0),
                                        cplx(spec.orientation / mu, 0),
                                        std::polar(1.0, alpha), std::polar(1.0, -alpha)};
    NormalFormCoeffs out;
    {
        // linear-part sanity
        double lr = 0;
        for (int r = 0; r < 4; ++r)
            for (int v = 0; v < 4; ++v) {
                int e[4] = {0, 0, 0, 0};
                e[v] = 1;
                cplx c = g.comp[r].get(e[0], e[1], e[2], e[3]);
                cplx want = (r == v) ? lambda[r] : cplx(0);
                lr = std::max(lr, std::abs(c - want));
            }
        out.linear_residual = lr;
    }

    g = detail::remove_degree(g, 2, lambda, alpha, opt.tol_div, opt.tol_res);
    g = detail::remove_degree(g, 3, lambda, alpha, opt.tol_div, opt.tol_res);

    // read the resonant coefficients
    const cplx exp_ia = std::polar(1.0, alpha);
    const cplx cx2y = g.comp[0].get(2, 1, 0, 0);
    const cplx cxzz = g.comp[0].get(1, 0, 1, 1);
    const cplx czzz = g.comp[2].get(0, 0, 2, 1);
    const cplx cxyz = g.comp[2].get(1, 1, 1, 0);
    out.a = (cx2y / (spec.orientation * mu)).real();
    out.b = (cxzz / (spec.orientation * mu)).real();
    out.nu = (czzz / (cplx(0, 1) * exp_ia)).real();
    out.kappa = (cxyz / (cplx(0, 1) * exp_ia)).real();

    // residual: whatever order-2/3 mass is neither resonant nor real-part consistent
    double res = 0;
    res = std::max(res, std::abs((cx2y / (spec.orientation * mu)).imag()));
    res = std::max(res, std::abs((cxzz / (spec.orientation * mu)).imag()));
    res = std::max(res, std::abs((czzz / (cplx(0, 1) * exp_ia)).imag()));
    res = std::max(res, std::abs((cxyz / (cplx(0, 1) * exp_ia)).imag()));
    const auto& T = jet::table();
    for (int row = 0; row < 4; ++row)
        for (size_t m = 0; m < T.size(); ++m) {
            const auto& e = T.exps[m];
            const int deg = e[0] + e[1] + e[2] + e[3];
            if (deg < 2 || deg > 3) continue;
            const int dm = e[0] - e[1], dn = e[2] - e[3];
            bool resonant = false;
            auto angle_zero = [&](int j) {
                const int k = static_cast<int>(std::lround(alpha * j / (2 * kPi)));
                return std::abs(alpha * j - 2 * kPi * k) < opt.tol_res;
            };
            switch (row) {
                case 0: resonant = (dm == 1 && angle_zero(dn)); break;
                case 1: resonant = (dm == -1 && angle_zero(dn)); break;
                case 2: resonant = (dm == 0 && angle_zero(dn - 1)); break;
                case 3: resonant = (dm == 0 && angle_zero(dn + 1)); break;
            }
            if (!resonant) res = std::max(res, std::abs(g.comp[row].c[m]));
        }
    out.residual = res;
    return out;
}

}  // namespace homscat
