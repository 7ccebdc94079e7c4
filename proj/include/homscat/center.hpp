#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/model.hpp"
#include "homscat/types.hpp"

namespace homscat {

// 2-D restriction of the model to the center plane {x = y = 0}.
struct CenterMap {
    std::function<Vec2(const Vec2&)> eval;
    std::function<Mat2(const Vec2&)> jac;
    std::function<Vec2(const Vec2&)> inverse;
    double alpha = 0, nu = 0;
    double domain_radius = 1.0;

    Vec2 apply(const Vec2& w) const { return eval(w); }
    Vec2 iterate_n(Vec2 w, long n) const {
        for (long k = 0; k < std::labs(n); ++k) w = (n > 0) ? eval(w) : inverse(w);
        return w;
    }
};

inline CenterMap restrict_to_center(const MapModel& model, double tol_invariance = 1e-12,
                                    int n_check = 64) {
    const SmoothMap4 loc = model.local;
    // exact invariance of {x=y=0} is verified by sampling
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-0.8 * model.params.h, 0.8 * model.params.h);
    for (int i = 0; i < n_check; ++i) {
        const PhasePoint q = loc.eval_raw(PhasePoint(0, 0, U(rng), U(rng)));
        if (std::abs(q.x) > tol_invariance || std::abs(q.y) > tol_invariance)
            throw CenterNotInvariant("restrict_to_center: center plane is not exactly invariant");
    }
    CenterMap cm;
    cm.alpha = model.params.alpha;
    cm.nu = model.params.nu;
    cm.domain_radius = model.params.h;
    cm.eval = [loc](const Vec2& w) {
        const PhasePoint q = loc.eval_raw(PhasePoint(0, 0, w[0], w[1]));
        return Vec2(q.u, q.v);
    };
    cm.jac = [loc](const Vec2& w) {
        return Mat2(loc.jacobian_unchecked(PhasePoint(0, 0, w[0], w[1])).bottomRightCorner<2, 2>());
    };
    cm.inverse = [loc](const Vec2& w) {
        const PhasePoint q = loc.invert(PhasePoint(0, 0, w[0], w[1]));
        return Vec2(q.u, q.v);
    };
    return cm;
}

struct RotationNumber {
    double value = 0;
    double error_estimate = 0;  // window-halving comparison
};

// Birkhoff average of lifted angle increments.
inline RotationNumber rotation_number(const CenterMap& cm, const Vec2& p0, long n_iter = 100000) {
    const double r0 = p0.norm();
    if (r0 == 0) return {cm.alpha, 0.0};
    Vec2 w = p0;
    double total = 0, half_total = 0;
    for (long n = 0; n < n_iter; ++n) {
        const Vec2 wn = cm.eval(w);
        const double r = wn.norm();
        if (r > 3 * r0 + 1e-12 || r < r0 / 3)
            throw EscapedAnnulus("rotation_number: orbit left the annulus around the seed radius");
        // principal angle increment (|step| < pi assumed for the twist range)
        const double d = std::atan2(w[0] * wn[1] - w[1] * wn[0], w[0] * wn[0] + w[1] * wn[1]);
        total += d;
        if (n == n_iter / 2 - 1) half_total = total;
        w = wn;
    }
    RotationNumber out;
    out.value = total / static_cast<double>(n_iter);
    const double half = half_total / static_cast<double>(n_iter / 2);
    out.error_estimate = std::abs(out.value - half);
    return out;
}

// Continued-fraction partial quotients of x in (0,1).
inline std::vector<long> continued_fraction(double x, int depth = 8, long cap = 1000000) {
    std::vector<long> q;
    x = x - std::floor(x);
    for (int i = 0; i < depth; ++i) {
        if (x < 1e-15) break;
        const double inv = 1.0 / x;
        long a = static_cast<long>(std::floor(inv));
        if (a > cap) {
            q.push_back(cap);
            break;
        }
        q.push_back(a);
        x = inv - std::floor(inv);
    }
    return q;
}

enum class KamVerdict { quasiperiodic, resonant, chaotic };

struct KamCurve {
    double I = 0;       // action label of the seed circle  u^2+v^2 = 2 eps^2 I
    double radius = 0;  // seed radius eps sqrt(2 I)
    RotationNumber rho;
    double a0 = 0;
    std::vector<double> cos_coef, sin_coef;  // r(theta) = a0 + sum a_k cos + b_k sin
    double fit_residual = 0;
    double invariance_residual = 0;
    KamVerdict verdict = KamVerdict::chaotic;

    double r(double theta) const {
        double s = a0;
        for (size_t k = 0; k < cos_coef.size(); ++k) {
            s += cos_coef[k] * std::cos((k + 1) * theta) + sin_coef[k] * std::sin((k + 1) * theta);
        }
        return s;
    }
    Vec2 point(double theta) const {
        const double rr = r(theta);
        return Vec2(rr * std::cos(theta), rr * std::sin(theta));
    }
};

struct KamCriteria {
    long n_fit_iter = 4096;
    long n_rot_iter = 100000;
    int fit_degree = 10;
    double tol_kam = 1e-8;
    long max_partial_quotient = 50;
    int cf_depth = 8;
    int n_residual_samples = 512;
};

namespace detail {
// least-squares trig polynomial fit of r over sampled angles
inline bool trig_fit(const std::vector<double>& theta, const std::vector<double>& r, int degree,
                     KamCurve& out) {
    const int m = 2 * degree + 1;
    if (static_cast<int>(theta.size()) < 4 * m) return false;
    Eigen::MatrixXd A(theta.size(), m);
    Eigen::VectorXd b(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) {
        A(i, 0) = 1;
        for (int k = 1; k <= degree; ++k) {
            A(i, 2 * k - 1) = std::cos(k * theta[i]);
            A(i, 2 * k) = std::sin(k * theta[i]);
        }
        b(i) = r[i];
    }
    const Eigen::VectorXd c = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    out.a0 = c(0);
    out.cos_coef.assign(degree, 0);
    out.sin_coef.assign(degree, 0);
    for (int k = 1; k <= degree; ++k) {
        out.cos_coef[k - 1] = c(2 * k - 1);
        out.sin_coef[k - 1] = c(2 * k);
    }
    out.fit_residual = (A * c - b).cwiseAbs().maxCoeff();
    return true;
}
}  // namespace detail

// Scan of seed circles u^2+v^2 = 2 eps^2 I over the action grid.  Verdicts:
// quasiperiodic needs a small invariance residual of the fitted curve, a
// stable rotation number and bounded continued-fraction partial quotients --
// a declared numerical proxy for the Diophantine condition.
inline std::vector<KamCurve> detect_kam_curves(const CenterMap& cm, const std::vector<double>& I_grid,
                                               double eps, const KamCriteria& crit = KamCriteria{}) {
    std::vector<KamCurve> out;
    for (double I : I_grid) {
        KamCurve kc;
        kc.I = I;
        kc.radius = eps * std::sqrt(2.0 * I);
        bool escaped = false;
        std::vector<double> theta, rad;
        theta.reserve(crit.n_fit_iter);
        rad.reserve(crit.n_fit_iter);
        Vec2 w(kc.radius, 0.0);
        for (long n = 0; n < crit.n_fit_iter; ++n) {
            theta.push_back(std::atan2(w[1], w[0]));
            rad.push_back(w.norm());
            w = cm.eval(w);
            if (w.norm() > 3 * kc.radius || w.norm() < kc.radius / 3) {
                escaped = true;
                break;
            }
        }
        if (escaped) {
            kc.verdict = KamVerdict::chaotic;
            out.push_back(kc);
            continue;
        }
        try {
            kc.rho = rotation_number(cm, Vec2(kc.radius, 0.0), crit.n_rot_iter);
        } catch (const EscapedAnnulus&) {
            kc.verdict = KamVerdict::chaotic;
            out.push_back(kc);
            continue;
        }
        // angular coverage check: a p/q-locked orbit visits only q angles
        {
            std::vector<double> th = theta;
            std::sort(th.begin(), th.end());
            double max_gap = th.front() + 2 * kPi - th.back();
            for (size_t i = 1; i < th.size(); ++i) max_gap = std::max(max_gap, th[i] - th[i - 1]);
            if (max_gap > 4.0 * kPi / std::max(1, crit.fit_degree)) {
                kc.verdict = KamVerdict::resonant;
                out.push_back(kc);
                continue;
            }
        }
        const auto cf = continued_fraction(kc.rho.value / (2 * kPi), crit.cf_depth,
                                           crit.max_partial_quotient + 1);
        const bool diophantine_like =
            std::all_of(cf.begin(), cf.end(), [&](long a) { return a <= crit.max_partial_quotient; });
        if (!detail::trig_fit(theta, rad, crit.fit_degree, kc)) {
            kc.verdict = KamVerdict::chaotic;
            out.push_back(kc);
            continue;
        }
        // invariance residual of the fitted curve
        double worst = 0;
        for (int i = 0; i < crit.n_residual_samples; ++i) {
            const double th = 2 * kPi * i / crit.n_residual_samples;
            const Vec2 img = cm.eval(kc.point(th));
            const double th2 = std::atan2(img[1], img[0]);
            worst = std::max(worst, std::abs(img.norm() - kc.r(th2)));
        }
        kc.invariance_residual = worst;
        const bool rot_stable = kc.rho.error_estimate < 100.0 / crit.n_rot_iter + 1e-10;
        kc.verdict = (worst <= crit.tol_kam && diophantine_like && rot_stable)
                         ? KamVerdict::quasiperiodic
                         : (diophantine_like ? KamVerdict::chaotic : KamVerdict::resonant);
        out.push_back(kc);
    }
    return out;
}

enum class OrbitClass { elliptic, hyperbolic, degenerate_family };

struct PeriodicOrbitRecord {
    int period = 0;
    long p = 0;  // rotation fraction p/q
    std::vector<Vec2> points;
    double residual = 0;
    double trace = 0;
    OrbitClass classification = OrbitClass::degenerate_family;
};

// Newton search for q-periodic Birkhoff orbits in a rotation-number window.
// The radial seed comes from inverting the twist law alpha + nu r^2 = 2 pi p/q.
inline std::vector<PeriodicOrbitRecord> find_periodic_orbits(const CenterMap& cm, int q,
                                                             double rot_lo, double rot_hi,
                                                             unsigned long seed = 3,
                                                             double tol_class = 1e-6) {
    if (q < 1) throw ValidationError("find_periodic_orbits: period must be >= 1");
    std::vector<PeriodicOrbitRecord> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);

    auto fq = [&](Vec2 w) {
        for (int k = 0; k < q; ++k) w = cm.eval(w);
        return w;
    };
    auto dfq = [&](Vec2 w) {
        Mat2 D = Mat2::Identity();
        for (int k = 0; k < q; ++k) {
            D = cm.jac(w) * D;
            w = cm.eval(w);
        }
        return D;
    };

    for (long p = 1; p <= q; ++p) {
        if (std::gcd(p, static_cast<long>(q)) != 1) continue;
        const double target = 2 * kPi * p / q;
        if (target < rot_lo || target > rot_hi) continue;
        const double r2 = (target - cm.alpha) / cm.nu;
        if (!(r2 > 0) || r2 > 0.81 * cm.domain_radius * cm.domain_radius) continue;
        const double rstar = std::sqrt(r2);

        // integrable degeneracy pre-check: the whole seed circle may be fixed
        {
            double worst = 0;
            for (int i = 0; i < 4 * q; ++i) {
                const double th = 2 * kPi * i / (4 * q);
                const Vec2 w(rstar * std::cos(th), rstar * std::sin(th));
                worst = std::max(worst, (fq(w) - w).norm());
            }
            if (worst < 1e-10) {
                PeriodicOrbitRecord rec;
                rec.period = q;
                rec.p = p;
                rec.classification = OrbitClass::degenerate_family;
                rec.residual = worst;
                rec.trace = 2.0;
                for (int i = 0; i < 4; ++i) {
                    const double th = kPi * i / 2;
                    rec.points.emplace_back(rstar * std::cos(th), rstar * std::sin(th));
                }
                out.push_back(rec);
                continue;
            }
        }

        std::vector<Vec2> found;
        for (int i = 0; i < 8 * q; ++i) {
            const double th = 2 * kPi * i / (8 * q);
            Vec2 w((rstar + jitter(rng)) * std::cos(th), (rstar + jitter(rng)) * std::sin(th));
            bool ok = false;
            for (int it = 0; it < 40; ++it) {
                const Vec2 r = fq(w) - w;
                if (r.norm() < 1e-12) {
                    ok = true;
                    break;
                }
                const Mat2 A = dfq(w) - Mat2::Identity();
                const Vec2 step = A.fullPivLu().solve(r);
                if (!step.allFinite() || step.norm() > 0.5) break;
                w -= step;
            }
            if (!ok || w.norm() < 0.1 * rstar || w.norm() > 3 * rstar) continue;
            // dedupe against known orbits
            bool dup = false;
            for (const auto& z : found) {
                Vec2 zz = z;
                for (int k = 0; k < q && !dup; ++k) {
                    if ((zz - w).norm() < 1e-6) dup = true;
                    zz = cm.eval(zz);
                }
                if (dup) break;
            }
            if (dup) continue;
            found.push_back(w);

            PeriodicOrbitRecord rec;
            rec.period = q;
            rec.p = p;
            Vec2 z = w;
            for (int k = 0; k < q; ++k) {
                rec.points.push_back(z);
                z = cm.eval(z);
            }
            rec.residual = (z - w).norm();
            rec.trace = dfq(w).trace();
            if (std::abs(rec.trace) < 2.0 - tol_class)
                rec.classification = OrbitClass::elliptic;
            else if (std::abs(rec.trace) > 2.0 + tol_class)
                rec.classification = OrbitClass::hyperbolic;
            else
                rec.classification = OrbitClass::degenerate_family;
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace homscat
