#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/model.hpp"
#include "homscat/types.hpp"

namespace homscat {

enum class ManifoldSide { stable, unstable };

// Sampled 1-D invariant curve of the fixed point with arclength parameters.
struct InvariantCurve1D {
    ManifoldSide side = ManifoldSide::stable;
    std::vector<PhasePoint> points;       // ordered from p outward
    std::vector<double> arclength;
    double fundamental_lo = 0, fundamental_hi = 0;  // bounds of one fundamental domain
    double max_offaxis = 0;               // deviation from the coordinate axis (built-in models)
};

// For the built-in models W^s is exactly the x-axis and W^u exactly the
// y-axis; the curve is produced by sampling and the invariance is verified,
// not assumed.
inline InvariantCurve1D continue_manifold_curve(const MapModel& model, ManifoldSide side,
                                                double length, int n_samples = 256) {
    InvariantCurve1D c;
    c.side = side;
    const double L = std::min(length, 0.98 * model.params.h);
    c.points.reserve(n_samples + 1);
    for (int i = 0; i <= n_samples; ++i) {
        const double s = L * i / n_samples;
        c.points.push_back(side == ManifoldSide::stable ? PhasePoint(s, 0, 0, 0)
                                                        : PhasePoint(0, s, 0, 0));
        c.arclength.push_back(s);
    }
    // verify invariance: stable side under f, unstable side under f^{-1};
    // both send the sampled ray into itself towards p
    double offaxis = 0;
    for (const auto& p : c.points) {
        const PhasePoint q =
            side == ManifoldSide::stable ? model.local.eval_raw(p) : model.local.invert(p);
        if (side == ManifoldSide::stable)
            offaxis = std::max({offaxis, std::abs(q.y), std::abs(q.u), std::abs(q.v)});
        else
            offaxis = std::max({offaxis, std::abs(q.x), std::abs(q.u), std::abs(q.v)});
    }
    c.max_offaxis = offaxis;
    const double delta = L * model.params.mu;  // one fundamental domain [delta, delta/mu)
    c.fundamental_lo = delta;
    c.fundamental_hi = L;
    return c;
}

struct DecayFit {
    double C = 0;     // prefactor
    double rate = 0;  // fitted geometric rate (slope of the log-linear fit)
    double max_residual = 0;  // max |log norm - fit| over the fitted range
    bool exact_zero = false;  // all tail values below 1e-14: nothing to fit
};

// Least-squares fit of log d_n = log C + n log(rate) on the last half of the
// provided values (the early transient pollutes the rate).
inline DecayFit fit_decay(const std::vector<double>& d) {
    DecayFit f;
    std::vector<std::pair<double, double>> pts;
    for (size_t n = d.size() / 2; n < d.size(); ++n)
        if (d[n] > 1e-300) pts.emplace_back(static_cast<double>(n), std::log(d[n]));
    if (pts.size() < 2 || *std::max_element(d.begin(), d.end()) < 1e-14) {
        f.exact_zero = true;
        return f;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    f.rate = std::exp(slope);
    f.C = std::exp(icept);
    for (auto [x, y] : pts) f.max_residual = std::max(f.max_residual, std::abs(icept + slope * x - y));
    return f;
}

// Discrete homoclinic orbit q_n, n in [-n_max, n_max], q_0 = q_plus,
// q_{-1} = q_minus (the global-map step sits between indices -1 and 0).
struct HomoclinicOrbit {
    int n_max = 0;
    std::vector<PhasePoint> points;  // index n -> points[n + n_max]
    int settle_index = 0;            // N
    DecayFit forward_fit, backward_fit;

    const PhasePoint& at(int n) const { return points[static_cast<size_t>(n + n_max)]; }
    int gluing_step_index() const { return -1; }  // q_{n+1} = G(q_n) at n = -1, local elsewhere
};

inline HomoclinicOrbit assemble_homoclinic_orbit(const MapModel& model, int n_max) {
    if (n_max < 2) throw ValidationError("assemble_homoclinic_orbit: n_max must be >= 2");
    HomoclinicOrbit orb;
    orb.n_max = n_max;
    orb.points.assign(2 * n_max + 1, PhasePoint());
    orb.points[n_max] = model.q_plus();
    // forward along the stable axis
    PhasePoint cur = model.q_plus();
    for (int n = 1; n <= n_max; ++n) {
        cur = model.local.eval_raw(cur);
        if (!model.local.domain().contains(cur, model.local.domain_margin))
            throw DomainEscape("assemble_homoclinic_orbit: forward tail left the domain");
        orb.points[n_max + n] = cur;
    }
    // backward: q_{-1} = q_minus, then local inverse down the unstable axis
    orb.points[n_max - 1] = model.q_minus();
    cur = model.q_minus();
    for (int n = -2; n >= -n_max; --n) {
        cur = model.local.invert(cur);
        if (!model.local.domain().contains(cur, model.local.domain_margin))
            throw DomainEscape("assemble_homoclinic_orbit: backward tail left the domain");
        orb.points[n_max + n] = cur;
    }
    // decay fits over both tails
    std::vector<double> fwd, bwd;
    for (int n = 0; n <= n_max; ++n) fwd.push_back(orb.at(n).norm());
    for (int n = 0; n >= -n_max; --n) bwd.push_back(orb.at(n).norm());
    orb.forward_fit = fit_decay(fwd);
    orb.backward_fit = fit_decay(bwd);
    return orb;
}

// Smallest N such that ||q_n - p|| < V_radius for all |n| >= N.
inline int choose_settle_index(const HomoclinicOrbit& orbit, const PhasePoint& p, double V_radius) {
    int N = 0;
    for (int n = -orbit.n_max; n <= orbit.n_max; ++n)
        if (distance(orbit.at(n), p) > V_radius) N = std::max(N, std::abs(n) + 1);
    if (N > orbit.n_max)
        throw NeverSettles("choose_settle_index: orbit never enters the neighborhood; increase n_max");
    return N;
}

// Re-simulates the orbit from q_{-n_max} with the composed first-return map
// and returns the worst deviation from the stored points.
inline double orbit_consistency_residual(const MapModel& model, const HomoclinicOrbit& orbit) {
    double worst = 0;
    PhasePoint cur = orbit.at(-orbit.n_max);
    for (int n = -orbit.n_max + 1; n <= orbit.n_max; ++n) {
        cur = model.first_return.eval_raw(cur);
        worst = std::max(worst, distance(cur, orbit.at(n)));
    }
    return worst;
}

// Diagnostic for user-supplied maps: closest approach between sampled
// stable and unstable curves.  A minimum above threshold means "no homoclinic
// orbit found" (the intersection is codimension 2 and cannot be expected
// from a generic map).
struct HomoclinicSearchResult {
    double min_distance = 0;
    PhasePoint best_stable, best_unstable;
    bool found = false;
};

inline HomoclinicSearchResult homoclinic_distance_diagnostic(const InvariantCurve1D& ws,
                                                             const InvariantCurve1D& wu,
                                                             double threshold = 1e-8) {
    HomoclinicSearchResult r;
    r.min_distance = std::numeric_limits<double>::infinity();
    for (const auto& a : ws.points)
        for (const auto& b : wu.points) {
            const double d = distance(a, b);
            if (d < r.min_distance) {
                r.min_distance = d;
                r.best_stable = a;
                r.best_unstable = b;
            }
        }
    r.found = r.min_distance <= threshold;
    return r;
}

}  // namespace homscat
