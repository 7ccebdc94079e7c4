#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "homscat/center.hpp"
#include "homscat/errors.hpp"
#include "homscat/fiber.hpp"
#include "homscat/model.hpp"
#include "homscat/scattering.hpp"
#include "homscat/types.hpp"

namespace homscat {

// The homoclinic disk Sigma = W^cu cap W^cs near the homoclinic points, in
// two charts: Sigma_- = {x = 0, y - y1 = Psi(u,v)} near q_minus and
// Sigma_+ = {y = 0, x = Phi(u,v)} near q_plus.  For the affine global map
// both graphs are exactly linear and the chart-to-chart restriction of G is
// the 2x2 unimodular matrix A_sigma.
struct SigmaDisk {
    PhasePoint q_minus, q_plus;
    double chart_radius = 0;
    Vec2 psi_coef = Vec2::Zero();            // Psi(u,v) = psi_coef . (u,v)
    double phi0 = 0;
    Vec2 phi_coef = Vec2::Zero();            // Phi(u,v) = phi0 + phi_coef . (u,v)
    Mat2 A_sigma = Mat2::Identity();         // G restricted: Sigma_- chart -> Sigma_+ chart
    double map_residual = 0;                 // G(Sigma_-) vs Sigma_+ on the validation grid
    double interp_residual = 0;              // held-out bilinear interpolation error
    double quadratic_fit_max = 0;            // largest fitted quadratic coefficient of Phi

    double psi(const Vec2& w) const { return psi_coef.dot(w); }
    double phi(const Vec2& w) const { return phi0 + phi_coef.dot(w); }
    PhasePoint embed_minus(const Vec2& w) const {
        return PhasePoint(0, q_minus.y + psi(w), w[0], w[1]);
    }
    PhasePoint embed_plus(const Vec2& w) const { return PhasePoint(phi(w), 0, w[0], w[1]); }
};

inline SigmaDisk build_sigma_disk(const MapModel& model, double chart_radius) {
    const Mat4& M = model.gspec.M;
    const double myy = M(1, 1);
    if (std::abs(myy) < 1e-12)
        throw TransversalityFailure("build_sigma_disk: M_yy vanishes, no graph representation");
    SigmaDisk S;
    S.q_minus = model.q_minus();
    S.q_plus = model.q_plus();
    S.chart_radius = chart_radius;
    S.psi_coef = Vec2(-M(1, 2) / myy, -M(1, 3) / myy);
    // chart must stay inside the gluing ball where the global map acts
    const double reach = chart_radius * std::sqrt(1.0 + S.psi_coef.squaredNorm());
    if (reach >= model.gluing_radius)
        throw ChartTooLarge("build_sigma_disk: chart leaves the gluing ball; shrink chart_radius");
    // A_sigma: (u,v) -> (ubar, vbar) of G(embed_minus(u,v))
    Mat2 Mcc = M.bottomRightCorner<2, 2>();
    Vec2 Mcy(M(2, 1), M(3, 1));
    S.A_sigma = Mcc + Mcy * S.psi_coef.transpose();
    // Phi over the Sigma_+ chart
    const Eigen::RowVector2d xrow(M(0, 2) + M(0, 1) * S.psi_coef[0], M(0, 3) + M(0, 1) * S.psi_coef[1]);
    S.phi0 = model.q_plus().x;
    S.phi_coef = (xrow * S.A_sigma.inverse()).transpose();

    // validation: G maps the Sigma_- grid onto Sigma_+
    const SmoothMap4& G = model.global;
    const int n = 9;
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 w(chart_radius * (2.0 * i / (n - 1) - 1.0),
                         chart_radius * (2.0 * j / (n - 1) - 1.0));
            const PhasePoint img = G.eval_raw(S.embed_minus(w));
            worst = std::max(worst, std::abs(img.y));
            worst = std::max(worst, std::abs(img.x - S.phi(Vec2(img.u, img.v))));
        }
    S.map_residual = worst;
    // held-out interpolation check of the sampled graphs (linear, so the
    // bilinear interpolant reproduces them up to roundoff)
    double interp = 0;
    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j + 1 < n; ++j) {
            auto grid = [&](int a, int b) {
                return Vec2(chart_radius * (2.0 * a / (n - 1) - 1.0),
                            chart_radius * (2.0 * b / (n - 1) - 1.0));
            };
            const Vec2 mid = 0.25 * (grid(i, j) + grid(i + 1, j) + grid(i, j + 1) + grid(i + 1, j + 1));
            const double psi_interp = 0.25 * (S.psi(grid(i, j)) + S.psi(grid(i + 1, j)) +
                                              S.psi(grid(i, j + 1)) + S.psi(grid(i + 1, j + 1)));
            interp = std::max(interp, std::abs(psi_interp - S.psi(mid)));
        }
    S.interp_residual = interp;
    // quadratic-term fit of Phi along a diagonal probe
    {
        double worst_quad = 0;
        for (int k = -2; k <= 2; ++k) {
            const double t = 0.4 * chart_radius * k;
            const Vec2 w(t, -t);
            const double second_diff =
                S.phi(Vec2(t + 0.1, -t)) - 2 * S.phi(w) + S.phi(Vec2(t - 0.1, -t));
            worst_quad = std::max(worst_quad, std::abs(second_diff) / 0.01);
        }
        S.quadratic_fit_max = worst_quad;
    }
    return S;
}

enum class SigmaChart { minus, plus };

struct TraceCurve {
    ManifoldSide side;
    SigmaChart chart;
    double I = 0;
    std::vector<Vec2> vertices;  // closed polygon (implicit edge last -> first)
    double section_residual_max = 0;
    double closure_gap = 0;
};

struct TraceOptions {
    int n_vertices = 1024;
    double t_seed = 1e-6;
    int k_budget = 200;
    int bisect_iters = 70;
    int fiber_depth = 60;
};

// Trace of the stable/unstable cylinder of the invariant curve on Sigma:
// each fiber is flowed out to the section, with bisection in the seed
// offset; unstable traces land on Sigma_-, stable on Sigma_+.
inline TraceCurve trace_manifold_on_sigma(const MapModel& model, const SigmaDisk& sigma,
                                          const KamCurve& kc, ManifoldSide side,
                                          const TraceOptions& opt = TraceOptions{}) {
    const RestrictedSlab slab = restricted_slab(model, side);
    const bool unstable = side == ManifoldSide::unstable;
    const double c0 = unstable ? model.q_minus().y : sigma.phi0;
    const Vec2 lin = unstable ? sigma.psi_coef : sigma.phi_coef;
    auto section_g = [&](const Vec3& w) { return w[0] - c0 - lin.dot(Vec2(w[1], w[2])); };

    TraceCurve tc;
    tc.side = side;
    tc.chart = unstable ? SigmaChart::minus : SigmaChart::plus;
    tc.I = kc.I;
    tc.vertices.reserve(opt.n_vertices);

    for (int i = 0; i < opt.n_vertices; ++i) {
        const double th = 2 * kPi * i / opt.n_vertices;
        const Vec2 m = kc.point(th);
        const FiberSolution f = solve_fiber(model, m, side, opt.fiber_depth);
        auto flow = [&](double t, int k) {
            Vec3 w(t, m[0] + t * f.p0, m[1] + t * f.q0);
            for (int s = 0; s < k; ++s) w = slab.eval(w);
            return w;
        };
        int kstar = -1;
        for (int k = 0; k <= opt.k_budget; ++k) {
            if (section_g(flow(opt.t_seed, k)) > 0) {
                kstar = k;
                break;
            }
        }
        if (kstar < 0)
            throw SectionMiss("trace_manifold_on_sigma: fiber did not reach the section in budget");
        double lo = 0, hi = opt.t_seed;
        double glo = section_g(flow(lo, kstar));
        if (glo > 0) throw SectionMiss("trace_manifold_on_sigma: section bracketing failed");
        Vec3 w_hit;
        for (int it = 0; it < opt.bisect_iters; ++it) {
            const double mid = 0.5 * (lo + hi);
            w_hit = flow(mid, kstar);
            const double g = section_g(w_hit);
            if (g <= 0) {
                lo = mid;
                glo = g;
            } else {
                hi = mid;
            }
        }
        // final secant polish between the bracket ends
        {
            const Vec3 wl = flow(lo, kstar), wh = flow(hi, kstar);
            const double gl = section_g(wl), gh = section_g(wh);
            const double s = (gh - gl) != 0 ? -gl / (gh - gl) : 0.5;
            w_hit = wl + s * (wh - wl);
        }
        tc.section_residual_max = std::max(tc.section_residual_max, std::abs(section_g(w_hit)));
        tc.vertices.emplace_back(w_hit[1], w_hit[2]);
    }
    tc.closure_gap = 0.0;  // vertices parametrized by a closed theta-grid
    return tc;
}

// Pull a Sigma_+ trace back to the Sigma_- chart through the restriction of G.
inline TraceCurve pull_back_to_minus(const TraceCurve& tc, const SigmaDisk& sigma) {
    if (tc.chart == SigmaChart::minus) return tc;
    TraceCurve out = tc;
    out.chart = SigmaChart::minus;
    const Mat2 Ainv = sigma.A_sigma.inverse();
    for (auto& w : out.vertices) w = Ainv * w;
    return out;
}

// ---------------------------------------------------------------------------
// Enclosed omega-area (shoelace in the chart where omega = du ^ dv exactly).
// ---------------------------------------------------------------------------

namespace detail {
// robust orientation of the triangle (a, b, c); falls back to long double
// when the fast double result is below its error bound
inline int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double detl = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    const double mag = std::abs((b[0] - a[0]) * (c[1] - a[1])) + std::abs((b[1] - a[1]) * (c[0] - a[0]));
    if (std::abs(detl) > 4e-16 * mag) return detl > 0 ? 1 : -1;
    const long double dl = (static_cast<long double>(b[0]) - a[0]) * (static_cast<long double>(c[1]) - a[1]) -
                           (static_cast<long double>(b[1]) - a[1]) * (static_cast<long double>(c[0]) - a[0]);
    if (dl > 0) return 1;
    if (dl < 0) return -1;
    return 0;
}

inline bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2,
                           Vec2& where) {
    const int o1 = orient2d(p1, p2, q1), o2 = orient2d(p1, p2, q2);
    const int o3 = orient2d(q1, q2, p1), o4 = orient2d(q1, q2, p2);
    if (o1 * o2 < 0 && o3 * o4 < 0) {
        const Vec2 r = p2 - p1, s = q2 - q1;
        const double denom = r[0] * s[1] - r[1] * s[0];
        const double t = ((q1 - p1)[0] * s[1] - (q1 - p1)[1] * s[0]) / denom;
        where = p1 + t * r;
        return true;
    }
    return false;
}
}  // namespace detail

inline bool polygon_self_intersects(const std::vector<Vec2>& v) {
    const size_t n = v.size();
    Vec2 dummy;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through closure
            if (detail::segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n], dummy)) return true;
        }
    return false;
}

// Signed shoelace area, orientation normalized positive.
inline double enclosed_action(const TraceCurve& tc, bool check_simple = false) {
    const auto& v = tc.vertices;
    if (v.size() < 3) throw ValidationError("enclosed_action: polygon needs at least 3 vertices");
    if (check_simple && polygon_self_intersects(v))
        throw SelfIntersecting("enclosed_action: trace polygon self-intersects");
    double s = 0;
    for (size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(0.5 * s);
}

// ---------------------------------------------------------------------------
// Transverse intersections of the two traces (Theorem-1 verification).
// ---------------------------------------------------------------------------

struct Crossing {
    Vec2 point;
    double bearing = 0;  // atan2 on the Sigma_- chart
    double angle = 0;    // crossing angle between the two curves
    bool tangency_suspected = false;
};

struct IntersectionReport {
    bool degenerate_overlap = false;
    double overlap_distance = 0;  // Hausdorff-like gap when overlapping
    std::vector<Crossing> crossings;
    int count = 0;
    // comparison against the scattering-map prediction
    int predicted_count = 0;
    std::vector<double> predicted_roots;
    double max_bearing_mismatch = 0;
    bool prediction_matched = false;
};

struct IntersectionOptions {
    double tol_angle = 1e-3;   // rad; smaller crossings flagged as tangencies
    double tol_match = 0.1;    // rad; bearing-vs-root comparison
    double overlap_fraction = 0.05;  // of curve radius: degenerate-overlap cutoff
};

namespace detail {
inline double point_to_polygon_distance(const Vec2& p, const std::vector<Vec2>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        const Vec2 d = b - a;
        const double len2 = d.squaredNorm();
        const double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (a + t * d - p).norm());
    }
    return best;
}
inline double circular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2 * kPi);
    return std::min(d, 2 * kPi - d);
}
}  // namespace detail

// Both traces must refer to the same invariant curve; they are compared on
// the Sigma_- chart.  The scattering prediction uses the fixed-frame
// representative of A, whose rho-roots approximate the crossing bearings.
inline IntersectionReport count_transverse_intersections(const TraceCurve& ws_in,
                                                         const TraceCurve& wu_in, const SigmaDisk& sigma,
                                                         const ScatteringMap* S = nullptr,
                                                         const IntersectionOptions& opt = IntersectionOptions{}) {
    const TraceCurve ws = pull_back_to_minus(ws_in, sigma);
    const TraceCurve wu = pull_back_to_minus(wu_in, sigma);
    IntersectionReport rep;

    // degenerate overlap (the integrable / rotation-block case)
    double mean_r = 0;
    for (const auto& w : wu.vertices) mean_r += w.norm();
    mean_r /= static_cast<double>(wu.vertices.size());
    double gap = 0;
    for (const auto& w : ws.vertices)
        gap = std::max(gap, detail::point_to_polygon_distance(w, wu.vertices));
    rep.overlap_distance = gap;
    if (gap < opt.overlap_fraction * mean_r) {
        rep.degenerate_overlap = true;
        return rep;
    }

    const auto& A = ws.vertices;
    const auto& B = wu.vertices;
    for (size_t i = 0; i < A.size(); ++i) {
        const Vec2 a1 = A[i], a2 = A[(i + 1) % A.size()];
        const double alox = std::min(a1[0], a2[0]), ahix = std::max(a1[0], a2[0]);
        const double aloy = std::min(a1[1], a2[1]), ahiy = std::max(a1[1], a2[1]);
        for (size_t j = 0; j < B.size(); ++j) {
            const Vec2 b1 = B[j], b2 = B[(j + 1) % B.size()];
            if (std::max(b1[0], b2[0]) < alox || std::min(b1[0], b2[0]) > ahix ||
                std::max(b1[1], b2[1]) < aloy || std::min(b1[1], b2[1]) > ahiy)
                continue;
            Vec2 where;
            if (detail::segments_cross(a1, a2, b1, b2, where)) {
                Crossing c;
                c.point = where;
                c.bearing = std::atan2(where[1], where[0]);
                if (c.bearing < 0) c.bearing += 2 * kPi;
                const Vec2 t1 = (a2 - a1).normalized();
                const Vec2 t2 = (b2 - b1).normalized();
                c.angle = std::acos(std::clamp(std::abs(t1.dot(t2)), 0.0, 1.0));
                c.tangency_suspected = c.angle < opt.tol_angle;
                rep.crossings.push_back(c);
            }
        }
    }
    rep.count = static_cast<int>(rep.crossings.size());

    if (S != nullptr) {
        const GenericityReport gen = check_genericity(S->fixed_frame());
        rep.predicted_count = gen.generic() ? 4 : 0;
        rep.predicted_roots = gen.roots;
        if (!gen.roots.empty()) {
            double worst = 0;
            for (const auto& c : rep.crossings) {
                double best = std::numeric_limits<double>::infinity();
                for (double th : gen.roots) best = std::min(best, detail::circular_distance(c.bearing, th));
                worst = std::max(worst, best);
            }
            rep.max_bearing_mismatch = worst;
            rep.prediction_matched = (rep.count == rep.predicted_count) && worst <= opt.tol_match;
        }
    }
    return rep;
}

}  // namespace homscat
