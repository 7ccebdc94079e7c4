#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "homscat/center.hpp"
#include "homscat/errors.hpp"
#include "homscat/homoclinic.hpp"
#include "homscat/model.hpp"
#include "homscat/types.hpp"

namespace homscat {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Restriction of the dynamics to the 3-D invariant hyperplane carrying the
// fibers: W^cu = {x=0} with coordinates (y,u,v) and the forward map for the
// unstable side, W^cs = {y=0} with coordinates (x,u,v) and the inverse map
// for the stable side.  In both cases the first coordinate is the expanding
// one and the restricted base dynamics on W^c is the one the fiber
// contraction marches along.
struct RestrictedSlab {
    ManifoldSide side;
    std::function<Vec3(const Vec3&)> eval;
    std::function<Mat3(const Vec3&)> jac;
    std::function<Vec2(const Vec2&)> base_step;      // center dynamics in the marching direction
    std::function<Vec2(const Vec2&)> base_step_inv;  // and its inverse
    std::function<PhasePoint(const Vec3&)> embed;
};

inline RestrictedSlab restricted_slab(const MapModel& model, ManifoldSide side) {
    const SmoothMap4 loc = model.local;
    const CenterMap cm = restrict_to_center(model);
    RestrictedSlab s;
    s.side = side;
    if (side == ManifoldSide::unstable) {
        s.embed = [](const Vec3& w) { return PhasePoint(0, w[0], w[1], w[2]); };
        s.eval = [loc](const Vec3& w) {
            const PhasePoint q = loc.eval_raw(PhasePoint(0, w[0], w[1], w[2]));
            return Vec3(q.y, q.u, q.v);
        };
        s.jac = [loc](const Vec3& w) {
            const Mat4 D = loc.jacobian_unchecked(PhasePoint(0, w[0], w[1], w[2]));
            Mat3 A;
            const int idx[3] = {1, 2, 3};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) A(i, j) = D(idx[i], idx[j]);
            return A;
        };
        s.base_step = cm.eval;
        s.base_step_inv = cm.inverse;
    } else {
        s.embed = [](const Vec3& w) { return PhasePoint(w[0], 0, w[1], w[2]); };
        s.eval = [loc](const Vec3& w) {
            const PhasePoint q = loc.invert(PhasePoint(w[0], 0, w[1], w[2]));
            return Vec3(q.x, q.u, q.v);
        };
        s.jac = [loc](const Vec3& w) {
            // Jacobian of the restricted inverse map via the symplectic inverse
            const PhasePoint pre = loc.invert(PhasePoint(w[0], 0, w[1], w[2]));
            const Mat4 D = loc.jacobian_unchecked(pre);
            const Mat4& J = symplectic_structure();
            const Mat4 Dinv = -J * D.transpose() * J;
            Mat3 A;
            const int idx[3] = {0, 2, 3};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) A(i, j) = Dinv(idx[i], idx[j]);
            return A;
        };
        s.base_step = cm.inverse;
        s.base_step_inv = cm.eval;
    }
    return s;
}

// Fixed point of the line-transport recursion over the base orbit of m:
// straight lines (eta, p eta, q eta) in the tangent space of the slab are
// carried by the differential; the recursion contracts with factor ~ mu and
// the fixed-point direction is the fiber tangent at m.
struct FiberSolution {
    ManifoldSide side;
    Vec2 base;                  // point m on W^c
    double p0 = 0, q0 = 0;      // fiber direction (1, p0, q0) in slab coordinates
    std::vector<Vec2> pq_window;  // (p_j, q_j) along the marching window
    std::vector<Vec2> base_window;  // matching base points, last = m
    double convergence_gap = 0;   // two-seed agreement at m
    double lipschitz_measured = 0;
    double alpha_star = 0, rho_star = 0, tau_star = 0;
    double delta1 = 0, delta2 = 0;

    Vec4 direction4() const {
        Vec3 d(1.0, p0, q0);
        d.normalize();
        if (side == ManifoldSide::unstable) return Vec4(0, d[0], d[1], d[2]);
        return Vec4(d[0], 0, d[1], d[2]);
    }
};

namespace detail {
inline Vec2 transport_pq(const Mat3& A, const Vec2& pq) {
    const double denom = A(0, 0) + A(0, 1) * pq[0] + A(0, 2) * pq[1];
    return Vec2((A(1, 0) + A(1, 1) * pq[0] + A(1, 2) * pq[1]) / denom,
                (A(2, 0) + A(2, 1) * pq[0] + A(2, 2) * pq[1]) / denom);
}
}  // namespace detail

inline FiberSolution solve_fiber(const MapModel& model, const Vec2& m, ManifoldSide side,
                                 int depth = 60, double tol_fiber = 1e-12) {
    const RestrictedSlab slab = restricted_slab(model, side);
    const double mu_inv = 1.0 / model.params.mu;

    FiberSolution sol;
    sol.side = side;
    sol.base = m;

    // base orbit backwards along the marching direction
    std::vector<Vec2> base(depth + 1);
    base[depth] = m;
    for (int j = depth - 1; j >= 0; --j) base[j] = slab.base_step_inv(base[j + 1]);
    std::vector<Mat3> A(depth);
    for (int j = 0; j < depth; ++j) A[j] = slab.jac(Vec3(0.0, base[j][0], base[j][1]));

    Vec2 pq1(0, 0), pq2(0.3, -0.2);
    std::vector<Vec2> window(depth + 1);
    window[0] = pq1;
    double prev_gap = -1;
    for (int j = 0; j < depth; ++j) {
        pq1 = detail::transport_pq(A[j], pq1);
        pq2 = detail::transport_pq(A[j], pq2);
        window[j + 1] = pq1;
        const double gap = (pq1 - pq2).norm();
        if (prev_gap > 0 && gap > 0)
            sol.lipschitz_measured = std::max(sol.lipschitz_measured, gap / prev_gap);
        prev_gap = gap;
    }
    if (sol.lipschitz_measured >= 1.0)
        throw NoContraction("solve_fiber: line transport is not contracting; shrink the annulus");
    sol.convergence_gap = (pq1 - pq2).norm();
    if (sol.convergence_gap > tol_fiber * 10 + 1e-12 && depth < 400) {
        return solve_fiber(model, m, side, depth * 2, tol_fiber);
    }
    sol.p0 = pq1[0];
    sol.q0 = pq1[1];
    sol.pq_window = window;
    sol.base_window = base;

    // diagnostics: delta1 from the expanding coefficient, delta2 from the
    // center block of the inverse differential
    for (int j = 0; j < depth; ++j) {
        sol.delta1 = std::max(sol.delta1, std::abs(A[j](0, 0) - mu_inv) * model.params.mu);
        const Mat3 Ai = A[j].inverse();
        sol.delta2 = std::max({sol.delta2, std::abs(Ai(1, 1) - 1.0), std::abs(Ai(1, 2)),
                               std::abs(Ai(2, 1)), std::abs(Ai(2, 2) - 1.0)});
    }

    // growth-rate functionals along backward transport
    Vec3 v = Vec3(1.0, sol.p0, sol.q0).normalized();
    Vec3 w = Vec3(0.0, 1.0, 0.0);
    Vec3 xi = Vec3(0.0, 0.4, 0.7).normalized();
    std::vector<double> lv, lw, lx;
    for (int j = depth - 1; j >= 0; --j) {
        const Mat3 Ai = A[j].inverse();
        v = Ai * v;
        w = Ai * w;
        xi = Ai * xi;
        lv.push_back(std::log(v.norm()));
        lw.push_back(std::log(w.norm()));
        lx.push_back(std::log(xi.norm()));
    }
    auto slope = [](const std::vector<double>& y) {
        // least squares on the middle half, avoids both transients
        const size_t lo = y.size() / 4, hi = 3 * y.size() / 4;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = lo; i < hi; ++i) {
            sx += i;
            sy += y[i];
            sxx += double(i) * i;
            sxy += i * y[i];
        }
        const double n = static_cast<double>(hi - lo);
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double rate_v = std::exp(slope(lv));
    const double rate_w = std::exp(slope(lw));
    const double rate_x = std::exp(slope(lx));
    sol.alpha_star = rate_v;
    sol.rho_star = rate_v / rate_w;
    sol.tau_star = (rate_x <= 1.0) ? 0.0 : std::log(rate_x) / (-std::log(sol.rho_star));
    return sol;
}

// Sampled stable/unstable cylinder over a closed curve of base points,
// extended by iteration until the expanding coordinate reaches `extent`.
struct KamCylinder {
    ManifoldSide side;
    std::vector<std::vector<PhasePoint>> rings;  // rings[k][i]: k-th flow-out stage, i-th fiber
    double lagrangian_residual = 0;
};

inline KamCylinder build_kam_cylinder(const MapModel& model, const std::vector<Vec2>& base_points,
                                      ManifoldSide side, double extent, double t_seed = 1e-4,
                                      int max_stage = 64) {
    const RestrictedSlab slab = restricted_slab(model, side);
    KamCylinder cyl;
    cyl.side = side;
    std::vector<Vec3> cur;
    std::vector<Vec3> tang;  // fiber tangents, transported by the differential
    cur.reserve(base_points.size());
    for (const auto& m : base_points) {
        const FiberSolution f = solve_fiber(model, m, side);
        cur.push_back(Vec3(t_seed, m[0] + t_seed * f.p0, m[1] + t_seed * f.q0));
        tang.push_back(Vec3(1.0, f.p0, f.q0).normalized());
    }
    auto to_ring = [&](const std::vector<Vec3>& pts) {
        std::vector<PhasePoint> ring;
        ring.reserve(pts.size());
        for (const auto& w : pts) ring.push_back(slab.embed(w));
        return ring;
    };
    auto embed_tangent = [&](const Vec3& t) {
        return side == ManifoldSide::unstable ? Vec4(0, t[0], t[1], t[2]) : Vec4(t[0], 0, t[1], t[2]);
    };
    auto lagrangian_of_ring = [&](const std::vector<Vec3>& pts, const std::vector<Vec3>& tg) {
        double worst = 0;
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            const Vec4 t_theta = slab.embed(pts[i + 1]).vec() - slab.embed(pts[i]).vec();
            const Vec4 t_fiber = embed_tangent(tg[i]);
            const double area = t_theta.norm() * t_fiber.norm();
            if (area > 1e-20) worst = std::max(worst, std::abs(omega(t_theta, t_fiber)) / area);
        }
        return worst;
    };
    cyl.rings.push_back(to_ring(cur));
    cyl.lagrangian_residual = lagrangian_of_ring(cur, tang);
    for (int stage = 0; stage < max_stage; ++stage) {
        bool done = true;
        for (size_t i = 0; i < cur.size(); ++i) {
            tang[i] = (slab.jac(cur[i]) * tang[i]).normalized();
            cur[i] = slab.eval(cur[i]);
            if (std::abs(cur[i][0]) < extent) done = false;
        }
        cyl.rings.push_back(to_ring(cur));
        cyl.lagrangian_residual = std::max(cyl.lagrangian_residual, lagrangian_of_ring(cur, tang));
        if (done) break;
    }
    return cyl;
}

}  // namespace homscat
