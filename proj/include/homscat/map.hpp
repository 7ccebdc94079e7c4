#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/types.hpp"

namespace homscat {

// Axis-aligned domain box.  Models declare [-h, h]^4.
struct DomainBox {
    Vec4 lo = Vec4::Constant(-1.0);
    Vec4 hi = Vec4::Constant(1.0);

    static DomainBox cube(double half_width) {
        DomainBox b;
        b.lo = Vec4::Constant(-half_width);
        b.hi = Vec4::Constant(half_width);
        return b;
    }
    bool contains(const PhasePoint& p, double margin = 0.0) const {
        const Vec4 z = p.vec();
        for (int i = 0; i < 4; ++i)
            if (z[i] < lo[i] - margin || z[i] > hi[i] + margin) return false;
        return true;
    }
};

// A smooth map of the 4-D phase space with closed-form Jacobian and, when
// available, a closed-form inverse.  Everything is immutable after
// construction and safe to share across threads.
class SmoothMap4 {
  public:
    using EvalFn = std::function<PhasePoint(const PhasePoint&)>;
    using JacFn = std::function<Mat4(const PhasePoint&)>;

    SmoothMap4() = default;
    SmoothMap4(std::string name, DomainBox domain, EvalFn eval, JacFn jac, EvalFn inverse = nullptr)
        : name_(std::move(name)),
          domain_(domain),
          eval_(std::move(eval)),
          jac_(std::move(jac)),
          inverse_(std::move(inverse)) {}

    const std::string& name() const { return name_; }
    const DomainBox& domain() const { return domain_; }
    bool has_closed_inverse() const { return static_cast<bool>(inverse_); }

    // Symplecticity tolerance enforced by jacobian(); infinity disables the
    // check (used for deliberately non-symplectic test fixtures).
    double tol_symp = 1e-9;
    double domain_margin = 0.5;

    PhasePoint apply(const PhasePoint& p) const {
        PhasePoint q = eval_(p);
        if (!q.finite() || !domain_.contains(q, domain_margin))
            throw DomainEscape(name_ + ": image left the declared domain box");
        return q;
    }

    // Raw evaluation without the domain guard (internal flow-outs that
    // intentionally leave the box use this).
    PhasePoint eval_raw(const PhasePoint& p) const { return eval_(p); }

    Mat4 jacobian(const PhasePoint& p) const {
        Mat4 J = jac_(p);
        if (tol_symp < std::numeric_limits<double>::infinity()) {
            const double r = symplecticity_residual(J);
            if (r > tol_symp)
                throw NonSymplecticJacobian(name_ + ": symplecticity residual " + std::to_string(r));
        }
        return J;
    }

    Mat4 jacobian_unchecked(const PhasePoint& p) const { return jac_(p); }

    PhasePoint invert(const PhasePoint& target, std::optional<PhasePoint> guess = std::nullopt,
                      double tol = 1e-12, int max_iter = 50) const {
        if (inverse_) return inverse_(target);
        // Newton with the forward Jacobian.
        PhasePoint p = guess.value_or(target);
        for (int it = 0; it < max_iter; ++it) {
            const Vec4 r = eval_(p).vec() - target.vec();
            if (r.norm() <= tol) return p;
            const Vec4 step = jac_(p).partialPivLu().solve(r);
            const Vec4 z = p.vec() - step;
            if (!z.allFinite()) throw InverseDivergence(name_ + ": Newton inversion produced non-finite iterate");
            p = PhasePoint(z);
        }
        throw InverseDivergence(name_ + ": Newton inversion failed to converge");
    }

    // Orbit segment of length |n|+1 starting at p; negative n iterates the
    // inverse.
    std::vector<PhasePoint> iterate(const PhasePoint& p, long n) const {
        std::vector<PhasePoint> orbit;
        orbit.reserve(static_cast<size_t>(std::abs(n)) + 1);
        orbit.push_back(p);
        PhasePoint cur = p;
        for (long k = 0; k < std::labs(n); ++k) {
            cur = (n > 0) ? apply(cur) : invert(cur);
            if (!domain_.contains(cur, domain_margin))
                throw DomainEscape(name_ + ": orbit left the domain box at step " + std::to_string(k + 1));
            orbit.push_back(cur);
        }
        return orbit;
    }

    // Composition g o f (apply f first).
    static SmoothMap4 compose(const std::string& name, const SmoothMap4& f, const SmoothMap4& g) {
        EvalFn ev = [f, g](const PhasePoint& p) { return g.eval_raw(f.eval_raw(p)); };
        JacFn jc = [f, g](const PhasePoint& p) {
            const PhasePoint mid = f.eval_raw(p);
            return Mat4(g.jacobian_unchecked(mid) * f.jacobian_unchecked(p));
        };
        EvalFn inv = nullptr;
        if (f.has_closed_inverse() && g.has_closed_inverse()) {
            inv = [f, g](const PhasePoint& q) { return f.invert(g.invert(q)); };
        }
        return SmoothMap4(name, f.domain(), std::move(ev), std::move(jc), std::move(inv));
    }

  private:
    std::string name_;
    DomainBox domain_;
    EvalFn eval_;
    JacFn jac_;
    EvalFn inverse_;
};

inline SmoothMap4 identity_map(double half_width = 1.0) {
    return SmoothMap4(
        "identity", DomainBox::cube(half_width), [](const PhasePoint& p) { return p; },
        [](const PhasePoint&) { return Mat4::Identity(); }, [](const PhasePoint& p) { return p; });
}

inline SmoothMap4 linear_map(const std::string& name, const Mat4& M, double half_width = 1.0) {
    const Mat4 Minv = M.inverse();
    return SmoothMap4(
        name, DomainBox::cube(half_width), [M](const PhasePoint& p) { return PhasePoint(Vec4(M * p.vec())); },
        [M](const PhasePoint&) { return M; },
        [Minv](const PhasePoint& q) { return PhasePoint(Vec4(Minv * q.vec())); });
}

}  // namespace homscat
