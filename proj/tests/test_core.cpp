#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"

using namespace homscat;

TEST_CASE("apply: identity and linear block action", "[core]") {
    const SmoothMap4 id = identity_map(5.0);
    const PhasePoint p(1, 2, 3, 4);
    const PhasePoint q = id.apply(p);
    CHECK(q.x == 1.0);
    CHECK(q.y == 2.0);
    CHECK(q.u == 3.0);
    CHECK(q.v == 4.0);

    const SmoothMap4 lin = linear_map("saddle_rot", one_elliptic_linear(0.5, 1.0), 5.0);
    const PhasePoint r = lin.apply(PhasePoint(1, 0, 1, 0));
    CHECK(r.x == Catch::Approx(0.5).margin(1e-15));
    CHECK(r.y == 0.0);
    CHECK(r.u == Catch::Approx(std::cos(1.0)).margin(1e-15));
    CHECK(r.v == Catch::Approx(std::sin(1.0)).margin(1e-15));
}

TEST_CASE("apply: truncated normal form on the center plane", "[core]") {
    // a = b = kappa = 0, nu = 0.1: (0,0,1,0) -> (0, 0, cos(alpha+0.1), sin(alpha+0.1))
    const double alpha = 1.0;
    const SmoothMap4 m = truncated_normal_form_map(0.5, alpha, 0, 0, 0.1, 0);
    const PhasePoint q = m.apply(PhasePoint(0, 0, 1, 0));
    CHECK(q.x == 0.0);
    CHECK(q.y == 0.0);
    CHECK(q.u == Catch::Approx(std::cos(alpha + 0.1)).margin(1e-15));
    CHECK(q.v == Catch::Approx(std::sin(alpha + 0.1)).margin(1e-15));
}

TEST_CASE("apply: domain escape raises", "[core]") {
    Mat4 big = Mat4::Identity() * 10.0;
    big(1, 1) = 0.1;
    big(3, 3) = 0.1;  // keep det 1 irrelevant here; guard is on the box
    SmoothMap4 m("expander", DomainBox::cube(1.0), [big](const PhasePoint& p) {
        return PhasePoint(Vec4(big * p.vec()));
    }, [big](const PhasePoint&) { return big; });
    m.tol_symp = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(m.apply(PhasePoint(0.9, 0, 0, 0)), DomainEscape);
}

TEST_CASE("jacobian: identity, linear, normal form at origin", "[core]") {
    const SmoothMap4 id = identity_map(2.0);
    CHECK((id.jacobian(PhasePoint(0.3, -0.2, 0.1, 0.7)) - Mat4::Identity()).norm() == 0.0);

    const Mat4 M = one_elliptic_linear(0.5, 1.0);
    const SmoothMap4 lin = linear_map("lin", M, 2.0);
    CHECK((lin.jacobian(PhasePoint(0.1, 0.2, 0.3, 0.4)) - M).norm() == 0.0);

    // Jacobian of the local model at the origin is blockdiag(diag(mu, 1/mu), R_alpha)
    const SmoothMap4 loc = build_local_map(LocalModelParams::make(0.5, 1.0, 0.3, -0.2, 0.1, 1e-3));
    const Mat4 J0 = loc.jacobian(PhasePoint(0, 0, 0, 0));
    CHECK((J0 - one_elliptic_linear(0.5, 1.0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("jacobian: non-symplectic guard", "[core]") {
    SmoothMap4 bad("bad", DomainBox::cube(2.0), [](const PhasePoint& p) { return p; },
                   [](const PhasePoint&) { return Mat4(Mat4::Identity() * 2.0); });
    CHECK_THROWS_AS(bad.jacobian(PhasePoint(0, 0, 0, 0)), NonSymplecticJacobian);
}

TEST_CASE("iterate: n = 0, geometric decay, inverse round trip", "[core]") {
    const SmoothMap4 lin = linear_map("lin", one_elliptic_linear(0.5, 0.7), 3.0);
    const PhasePoint p(1, 0, 0, 0);
    const auto orbit0 = lin.iterate(p, 0);
    REQUIRE(orbit0.size() == 1);
    CHECK(orbit0[0].x == 1.0);

    const auto orbit = lin.iterate(p, 3);
    REQUIRE(orbit.size() == 4);
    CHECK(orbit[1].x == Catch::Approx(0.5).margin(1e-15));
    CHECK(orbit[2].x == Catch::Approx(0.25).margin(1e-15));
    CHECK(orbit[3].x == Catch::Approx(0.125).margin(1e-15));

    // round trip through the perturbed local model (closed-form inverse)
    const SmoothMap4 loc = build_local_map(LocalModelParams::make(0.5, 1.0, 0.1, -0.05, 0.1, 0.05));
    const PhasePoint q(0.3, -0.2, 0.25, 0.4);
    const auto fwd = loc.iterate(q, 5);
    const auto back = loc.iterate(fwd.back(), -5);
    CHECK(distance(back.back(), q) < 1e-9);
}

TEST_CASE("iterate: Newton inversion when no closed form", "[core]") {
    const SmoothMap4 loc = build_local_map(LocalModelParams::make(0.5, 1.0, 0.1, -0.05, 0.1, 1e-2));
    SmoothMap4 no_inv("no_inv", loc.domain(), [loc](const PhasePoint& p) { return loc.eval_raw(p); },
                      [loc](const PhasePoint& p) { return loc.jacobian_unchecked(p); });
    const PhasePoint q(0.2, 0.1, -0.3, 0.2);
    const PhasePoint img = no_inv.apply(q);
    CHECK(distance(no_inv.invert(img), q) < 1e-10);
}

TEST_CASE("block identities: identity matrix, model Jacobians, uniform scaling", "[core]") {
    CHECK(check_symplectic_block_identities(Mat4::Identity()).max_residual() == 0.0);

    const SmoothMap4 loc = build_local_map(LocalModelParams::make(0.5, 1.0, 0.2, -0.1, 0.1, 1e-3));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-0.8, 0.8);
    for (int i = 0; i < 100; ++i) {
        const Mat4 J = loc.jacobian_unchecked(PhasePoint(U(rng), U(rng), U(rng), U(rng)));
        CHECK(check_symplectic_block_identities(J).max_residual() <= 1e-10);
    }

    const BlockIdentityReport bad = check_symplectic_block_identities(Mat4(2.0 * Mat4::Identity()));
    CHECK(bad.res_dta == Catch::Approx(3.0).margin(1e-15));  // d^T a - b^T c = 4 E
    CHECK_FALSE(bad.pass(1e-10));
}

TEST_CASE("property: symplecticity residual <= 1e-10 on sampled domain", "[core]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (const auto& m : {build_local_map(LocalModelParams::make(0.5, 1.0, 0.0, 0.0, 0.1, 1e-3)),
                          build_local_map(LocalModelParams::make(0.7, 0.9, 0.2, -0.15, -0.2, 0.1))}) {
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            const Mat4 J = m.jacobian_unchecked(PhasePoint(U(rng), U(rng), U(rng), U(rng)));
            worst = std::max(worst, symplecticity_residual(J));
            CHECK(std::abs(J.determinant() - 1.0) <= 1e-10);
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("property: closed-form Jacobian vs central differences", "[core]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    const SmoothMap4 loc = build_local_map(LocalModelParams::make(0.5, 1.0, 0.3, -0.2, 0.1, 0.05));
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const PhasePoint p(U(rng), U(rng), U(rng), U(rng));
        worst = std::max(worst, (loc.jacobian_unchecked(p) - test::fd_jacobian(loc, p)).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("property: composition consistency of Jacobians", "[core]") {
    const SmoothMap4 loc = build_local_map(LocalModelParams::make(0.6, 1.1, 0.1, -0.07, 0.15, 0.02));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-0.4, 0.4);
    for (int i = 0; i < 50; ++i) {
        const PhasePoint p(U(rng), U(rng), U(rng), U(rng));
        const PhasePoint fp = loc.eval_raw(p);
        const Mat4 J2 = loc.jacobian_unchecked(fp) * loc.jacobian_unchecked(p);
        const SmoothMap4 sq = SmoothMap4::compose("f2", loc, loc);
        CHECK((sq.jacobian_unchecked(p) - J2).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("phase point rejects non-finite components", "[core]") {
    CHECK_THROWS_AS(PhasePoint(std::numeric_limits<double>::quiet_NaN(), 0, 0, 0), Error);
    CHECK_THROWS_AS(PhasePoint(0, std::numeric_limits<double>::infinity(), 0, 0), Error);
}
