#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"

using namespace homscat;

namespace {
TraceCurve circle_trace(double r, int n, ManifoldSide side, SigmaChart chart) {
    TraceCurve tc;
    tc.side = side;
    tc.chart = chart;
    for (int i = 0; i < n; ++i) {
        const double th = 2 * kPi * i / n;
        tc.vertices.emplace_back(r * std::cos(th), r * std::sin(th));
    }
    return tc;
}
}  // namespace

TEST_CASE("sigma disk: linear graphs, anchor, G maps Sigma- onto Sigma+", "[sigma]") {
    const MapModel m = build_demo_model();
    const SigmaDisk sd = build_sigma_disk(m, 0.15);
    CHECK(sd.map_residual <= 1e-10);
    CHECK(sd.interp_residual <= 1e-12);
    CHECK(sd.quadratic_fit_max <= 1e-12);  // Phi exactly linear for the affine G
    // q_plus sits at chart origin: Phi(0,0) = x0
    CHECK(sd.phi(Vec2(0, 0)) == Catch::Approx(m.q_plus().x).margin(1e-15));
    CHECK(std::abs(sd.A_sigma.determinant() - 1.0) <= 1e-12);  // symplectic restriction
    // blockdiag demo: A_sigma = B, Psi = 0
    CHECK((sd.A_sigma - (Mat2() << 1.5, 0, 0, 1 / 1.5).finished()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(sd.psi_coef.norm() == 0.0);

    // mixing global matrix: Psi nonzero, graphs still linear and consistent
    GlobalMapSpec gs = m.gspec;
    gs.M = test::transvection(Vec4(0.1, 0.05, 0.2, -0.15)) * m.gspec.M;
    const MapModel m2 = build_model(m.params, gs, m.gluing_radius);
    const SigmaDisk sd2 = build_sigma_disk(m2, 0.1);
    CHECK(sd2.psi_coef.norm() > 0);
    CHECK(sd2.map_residual <= 1e-10);
    CHECK(std::abs(sd2.A_sigma.determinant() - 1.0) <= 1e-12);

    CHECK_THROWS_AS(build_sigma_disk(m, 0.3), ChartTooLarge);
}

TEST_CASE("traces: integrable case, circle and ellipse of equal area", "[sigma]") {
    DemoConfig dc;
    dc.params.eps_pert = 0.0;
    const MapModel m = build_demo_model(dc);
    const SigmaDisk sd = build_sigma_disk(m, 0.15);
    const CenterMap cm = restrict_to_center(m);
    const auto kam = detect_kam_curves(cm, {0.5}, 0.1);
    REQUIRE(kam[0].verdict == KamVerdict::quasiperiodic);
    TraceOptions topt;
    topt.n_vertices = 512;
    const TraceCurve wu = trace_manifold_on_sigma(m, sd, kam[0], ManifoldSide::unstable, topt);
    const TraceCurve ws = trace_manifold_on_sigma(m, sd, kam[0], ManifoldSide::stable, topt);
    CHECK(wu.section_residual_max <= 1e-9);
    CHECK(ws.section_residual_max <= 1e-9);
    CHECK(static_cast<int>(wu.vertices.size()) == topt.n_vertices);

    // w_u on Sigma_- is the circle of radius eps sqrt(2 I)
    const double r = 0.1 * std::sqrt(2.0 * 0.5);
    for (const auto& w : wu.vertices) CHECK(w.norm() == Catch::Approx(r).margin(1e-10));
    // w_s on Sigma_+ is also a circle; its Sigma_- pullback is the
    // B^{-1}-ellipse with semi-axis ratio (3/2)^2 = 2.25
    for (const auto& w : ws.vertices) CHECK(w.norm() == Catch::Approx(r).margin(1e-10));
    const TraceCurve ws_minus = pull_back_to_minus(ws, sd);
    double umax = 0, vmax = 0;
    for (const auto& w : ws_minus.vertices) {
        umax = std::max(umax, std::abs(w[0]));
        vmax = std::max(vmax, std::abs(w[1]));
    }
    CHECK(vmax / umax == Catch::Approx(2.25).margin(1e-6));

    // Lemma 2: equal enclosed actions
    const double au = enclosed_action(pull_back_to_minus(wu, sd));
    const double as = enclosed_action(ws_minus);
    CHECK(std::abs(au - as) / as <= 1e-6);
}

TEST_CASE("enclosed action: shoelace error bound on a circle", "[sigma]") {
    // regular n-gon area = 1/2 n r^2 sin(2 pi/n); the deficit to pi r^2 is
    // below 2 pi^3 r^2 / n^2
    for (int n : {64, 256, 1024}) {
        const TraceCurve tc = circle_trace(0.2, n, ManifoldSide::stable, SigmaChart::minus);
        const double err = std::abs(enclosed_action(tc) - kPi * 0.04);
        CHECK(err <= 2 * kPi * kPi * kPi * 0.04 / (n * n));
    }
}

TEST_CASE("enclosed action: unimodular image preserves polygon area exactly", "[sigma]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    const TraceCurve tc = circle_trace(0.17, 256, ManifoldSide::stable, SigmaChart::minus);
    Mat2 B = rotation2(U(rng)) * (Mat2() << 1.4, 0.3, 0, 1 / 1.4).finished();
    TraceCurve im = tc;
    for (auto& w : im.vertices) w = B * w;
    CHECK(enclosed_action(im) == Catch::Approx(enclosed_action(tc)).epsilon(1e-12));
}

TEST_CASE("enclosed action: self-intersection guard", "[sigma]") {
    TraceCurve bow;
    bow.chart = SigmaChart::minus;
    bow.vertices = {Vec2(0, 0), Vec2(1, 1), Vec2(1, 0), Vec2(0, 1)};
    CHECK(polygon_self_intersects(bow.vertices));
    CHECK_THROWS_AS(enclosed_action(bow, true), SelfIntersecting);
    const TraceCurve ok = circle_trace(0.2, 64, ManifoldSide::stable, SigmaChart::minus);
    CHECK_FALSE(polygon_self_intersects(ok.vertices));
    CHECK_NOTHROW(enclosed_action(ok, true));
}

TEST_CASE("intersections: ellipse pair has four transverse crossings at the roots", "[sigma]") {
    // circle vs A(circle) with A = diag(3/2, 2/3): the synthetic analogue of
    // the trace comparison, bearings exactly at the rho-roots
    const Mat2 A = (Mat2() << 1.5, 0, 0, 2.0 / 3.0).finished();
    const int n = 2048;
    const TraceCurve wu = circle_trace(1.0, n, ManifoldSide::unstable, SigmaChart::minus);
    TraceCurve ws = circle_trace(1.0, n, ManifoldSide::stable, SigmaChart::minus);
    for (auto& w : ws.vertices) w = A.inverse() * w;  // pullback of the image circle
    SigmaDisk dummy;
    dummy.A_sigma = Mat2::Identity();
    ScatteringMap S;
    S.A = A;
    S.N = 0;
    S.alpha = 0;
    const IntersectionReport rep = count_transverse_intersections(ws, wu, dummy, &S);
    CHECK(rep.count == 4);
    CHECK(rep.predicted_count == 4);
    CHECK(rep.max_bearing_mismatch <= 1e-5);
    CHECK(rep.prediction_matched);
    for (const auto& c : rep.crossings) {
        CHECK(c.angle >= 1e-3);
        CHECK_FALSE(c.tangency_suspected);
    }
}

TEST_CASE("intersections: coincident curves report degenerate overlap", "[sigma]") {
    const TraceCurve a = circle_trace(0.3, 512, ManifoldSide::stable, SigmaChart::minus);
    const TraceCurve b = circle_trace(0.3, 512, ManifoldSide::unstable, SigmaChart::minus);
    SigmaDisk dummy;
    dummy.A_sigma = Mat2::Identity();
    const IntersectionReport rep = count_transverse_intersections(a, b, dummy);
    CHECK(rep.degenerate_overlap);
}

TEST_CASE("intersections: crossing count parity for equal-area curves", "[sigma]") {
    // any two simple closed curves with equal area and a common interior
    // point cross an even number of times
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.4, 0.4);
    SigmaDisk dummy;
    dummy.A_sigma = Mat2::Identity();
    for (int trial = 0; trial < 10; ++trial) {
        const double s = std::exp(0.3 + 0.2 * U(rng));
        Mat2 B = rotation2(U(rng)) * (Mat2() << s, 0, 0, 1 / s).finished() * rotation2(U(rng));
        const TraceCurve wu = circle_trace(0.5, 1024, ManifoldSide::unstable, SigmaChart::minus);
        TraceCurve ws = wu;
        ws.side = ManifoldSide::stable;
        for (auto& w : ws.vertices) w = B * w;
        const IntersectionReport rep = count_transverse_intersections(ws, wu, dummy);
        CHECK(rep.count % 2 == 0);
        CHECK(rep.count >= 2);
    }
}

TEST_CASE("traces: perturbed demo, equal action and four matched crossings", "[sigma]") {
    const MapModel m = build_demo_model();  // eps_pert = 1e-3
    const SigmaDisk sd = build_sigma_disk(m, 0.15);
    const CenterMap cm = restrict_to_center(m);
    const HomoclinicOrbit orb = assemble_homoclinic_orbit(m, 60);
    const LinearizationSequence seq = derotate(linearize_along_orbit(m, orb, 6));
    const ScatteringMap S = build_scattering_map(seq);
    const auto kam = detect_kam_curves(cm, {0.4, 0.8}, 0.1);
    TraceOptions topt;
    topt.n_vertices = 1024;
    for (const auto& kc : kam) {
        REQUIRE(kc.verdict == KamVerdict::quasiperiodic);
        const TraceCurve wu = trace_manifold_on_sigma(m, sd, kc, ManifoldSide::unstable, topt);
        const TraceCurve ws = trace_manifold_on_sigma(m, sd, kc, ManifoldSide::stable, topt);
        const double au = enclosed_action(pull_back_to_minus(wu, sd));
        const double as = enclosed_action(pull_back_to_minus(ws, sd));
        CHECK(std::abs(au - as) / as <= 1e-4);
        const IntersectionReport rep = count_transverse_intersections(ws, wu, sd, &S);
        CHECK(rep.count == 4);
        CHECK(rep.max_bearing_mismatch <= 0.1);
        CHECK(rep.prediction_matched);
        for (const auto& c : rep.crossings) CHECK(c.angle >= 1e-3);
    }
    // trace resolution convergence: Hausdorff gap between n and 2n vertices
    TraceOptions lo;
    lo.n_vertices = 128;
    TraceOptions hi;
    hi.n_vertices = 256;
    const TraceCurve c1 = trace_manifold_on_sigma(m, sd, kam[0], ManifoldSide::unstable, lo);
    const TraceCurve c2 = trace_manifold_on_sigma(m, sd, kam[0], ManifoldSide::unstable, hi);
    double hgap = 0;
    for (const auto& w : c1.vertices)
        hgap = std::max(hgap, homscat::detail::point_to_polygon_distance(w, c2.vertices));
    CHECK(hgap <= 10.0 / (128.0 * 128.0));
}
