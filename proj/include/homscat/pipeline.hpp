#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "homscat/config.hpp"
#include "homscat/errors.hpp"
#include "homscat/fixed_point.hpp"
#include "homscat/homoclinic.hpp"
#include "homscat/scattering.hpp"
#include "homscat/sigma.hpp"

namespace homscat {

inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

struct StageStatus {
    std::string name;
    bool ok = false;
    std::string message;
};

struct CurveResult {
    KamCurve curve;
    double area_s = 0, area_u = 0;
    double rel_action_gap = 0;
    IntersectionReport intersections;
    bool traced = false;
    std::string error;
};

struct PipelineReport {
    std::string config_echo;
    std::vector<StageStatus> stages;
    Spectrum1Elliptic spectrum;
    HomoclinicOrbit orbit;
    TransversalityReport transversality;
    ScatteringMap scattering;
    GenericityReport genericity;
    std::vector<CurveResult> curves;
    bool all_pass = false;

    void stage_done(const std::string& name, const std::string& msg = "ok") {
        stages.push_back({name, true, msg});
    }
};

namespace detail {
// deterministic parallel map over an index range: results land in
// pre-allocated slots regardless of scheduling
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}
}  // namespace detail

inline void emit_orbit_csv(const HomoclinicOrbit& orbit, const std::string& path) {
    std::ostringstream os;
    os << "n,x,y,u,v\n";
    for (int n = -orbit.n_max; n <= orbit.n_max; ++n) {
        const PhasePoint& p = orbit.at(n);
        os << n << "," << fmt17(p.x) << "," << fmt17(p.y) << "," << fmt17(p.u) << "," << fmt17(p.v)
           << "\n";
    }
    detail::write_file(path, os.str());
}

inline void emit_scattering_txt(const ScatteringMap& S, const GenericityReport& gen,
                                const TransversalityReport& tr, const std::string& path) {
    std::ostringstream os;
    os << "A = [" << fmt17(S.A(0, 0)) << ", " << fmt17(S.A(0, 1)) << "; " << fmt17(S.A(1, 0)) << ", "
       << fmt17(S.A(1, 1)) << "]\n";
    os << "frame = co-rotating at indices -N, +N with N = " << S.N << "\n";
    os << "det_residual = " << fmt17(S.det_residual) << "\n";
    const Mat2 F = S.fixed_frame();
    os << "A_fixed_frame = [" << fmt17(F(0, 0)) << ", " << fmt17(F(0, 1)) << "; " << fmt17(F(1, 0))
       << ", " << fmt17(F(1, 1)) << "]\n";
    os << "classification = "
       << (gen.classification == GenericityClass::generic
               ? "generic"
               : (gen.classification == GenericityClass::degenerate_rotation ? "degenerate-rotation"
                                                                             : "near-degenerate"))
       << "\n";
    os << "roots =";
    for (double r : gen.roots) os << " " << fmt17(r);
    os << "\n";
    os << "min_crossing_angle = " << fmt17(gen.min_crossing_angle) << "\n";
    os << "d11 = " << fmt17(tr.d11) << "\n";
    os << "transversality_Delta = " << fmt17(tr.Delta) << "\n";
    os << "transversality_identity_residual = " << fmt17(tr.identity_residual) << "\n";
    detail::write_file(path, os.str());
}

inline void emit_kam_csv(const std::vector<KamCurve>& kam, const std::string& path) {
    std::ostringstream os;
    os << "I,rotation_number,verdict,residual\n";
    for (const auto& k : kam) {
        const char* v = k.verdict == KamVerdict::quasiperiodic
                            ? "quasiperiodic"
                            : (k.verdict == KamVerdict::resonant ? "resonant" : "chaotic");
        os << fmt17(k.I) << "," << fmt17(k.rho.value) << "," << v << ","
           << fmt17(k.invariance_residual) << "\n";
    }
    detail::write_file(path, os.str());
}

inline void emit_trace_csv(const TraceCurve& ws, const TraceCurve& wu, const std::string& path) {
    std::ostringstream os;
    os << "side,theta,u,v\n";
    auto rows = [&](const TraceCurve& tc, const char* tag) {
        for (size_t i = 0; i < tc.vertices.size(); ++i) {
            const double th = 2 * kPi * static_cast<double>(i) / tc.vertices.size();
            os << tag << "," << fmt17(th) << "," << fmt17(tc.vertices[i][0]) << ","
               << fmt17(tc.vertices[i][1]) << "\n";
        }
    };
    rows(ws, "stable");
    rows(wu, "unstable");
    detail::write_file(path, os.str());
}

inline void emit_intersections_csv(const std::vector<CurveResult>& curves, const std::string& path) {
    std::ostringstream os;
    os << "I,count,degenerate_overlap,rel_action_gap,min_angle,max_bearing_mismatch,angles\n";
    for (const auto& c : curves) {
        if (!c.traced) continue;
        double min_angle = 0;
        if (!c.intersections.crossings.empty()) {
            min_angle = c.intersections.crossings.front().angle;
            for (const auto& x : c.intersections.crossings) min_angle = std::min(min_angle, x.angle);
        }
        os << fmt17(c.curve.I) << "," << c.intersections.count << ","
           << (c.intersections.degenerate_overlap ? 1 : 0) << "," << fmt17(c.rel_action_gap) << ","
           << fmt17(min_angle) << "," << fmt17(c.intersections.max_bearing_mismatch);
        for (const auto& x : c.intersections.crossings) os << "," << fmt17(x.angle);
        os << "\n";
    }
    detail::write_file(path, os.str());
}

inline std::string trace_file_name(double I) {
    std::ostringstream os;
    os << "traces_I" << fmt17(I) << ".csv";
    return os.str();
}

// Pipeline: build -> fixed point -> homoclinic -> scattering -> genericity ->
// KAM scan -> Sigma traces -> intersections.  Stage outputs are written as
// soon as the stage completes, so a later failure leaves them intact.
inline PipelineReport run_pipeline(const RunConfig& cfg, bool emit = true,
                                   const std::string& stop_after = "") {
    namespace fs = std::filesystem;
    PipelineReport rep;
    rep.config_echo = cfg.echo();
    if (emit) fs::create_directories(cfg.out_dir);
    auto out = [&](const std::string& f) { return (fs::path(cfg.out_dir) / f).string(); };
    auto stop = [&](const std::string& name) { return !stop_after.empty() && stop_after == name; };

    // --- build ---
    const MapModel model = cfg.build();
    rep.stage_done("build", "model constructed, transversality certificate det = " +
                                fmt17(model.gspec.transversality_det()));
    if (stop("build")) return rep;

    // --- fixed point ---
    const PhasePoint fp = find_fixed_point(model.local, PhasePoint(0.01, -0.02, 0.01, 0.0));
    if (fp.norm() > 1e-10)
        throw NewtonDivergence("pipeline: fixed point drifted away from the model origin");
    rep.spectrum = classify_spectrum(model.local.jacobian_unchecked(model.fixed_point()));
    rep.stage_done("fixed_point", "mu = " + fmt17(rep.spectrum.mu) +
                                      ", alpha = " + fmt17(rep.spectrum.alpha));
    if (stop("fixed_point")) return rep;

    // --- homoclinic orbit ---
    rep.orbit = assemble_homoclinic_orbit(model, cfg.n_max);
    rep.orbit.settle_index = choose_settle_index(rep.orbit, model.fixed_point(), 0.9 * model.params.h);
    if (emit) emit_orbit_csv(rep.orbit, out("orbit.csv"));
    rep.stage_done("homoclinic", "orbit assembled, n_max = " + std::to_string(cfg.n_max));
    if (stop("homoclinic")) return rep;

    // --- scattering ---
    LinearizationSequence seq = linearize_along_orbit(model, rep.orbit, cfg.N, cfg.tol_symp);
    seq = derotate(seq);
    rep.transversality = check_transversality(seq, cfg.N, cfg.tol_trans);
    rep.scattering = build_scattering_map(seq, cfg.T, cfg.tol_trans);
    rep.stage_done("scattering", "det A residual = " + fmt17(rep.scattering.det_residual));
    if (stop("scattering")) return rep;

    // --- genericity ---
    rep.genericity = check_genericity(rep.scattering);
    if (emit) emit_scattering_txt(rep.scattering, rep.genericity, rep.transversality, out("scattering.txt"));
    rep.stage_done("genericity", rep.genericity.generic() ? "generic" : "not generic");
    if (stop("genericity")) return rep;

    // --- KAM scan ---
    const CenterMap cm = restrict_to_center(model);
    KamCriteria crit;
    crit.tol_kam = cfg.tol_kam;
    std::vector<KamCurve> kam = detect_kam_curves(cm, cfg.I_grid.values(), cfg.epsilon, crit);
    if (emit) emit_kam_csv(kam, out("kam.csv"));
    int n_quasi = 0;
    for (const auto& k : kam)
        if (k.verdict == KamVerdict::quasiperiodic) ++n_quasi;
    rep.stage_done("kam_scan", std::to_string(n_quasi) + "/" + std::to_string(kam.size()) +
                                   " quasiperiodic");
    if (stop("kam_scan")) return rep;

    // --- Sigma traces + intersections (parallel over curves) ---
    const SigmaDisk sigma = build_sigma_disk(model, cfg.chart_radius);
    rep.curves.assign(kam.size(), CurveResult{});
    TraceOptions topt;
    topt.n_vertices = cfg.n_vertices;
    topt.fiber_depth = cfg.fiber_depth;
    IntersectionOptions iopt;
    iopt.tol_angle = cfg.tol_angle;
    iopt.tol_match = cfg.tol_match;
    detail::parallel_for(static_cast<int>(kam.size()), cfg.threads, [&](int i) {
        CurveResult& cr = rep.curves[static_cast<size_t>(i)];
        cr.curve = kam[static_cast<size_t>(i)];
        if (cr.curve.verdict != KamVerdict::quasiperiodic) return;
        try {
            const TraceCurve wu = trace_manifold_on_sigma(model, sigma, cr.curve, ManifoldSide::unstable, topt);
            const TraceCurve ws = trace_manifold_on_sigma(model, sigma, cr.curve, ManifoldSide::stable, topt);
            cr.area_u = enclosed_action(pull_back_to_minus(wu, sigma));
            cr.area_s = enclosed_action(pull_back_to_minus(ws, sigma));
            cr.rel_action_gap = std::abs(cr.area_s - cr.area_u) / std::max(cr.area_s, 1e-300);
            cr.intersections = count_transverse_intersections(ws, wu, sigma, &rep.scattering, iopt);
            cr.traced = true;
            if (emit) emit_trace_csv(ws, wu, out(trace_file_name(cr.curve.I)));
        } catch (const Error& e) {
            cr.error = e.what();
        }
    });
    rep.stage_done("traces", "traced " + std::to_string(std::count_if(
                                  rep.curves.begin(), rep.curves.end(),
                                  [](const CurveResult& c) { return c.traced; })) +
                                 " curves");
    if (emit) emit_intersections_csv(rep.curves, out("intersections.csv"));

    // --- summary ---
    bool pass = true;
    for (const auto& c : rep.curves) {
        if (!c.traced) continue;
        if (rep.genericity.generic()) {
            if (c.intersections.count != 4 || !c.intersections.prediction_matched) pass = false;
        } else {
            if (!c.intersections.degenerate_overlap) pass = false;
        }
    }
    rep.all_pass = pass;
    if (emit) {
        std::ostringstream os;
        os << "# effective configuration\n" << rep.config_echo << "\n# stages\n";
        for (const auto& s : rep.stages) os << s.name << ": " << (s.ok ? "ok" : "FAIL") << " (" << s.message << ")\n";
        os << "\n# verdict\n";
        os << "genericity = "
           << (rep.genericity.generic() ? "generic" : (rep.genericity.classification == GenericityClass::degenerate_rotation ? "degenerate-rotation" : "near-degenerate"))
           << "\n";
        for (const auto& c : rep.curves) {
            if (!c.traced) continue;
            os << "I = " << fmt17(c.curve.I) << ": intersections = " << c.intersections.count
               << (c.intersections.degenerate_overlap ? " (degenerate overlap)" : "")
               << ", action gap = " << fmt17(c.rel_action_gap) << "\n";
        }
        os << "theorem_1 = " << (rep.all_pass ? "PASS" : "FAIL") << "\n";
        detail::write_file(out("summary.txt"), os.str());
    }
    rep.stage_done("summary", rep.all_pass ? "PASS" : "FAIL");
    return rep;
}

}  // namespace homscat
