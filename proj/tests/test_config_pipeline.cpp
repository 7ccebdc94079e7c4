#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace homscat;
namespace fs = std::filesystem;

namespace {
std::string write_tmp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

const char* kDemoCfg =
    "# demo configuration\n"
    "model.mu = 0.5\n"
    "model.alpha = 1.0\n"
    "model.nu = 0.1\n"
    "model.eps_pert = 1e-3\n"
    "model.B = 1.5 0 0 0.6666666666666666\n"
    "analysis.I_grid = 0.25:1.0:4\n"
    "analysis.n_vertices = 256\n"
    "seed = 42\n";
}  // namespace

TEST_CASE("config: demo loads with defaults filled", "[config_pipeline]") {
    const RunConfig cfg = parse_config(write_tmp("homscat_demo.cfg", kDemoCfg));
    CHECK(cfg.mu == 0.5);
    CHECK(cfg.eps_pert == 1e-3);
    CHECK(cfg.I_grid.count == 4);
    CHECK(symplecticity_residual(cfg.global_matrix()) <= cfg.tol_symp);
    CHECK(cfg.echo().find("model.mu = 0.5") != std::string::npos);
}

TEST_CASE("config: missing nu is a validation error", "[config_pipeline]") {
    const std::string path = write_tmp("homscat_nonu.cfg", "model.mu = 0.5\n");
    CHECK_THROWS_WITH(parse_config(path), Catch::Matchers::ContainsSubstring("twist coefficient required"));
}

TEST_CASE("config: malformed number reports line and column", "[config_pipeline]") {
    const std::string path =
        write_tmp("homscat_bad.cfg", "model.nu = 0.1\nmodel.mu = zork\n");
    try {
        parse_config(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("config: unknown key rejected", "[config_pipeline]") {
    const std::string path = write_tmp("homscat_unk.cfg", "model.nu = 0.1\nmodle.mu = 0.5\n");
    CHECK_THROWS_AS(parse_config(path), ParseError);
}

TEST_CASE("pipeline: strong resonance halts with the stage tagged", "[config_pipeline]") {
    RunConfig cfg = parse_config(write_tmp("homscat_demo2.cfg", kDemoCfg));
    cfg.alpha = 2 * kPi / 3;
    cfg.out_dir = (fs::temp_directory_path() / "homscat_sr_out").string();
    CHECK_THROWS_AS(run_pipeline(cfg, false), StrongResonance);
}

TEST_CASE("pipeline: demo run gives generic classification with 4 crossings", "[config_pipeline]") {
    RunConfig cfg = parse_config(write_tmp("homscat_demo3.cfg", kDemoCfg));
    cfg.out_dir = (fs::temp_directory_path() / "homscat_demo_out").string();
    fs::remove_all(cfg.out_dir);
    const PipelineReport rep = run_pipeline(cfg);
    CHECK(rep.genericity.generic());
    int traced = 0;
    for (const auto& c : rep.curves) {
        if (!c.traced) continue;
        ++traced;
        CHECK(c.intersections.count == 4);
        CHECK(c.rel_action_gap <= 1e-4);
    }
    CHECK(traced >= 3);
    CHECK(rep.all_pass);
    for (const char* f : {"orbit.csv", "scattering.txt", "kam.csv", "intersections.csv", "summary.txt"})
        CHECK(fs::exists(fs::path(cfg.out_dir) / f));
    // intersections.csv reports count = 4 on every row
    std::ifstream in(fs::path(cfg.out_dir) / "intersections.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto c1 = line.find(',');
        CHECK(line.substr(c1 + 1, line.find(',', c1 + 1) - c1 - 1) == "4");
    }
    CHECK(rows == traced);
}

TEST_CASE("pipeline: degenerate rotation block yields coinciding traces", "[config_pipeline]") {
    RunConfig cfg = parse_config(write_tmp("homscat_demo4.cfg", kDemoCfg));
    cfg.B = Mat2::Identity();
    cfg.out_dir = (fs::temp_directory_path() / "homscat_degen_out").string();
    const PipelineReport rep = run_pipeline(cfg);
    CHECK(rep.genericity.classification == GenericityClass::degenerate_rotation);
    for (const auto& c : rep.curves) {
        if (!c.traced) continue;
        CHECK(c.intersections.degenerate_overlap);
    }
    CHECK(rep.all_pass);
}

TEST_CASE("pipeline: determinism, byte-identical outputs on re-run", "[config_pipeline]") {
    RunConfig cfg = parse_config(write_tmp("homscat_demo5.cfg", kDemoCfg));
    cfg.I_grid.count = 2;
    cfg.n_vertices = 128;
    const fs::path out1 = fs::temp_directory_path() / "homscat_det1";
    const fs::path out2 = fs::temp_directory_path() / "homscat_det2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    cfg.out_dir = out1.string();
    cfg.threads = 2;
    run_pipeline(cfg);
    cfg.out_dir = out2.string();
    run_pipeline(cfg);
    for (const auto& entry : fs::directory_iterator(out1)) {
        const fs::path other = out2 / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
}

TEST_CASE("pipeline: stage isolation leaves earlier outputs intact", "[config_pipeline]") {
    RunConfig cfg = parse_config(write_tmp("homscat_demo6.cfg", kDemoCfg));
    cfg.I_grid.count = 2;
    cfg.n_vertices = 128;
    cfg.out_dir = (fs::temp_directory_path() / "homscat_iso").string();
    fs::remove_all(cfg.out_dir);
    // run only through the homoclinic stage, then force a failure later by
    // re-running with a chart too large for the gluing ball
    run_pipeline(cfg, true, "homoclinic");
    CHECK(fs::exists(fs::path(cfg.out_dir) / "orbit.csv"));
    const std::string orbit_before = slurp(fs::path(cfg.out_dir) / "orbit.csv");
    cfg.chart_radius = 0.35;  // exceeds the gluing ball: traces stage throws
    CHECK_THROWS_AS(run_pipeline(cfg), ChartTooLarge);
    CHECK(slurp(fs::path(cfg.out_dir) / "orbit.csv") == orbit_before);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "kam.csv"));  // earlier stage output intact
}
