#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "homscat/errors.hpp"
#include "homscat/model.hpp"

namespace homscat {

struct IGridSpec {
    double lo = 0.25, hi = 1.0;
    int count = 8;
    std::vector<double> values() const {
        std::vector<double> v;
        if (count == 1) {
            v.push_back(lo);
            return v;
        }
        for (int i = 0; i < count; ++i) v.push_back(lo + (hi - lo) * i / (count - 1));
        return v;
    }
};

struct RunConfig {
    // model
    double mu = 0.5, alpha = 1.0, a = 0.0, b = 0.0, nu = 0.1;
    std::optional<double> kappa;  // defaults to -2b
    double eps_pert = 1e-3;
    double h = 1.0, x0 = 0.5, y1 = 0.5, gluing_radius = 0.2;
    std::optional<Mat4> M;  // explicit global matrix; otherwise built from sigma/shear/B
    double sigma = 1.0, shear = 0.25;
    Mat2 B = (Mat2() << 1.5, 0.0, 0.0, 1.0 / 1.5).finished();
    // analysis
    int N = 6, T = 0, n_max = 60;
    IGridSpec I_grid;
    double epsilon = 0.1;
    int n_vertices = 1024;
    double chart_radius = 0.15;
    int fiber_depth = 60;
    // tolerances
    double tol_symp = 1e-9, tol_bvp = 1e-10, tol_trans = 1e-9, tol_kam = 1e-8;
    double tol_angle = 1e-3, tol_match = 0.1;
    // io
    std::string out_dir = "out";
    unsigned long long seed = 12345;
    int threads = 0;

    LocalModelParams local_params() const {
        LocalModelParams p = LocalModelParams::make(mu, alpha, a, b, nu, eps_pert, h);
        if (kappa) p.kappa = *kappa;
        return p;
    }
    Mat4 global_matrix() const { return M ? *M : demo_global_matrix(sigma, shear, B); }
    GlobalMapSpec global_spec() const {
        GlobalMapSpec gs;
        gs.q_minus = PhasePoint(0, y1, 0, 0);
        gs.q_plus = PhasePoint(x0, 0, 0, 0);
        gs.M = global_matrix();
        gs.tol_symp = tol_symp;
        gs.tol_trans = tol_trans;
        return gs;
    }
    MapModel build() const { return build_model(local_params(), global_spec(), gluing_radius); }

    void validate() const {
        if (!(tol_symp > 0 && tol_bvp > 0 && tol_trans > 0 && tol_kam > 0 && tol_angle > 0))
            throw ValidationError("config: all tolerances must be > 0");
        if (I_grid.count < 1) throw ValidationError("config: I_grid must be non-empty");
        if (n_vertices < 16) throw ValidationError("config: analysis.n_vertices must be >= 16");
        if (n_max < N + 8) throw ValidationError("config: analysis.n_max must exceed analysis.N + 8");
        const double r = symplecticity_residual(global_matrix());
        if (r > tol_symp)
            throw ValidationError("config: global matrix M fails the symplecticity check on load");
    }

    std::string echo() const;
};

namespace detail {
struct KeyValue {
    std::string value;
    int line = 0, column = 0;
};

inline std::map<std::string, KeyValue> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::map<std::string, KeyValue> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("config: line " + std::to_string(lineno) + ", column 1: empty key");
        if (val.empty())
            throw ParseError("config: line " + std::to_string(lineno) + ", column " +
                             std::to_string(eq + 2) + ": empty value for '" + key + "'");
        kv[key] = KeyValue{val, lineno, static_cast<int>(eq + 2)};
    }
    return kv;
}

inline double parse_double(const KeyValue& kv, const std::string& key) {
    const char* s = kv.value.c_str();
    char* end = nullptr;
    const double x = std::strtod(s, &end);
    while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == s || (end && *end))
        throw ParseError("config: line " + std::to_string(kv.line) + ", column " +
                         std::to_string(kv.column) + ": malformed number for '" + key + "'");
    return x;
}

inline std::vector<double> parse_doubles(const KeyValue& kv, const std::string& key, size_t count) {
    std::istringstream is(kv.value);
    std::vector<double> v;
    std::string tok;
    while (is >> tok) {
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end)
            throw ParseError("config: line " + std::to_string(kv.line) + ": malformed number '" + tok +
                             "' in '" + key + "'");
        v.push_back(x);
    }
    if (v.size() != count)
        throw ParseError("config: line " + std::to_string(kv.line) + ": '" + key + "' needs " +
                         std::to_string(count) + " numbers, got " + std::to_string(v.size()));
    return v;
}
}  // namespace detail

inline RunConfig parse_config(const std::string& path) {
    auto kv = detail::parse_kv_file(path);
    RunConfig c;
    bool have_nu = false;
    auto take = [&](const std::string& key, auto&& fn) {
        auto it = kv.find(key);
        if (it != kv.end()) {
            fn(it->second);
            kv.erase(it);
        }
    };
    take("model.mu", [&](auto& v) { c.mu = detail::parse_double(v, "model.mu"); });
    take("model.alpha", [&](auto& v) { c.alpha = detail::parse_double(v, "model.alpha"); });
    take("model.a", [&](auto& v) { c.a = detail::parse_double(v, "model.a"); });
    take("model.b", [&](auto& v) { c.b = detail::parse_double(v, "model.b"); });
    take("model.nu", [&](auto& v) {
        c.nu = detail::parse_double(v, "model.nu");
        have_nu = true;
    });
    take("model.kappa", [&](auto& v) { c.kappa = detail::parse_double(v, "model.kappa"); });
    take("model.eps_pert", [&](auto& v) { c.eps_pert = detail::parse_double(v, "model.eps_pert"); });
    take("model.h", [&](auto& v) { c.h = detail::parse_double(v, "model.h"); });
    take("model.x0", [&](auto& v) { c.x0 = detail::parse_double(v, "model.x0"); });
    take("model.y1", [&](auto& v) { c.y1 = detail::parse_double(v, "model.y1"); });
    take("model.gluing_radius",
         [&](auto& v) { c.gluing_radius = detail::parse_double(v, "model.gluing_radius"); });
    take("model.sigma", [&](auto& v) { c.sigma = detail::parse_double(v, "model.sigma"); });
    take("model.shear", [&](auto& v) { c.shear = detail::parse_double(v, "model.shear"); });
    take("model.B", [&](auto& v) {
        const auto x = detail::parse_doubles(v, "model.B", 4);
        c.B << x[0], x[1], x[2], x[3];
    });
    take("model.M", [&](auto& v) {
        const auto x = detail::parse_doubles(v, "model.M", 16);
        Mat4 M;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) M(i, j) = x[4 * i + j];
        c.M = M;
    });
    take("analysis.N", [&](auto& v) { c.N = static_cast<int>(detail::parse_double(v, "analysis.N")); });
    take("analysis.T", [&](auto& v) { c.T = static_cast<int>(detail::parse_double(v, "analysis.T")); });
    take("analysis.n_max",
         [&](auto& v) { c.n_max = static_cast<int>(detail::parse_double(v, "analysis.n_max")); });
    take("analysis.epsilon", [&](auto& v) { c.epsilon = detail::parse_double(v, "analysis.epsilon"); });
    take("analysis.n_vertices", [&](auto& v) {
        c.n_vertices = static_cast<int>(detail::parse_double(v, "analysis.n_vertices"));
    });
    take("analysis.chart_radius",
         [&](auto& v) { c.chart_radius = detail::parse_double(v, "analysis.chart_radius"); });
    take("analysis.fiber_depth", [&](auto& v) {
        c.fiber_depth = static_cast<int>(detail::parse_double(v, "analysis.fiber_depth"));
    });
    take("analysis.I_grid", [&](auto& v) {
        // lo:hi:count
        const std::string s = v.value;
        const size_t c1 = s.find(':'), c2 = s.rfind(':');
        if (c1 == std::string::npos || c2 == c1)
            throw ParseError("config: line " + std::to_string(v.line) +
                             ": I_grid must be lo:hi:count");
        try {
            c.I_grid.lo = std::stod(s.substr(0, c1));
            c.I_grid.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
            c.I_grid.count = std::stoi(s.substr(c2 + 1));
        } catch (const std::exception&) {
            throw ParseError("config: line " + std::to_string(v.line) + ": malformed I_grid spec");
        }
    });
    take("tol.symp", [&](auto& v) { c.tol_symp = detail::parse_double(v, "tol.symp"); });
    take("tol.bvp", [&](auto& v) { c.tol_bvp = detail::parse_double(v, "tol.bvp"); });
    take("tol.trans", [&](auto& v) { c.tol_trans = detail::parse_double(v, "tol.trans"); });
    take("tol.kam", [&](auto& v) { c.tol_kam = detail::parse_double(v, "tol.kam"); });
    take("tol.angle", [&](auto& v) { c.tol_angle = detail::parse_double(v, "tol.angle"); });
    take("tol.match", [&](auto& v) { c.tol_match = detail::parse_double(v, "tol.match"); });
    take("output.dir", [&](auto& v) { c.out_dir = v.value; });
    take("seed", [&](auto& v) { c.seed = static_cast<unsigned long long>(detail::parse_double(v, "seed")); });
    take("threads", [&](auto& v) { c.threads = static_cast<int>(detail::parse_double(v, "threads")); });

    if (!kv.empty())
        throw ParseError("config: line " + std::to_string(kv.begin()->second.line) +
                         ": unknown key '" + kv.begin()->first + "'");
    if (!have_nu) throw ValidationError("config: twist coefficient required (model.nu)");
    c.validate();
    return c;
}

inline std::string RunConfig::echo() const {
    char buf[64];
    auto f = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "model.mu = " << f(mu) << "\n";
    os << "model.alpha = " << f(alpha) << "\n";
    os << "model.a = " << f(a) << "\n";
    os << "model.b = " << f(b) << "\n";
    os << "model.nu = " << f(nu) << "\n";
    os << "model.kappa = " << f(kappa ? *kappa : -2 * b) << "\n";
    os << "model.eps_pert = " << f(eps_pert) << "\n";
    os << "model.h = " << f(h) << "\n";
    os << "model.x0 = " << f(x0) << "\n";
    os << "model.y1 = " << f(y1) << "\n";
    os << "model.gluing_radius = " << f(gluing_radius) << "\n";
    os << "model.M =";
    const Mat4 MM = global_matrix();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) os << " " << f(MM(i, j));
    os << "\n";
    os << "analysis.N = " << N << "\n";
    os << "analysis.T = " << T << "\n";
    os << "analysis.n_max = " << n_max << "\n";
    os << "analysis.I_grid = " << f(I_grid.lo) << ":" << f(I_grid.hi) << ":" << I_grid.count << "\n";
    os << "analysis.epsilon = " << f(epsilon) << "\n";
    os << "analysis.n_vertices = " << n_vertices << "\n";
    os << "analysis.chart_radius = " << f(chart_radius) << "\n";
    os << "analysis.fiber_depth = " << fiber_depth << "\n";
    os << "tol.symp = " << f(tol_symp) << "\n";
    os << "tol.bvp = " << f(tol_bvp) << "\n";
    os << "tol.trans = " << f(tol_trans) << "\n";
    os << "tol.kam = " << f(tol_kam) << "\n";
    os << "tol.angle = " << f(tol_angle) << "\n";
    os << "tol.match = " << f(tol_match) << "\n";
    os << "output.dir = " << out_dir << "\n";
    os << "seed = " << seed << "\n";
    os << "threads = " << threads << "\n";
    return os.str();
}

}  // namespace homscat
