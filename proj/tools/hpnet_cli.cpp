// Command-line front end: characteristic initial value solves, net tracing,
// quantitative audits, the self-similar boundary construction, and dimension
// estimation.  See README.md for config formats.

#include <filesystem>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "hpnet/fractal.hpp"
#include "hpnet/json_io.hpp"
#include "hpnet/oracles.hpp"
#include "hpnet/singular_construction.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace hpnet;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_keys(const ordered_json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (k == a) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

ordered_json load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        size_t line = 1;
        for (size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("parse error at line " + std::to_string(line) + ": " + e.what());
    }
}

Curve curve_from_config(const ordered_json& j) {
    if (j.is_string()) return curve_from_json(ordered_json::parse(read_text_file(j.get<std::string>())));
    std::string type = j.at("type").get<std::string>();
    double len = j.at("length").get<double>();
    int n = j.value("samples", 0);
    double ds = n > 1 ? len / (n - 1) : default_ds(len);
    if (type == "segment" || type == "arc") {
        check_keys(j, {"type", "start", "angle", "kappa", "length", "samples"}, "curve");
        cplx z0{j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
        return arc_piece(z0, j.at("angle").get<double>(), j.value("kappa", 0.0), len, ds);
    }
    if (type == "spiral") {
        check_keys(j, {"type", "a", "r0", "psi0", "k", "length", "samples"}, "curve");
        SpiralField f(SpiralParams::from_asymmetry(j.at("a").get<double>()));
        return f.characteristic(j.at("r0").get<double>(), j.value("psi0", 0.0),
                                j.at("k").get<int>(), len, ds);
    }
    throw ConfigError("curve: unknown type '" + type + "'");
}

std::shared_ptr<SolutionField> field_from_config(const ordered_json& j,
                                                 std::shared_ptr<NormalSystem>& sys_out) {
    std::string type = j.at("type").get<std::string>();
    if (type == "spiral") {
        check_keys(j, {"type", "a", "alpha"}, "field");
        SpiralParams p = j.contains("alpha") ? SpiralParams::from_alpha(j.at("alpha").get<double>())
                                             : SpiralParams::from_asymmetry(j.at("a").get<double>());
        return std::make_shared<SpiralField>(p);
    }
    if (type == "constant") {
        check_keys(j, {"type", "theta", "r1", "r2"}, "field");
        return std::make_shared<ConstantField>(
            j.at("theta").get<double>(), InvariantPair{j.value("r1", 0.0), j.value("r2", 0.0)});
    }
    if (type == "grid") {
        check_keys(j, {"type", "system", "path"}, "field");
        sys_out = std::make_shared<NormalSystem>(system_from_json(j.at("system")));
        auto gj = ordered_json::parse(read_text_file(j.at("path").get<std::string>()));
        CharGrid g;
        g.t1 = gj.at("t1").get<std::vector<double>>();
        g.t2 = gj.at("t2").get<std::vector<double>>();
        g.r1_of_t2 = gj.at("R1_of_t2").get<std::vector<double>>();
        g.r2_of_t1 = gj.at("R2_of_t1").get<std::vector<double>>();
        int n1 = static_cast<int>(g.t1.size()), n2 = static_cast<int>(g.t2.size());
        g.zeta.resize(size_t(n1) * n2);
        g.status.resize(size_t(n1) * n2);
        g.thetabar.assign(size_t(n1) * n2, 0.0);
        for (int i = 0; i < n1; ++i)
            for (int jj = 0; jj < n2; ++jj) {
                g.zeta[i * n2 + jj] = {gj.at("x").at(i).at(jj).get<double>(),
                                       gj.at("y").at(i).at(jj).get<double>()};
                g.status[i * n2 + jj] =
                    static_cast<NodeStatus>(gj.at("status").at(i).at(jj).get<int>());
                g.thetabar[i * n2 + jj] = sys_out->theta({g.r1_of_t2[jj], g.r2_of_t1[i]});
            }
        return std::make_shared<GridField>(*sys_out, std::move(g));
    }
    throw ConfigError("field: unknown type '" + type + "'");
}

Domain domain_from_config(const ordered_json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "disk")
        return Domain::disk({j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()},
                            j.at("radius").get<double>());
    if (type == "annulus")
        return Domain::annulus({j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()},
                               j.at("inner").get<double>(), j.at("outer").get<double>());
    if (type == "rect")
        return Domain::rect(j.at("x0").get<double>(), j.at("x1").get<double>(),
                            j.at("y0").get<double>(), j.at("y1").get<double>());
    if (type == "half_plane") return Domain::upper_half_plane(j.value("diameter", 10.0));
    throw ConfigError("domain: unknown type '" + type + "'");
}

void write_json(const fs::path& path, const ordered_json& j) {
    write_text_file(path.string(), j.dump(1) + "\n");
}

int cmd_solve_goursat(const ordered_json& cfg, const fs::path& out) {
    check_keys(cfg, {"system", "curve1", "curve2", "corner", "window"}, "solve-goursat");
    NormalSystem sys = system_from_json(cfg.at("system"));
    Curve c1 = curve_from_config(cfg.at("curve1"));
    Curve c2 = curve_from_config(cfg.at("curve2"));
    InvariantPair corner;
    if (cfg.at("corner").is_string() && cfg.at("corner") == "auto") {
        Interval window{-10.0, 10.0};
        if (cfg.contains("window")) {
            window.a = cfg.at("window").at(0).get<double>();
            window.b = cfg.at("window").at(1).get<double>();
        }
        auto roots = sys.admissible_corner_values(0.0, c1.phi.front(), window);
        if (roots.empty()) throw ConfigError("solve-goursat: no admissible corner value in window");
        corner = {0.0, roots.front()};
    } else {
        corner = {cfg.at("corner").at(0).get<double>(), cfg.at("corner").at(1).get<double>()};
    }
    CharGrid g = solve_goursat(sys, c1, c2, corner);
    write_json(out / "grid.json", grid_to_json(g));
    write_text_file((out / "grid.csv").string(), grid_to_csv(g));
    write_text_file((out / "grid.svg").string(), grid_to_svg(g));
    std::cout << "grid " << g.n1() << "x" << g.n2() << ", folds " << g.folds << ", min jacobian "
              << fmt12(grid_min_jacobian(g)) << "\n";
    return g.folds > 0 ? 3 : 0;
}

int cmd_trace_net(const ordered_json& cfg, const fs::path& out) {
    check_keys(cfg, {"field", "domain", "seeds", "families", "step"}, "trace-net");
    std::shared_ptr<NormalSystem> sys;
    auto field = field_from_config(cfg.at("field"), sys);
    Domain dom = domain_from_config(cfg.at("domain"));
    TraceOptions topt;
    topt.step = cfg.value("step", 1e-3);
    std::vector<int> families = cfg.contains("families")
                                    ? cfg.at("families").get<std::vector<int>>()
                                    : std::vector<int>{1, 2};
    std::vector<TaggedCurve> net;
    ordered_json curves = ordered_json::array();
    for (const auto& seed : cfg.at("seeds")) {
        cplx z0{seed.at(0).get<double>(), seed.at(1).get<double>()};
        for (int k : families)
            for (int direction : {+1, -1}) {
                auto res = trace(*field, z0, k, direction, dom, topt);
                ordered_json entry;
                entry["k"] = k;
                entry["direction"] = direction;
                entry["end"] = static_cast<int>(res.end);
                entry["curve"] = curve_to_json(res.curve);
                curves.push_back(entry);
                net.push_back({res.curve, k});
            }
    }
    ordered_json j;
    j["curves"] = curves;
    write_json(out / "net.json", j);
    write_text_file((out / "net.svg").string(), net_to_svg(net));
    std::cout << "traced " << net.size() << " arcs\n";
    return 0;
}

int cmd_audit(const ordered_json& cfg, const fs::path& out, unsigned seed) {
    check_keys(cfg, {"field", "domain", "K", "quads", "quad_l", "quad_eps", "blowup_points",
                     "blowup_h", "net_seeds", "step"},
               "audit");
    std::shared_ptr<NormalSystem> sys;
    auto field = field_from_config(cfg.at("field"), sys);
    Domain dom = domain_from_config(cfg.at("domain"));
    double K = cfg.at("K").get<double>();
    double step = cfg.value("step", 1e-3);
    std::mt19937 rng(seed);

    ordered_json rep;
    bool all_pass = true;

    {  // characteristic quadrilateral turning-ratio sweep
        int want = cfg.value("quads", 60);
        double l = cfg.value("quad_l", 0.05), eps = cfg.value("quad_eps", 0.05);
        int got = 0, violations = 0, both_zero = 0, closure_fails = 0;
        double worst_hi = 0.0, worst_lo = 1e300;
        std::uniform_real_distribution<double> U(-0.5, 0.5);
        for (int tries = 0; tries < 60 * want && got < want; ++tries) {
            cplx z = dom.center() + cplx{dom.diameter() * U(rng), dom.diameter() * U(rng)};
            if (!dom.contains(z) || !field->sample(z)) continue;
            try {
                CharQuad q = extract_quad(*field, z, 1 + (tries % 2), l, eps, dom, step);
                auto r = quasi_hp_ratio(q);
                ++got;
                if (r.kind == RatioReport::Kind::BothZero) {
                    ++both_zero;
                    continue;
                }
                bool bad = r.kind == RatioReport::Kind::OneZero || !r.signs_agree ||
                           r.ratio > K + 0.05 || r.ratio < 1.0 / K - 0.05;
                if (bad) ++violations;
                worst_hi = std::max(worst_hi, r.ratio);
                worst_lo = std::min(worst_lo, r.ratio);
            } catch (const std::runtime_error& e) {
                // a fourth side that cannot close is itself an inconsistency witness
                if (std::string(e.what()).find("fourth side") != std::string::npos) ++closure_fails;
            }
        }
        bool quad_pass = violations == 0 && closure_fails <= got;
        ordered_json q;
        q["quads"] = got;
        q["violations"] = violations;
        q["closure_failures"] = closure_fails;
        q["both_zero"] = both_zero;
        q["worst_ratio_high"] = num(worst_hi);
        q["worst_ratio_low"] = num(worst_lo == 1e300 ? 0.0 : worst_lo);
        q["vacuous"] = got == both_zero;
        q["pass"] = quad_pass;
        rep["quad_ratio"] = q;
        all_pass = all_pass && quad_pass;
    }

    {  // curvature blow-up identity residuals
        int want = cfg.value("blowup_points", 40);
        double h = cfg.value("blowup_h", 1e-2);
        int got = 0, fails = 0;
        double worst = 0.0;
        std::uniform_real_distribution<double> U(-0.5, 0.5);
        for (int tries = 0; tries < 60 * want && got < want; ++tries) {
            cplx z = dom.center() + cplx{dom.diameter() * U(rng), dom.diameter() * U(rng)};
            if (!dom.contains(z)) continue;
            try {
                auto [a1, a2] = blowup_residual(*field, z, h);
                auto [b1, b2] = blowup_residual(*field, z, h / 2);
                ++got;
                bool ok = std::fabs(b1) <= std::fabs(a1) / 1.8 + 1e-11 &&
                          std::fabs(b2) <= std::fabs(a2) / 1.8 + 1e-11;
                if (!ok) ++fails;
                worst = std::max({worst, std::fabs(b1), std::fabs(b2)});
            } catch (const std::domain_error&) {
            }
        }
        ordered_json b;
        b["points"] = got;
        b["failures"] = fails;
        b["worst_residual_at_h_half"] = num(worst);
        b["pass"] = fails == 0;
        rep["blowup_identities"] = b;
        all_pass = all_pass && fails == 0;
    }

    {  // length/diameter bounds on a traced net
        std::vector<TaggedCurve> net;
        if (cfg.contains("net_seeds")) {
            TraceOptions topt;
            topt.step = step;
            for (const auto& seed_pt : cfg.at("net_seeds")) {
                cplx z0{seed_pt.at(0).get<double>(), seed_pt.at(1).get<double>()};
                for (int k : {1, 2}) {
                    auto res = trace(*field, z0, k, +1, dom, topt);
                    if (res.curve.size() > 8) net.push_back({res.curve, k});
                }
            }
        }
        BoundAuditOptions bopt;
        bopt.seed = seed;
        auto b = bound_audit(net, K, *field, dom, bopt);
        ordered_json bj = audit_to_json(b);
        bj["vacuous"] = b.product_checked == 0 && b.diam_checked == 0;
        bj["pass"] = b.product_failed == 0 && b.diam_failed == 0;
        rep["length_and_diameter_bounds"] = bj;
        all_pass = all_pass && b.product_failed == 0 && b.diam_failed == 0;
    }

    rep["all_pass"] = all_pass;
    write_json(out / "report.json", rep);
    std::cout << (all_pass ? "audit passed\n" : "audit FAILED\n");
    return all_pass ? 0 : 1;
}

int cmd_construct_singular(const ordered_json& cfg, const fs::path& out) {
    check_keys(cfg, {"system", "epsilon", "depth"}, "construct-singular");
    NormalSystem sys = system_from_json(cfg.at("system"));
    double eps = cfg.value("epsilon", 0.02);
    int depth = cfg.value("depth", 3);
    if (!(eps > 0 && eps <= 0.05)) throw ConfigError("construct-singular: epsilon must be in (0, 0.05]");
    if (depth < 1 || depth > 5) throw ConfigError("construct-singular: depth must be in [1, 5]");

    SingularSolution sol = build_singular_solution(sys, eps, depth);
    write_json(out / "tree.json", tree_to_json(sol.tree));

    fs::create_directories(out / "patches");
    ordered_json manifest;
    manifest["patch_count"] = sol.field->size();
    ordered_json tents = ordered_json::array();
    for (const auto& t : sol.tents) {
        ordered_json e;
        e["level"] = t.level;
        e["scale"] = num(t.scale);
        e["shift"] = num(t.shift);
        e["rho"] = ordered_json::array({num(t.rho.r1), num(t.rho.r2)});
        tents.push_back(e);
    }
    manifest["tents"] = tents;
    ordered_json grid_files = ordered_json::array();
    for (size_t i = 0; i < sol.patch_grids.size(); ++i) {
        std::string name = "patch_" + std::to_string(i) + ".json";
        write_json(out / "patches" / name, grid_to_json(sol.patch_grids[i]));
        grid_files.push_back(name);
    }
    manifest["grid_files"] = grid_files;
    manifest["seam_worst"] = num(sol.seam_worst);
    write_json(out / "patches" / "manifest.json", manifest);

    double e = sol.geom.epsilon;
    struct Line {
        const char* name;
        double got, want, tol;
    } lines[] = {
        {"arm shift, side 1", sol.geom.ua1.angle_shift, -(5 * PI / 4 + e), 1e-6},
        {"arm shift, side 2", sol.geom.ua2.angle_shift, PI / 4 - e, 1e-6},
        {"child shift, left", sol.geom.child_left.shift_total, PI / 4 + e, 1e-6},
        {"child shift, right", sol.geom.child_right.shift_total, 3 * PI / 4 + e, 1e-6},
        {"composed shift, left (mod 2pi)", wrap_pi(legs_total(sol.geom.composed_left) + PI), 0.0,
         2e-6},
        {"composed shift, right (mod 2pi)", wrap_pi(legs_total(sol.geom.composed_right) + PI), 0.0,
         2e-6},
        {"gamma^tau", std::pow(sol.tree.gamma, sol.tree.tau), 0.5, 1e-12},
        {"seam jump", sol.seam_worst, 0.0, 1e-6},
    };
    std::string summary;
    bool ok = true;
    for (const auto& ln : lines) {
        bool pass = std::fabs(ln.got - ln.want) <= ln.tol;
        ok = ok && pass;
        summary += std::string(pass ? "pass  " : "FAIL  ") + ln.name + ": " + fmt12(ln.got) +
                   " (target " + fmt12(ln.want) + ")\n";
    }
    summary += "gamma " + fmt12(sol.tree.gamma) + ", tau " + fmt12(sol.tree.tau) + ", delta2 " +
               fmt12(sol.tree.delta2) + ", r1 " + fmt12(sol.tree.r1) + "\n";
    summary += "levels:";
    for (const auto& lvl : sol.tree.levels) summary += " " + std::to_string(lvl.size());
    summary += "\n";
    write_text_file((out / "summary.txt").string(), summary);
    std::cout << summary;
    return ok ? 0 : 1;
}

int cmd_dim(const ordered_json& cfg, const fs::path& out, unsigned seed) {
    check_keys(cfg, {"tree", "intervals_csv", "scales", "covers"}, "dim");
    std::vector<Interval> intervals;
    NestedIntervalTree tree;
    bool have_tree = false;
    if (cfg.contains("tree")) {
        tree = tree_from_json(ordered_json::parse(read_text_file(cfg.at("tree").get<std::string>())));
        intervals = tree.levels.back();
        have_tree = true;
    } else if (cfg.contains("intervals_csv")) {
        std::string text = read_text_file(cfg.at("intervals_csv").get<std::string>());
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            double a, b;
            if (std::sscanf(line.c_str(), "%lf,%lf", &a, &b) == 2) intervals.push_back({a, b});
        }
        if (intervals.empty()) throw ConfigError("dim: no intervals parsed from csv");
    } else {
        throw ConfigError("dim: need 'tree' or 'intervals_csv'");
    }

    double lo = 1e300, hi = -1e300, len_min = 1e300;
    for (const auto& I : intervals) {
        lo = std::min(lo, I.a);
        hi = std::max(hi, I.b);
        len_min = std::min(len_min, I.length());
    }
    double extent = hi - lo;
    std::vector<double> scales;
    if (cfg.contains("scales")) {
        scales = cfg.at("scales").get<std::vector<double>>();
    } else {
        double r = 0.4 * extent;
        double floor_r = 0.05 * std::max(len_min, 1e-14 * extent);
        while (r > floor_r && scales.size() < 48) {
            scales.push_back(r);
            r *= 0.5;
        }
        while (scales.size() < 8) scales.push_back(scales.empty() ? 0.4 * extent : scales.back() * 0.5);
    }
    auto est = box_dimension_intervals(intervals, scales, seed);
    ordered_json j = estimate_to_json(est);
    if (have_tree) {
        j["gamma"] = num(tree.gamma);
        j["cantor_tau_of_gamma"] = num(cantor_tau(tree.gamma));
        int ncov = cfg.value("covers", 0);
        if (ncov > 0) {
            std::mt19937 rng(seed);
            std::vector<std::vector<CoverPiece>> covers;
            for (int c = 0; c < ncov; ++c) {
                std::vector<CoverPiece> cover;
                std::function<void(int, int)> descend = [&](int level, int index) {
                    bool leaf = level + 1 >= static_cast<int>(tree.levels.size()) ||
                                std::uniform_real_distribution<double>(0, 1)(rng) < 0.4;
                    if (leaf)
                        cover.push_back({level, index});
                    else {
                        descend(level + 1, 2 * index);
                        descend(level + 1, 2 * index + 1);
                    }
                };
                descend(0, 0);
                covers.push_back(std::move(cover));
            }
            j["cover_sum_min"] = num(min_cover_sum(tree, covers));
        }
    }
    write_json(out / "estimate.json", j);
    std::cout << "slope " << fmt12(est.slope) << ", r^2 " << fmt12(est.r_squared) << "\n";
    return 0;
}

int cmd_oracle_eval(const ordered_json& cfg, const fs::path& out) {
    check_keys(cfg, {"oracle", "points"}, "oracle-eval");
    const auto& oj = cfg.at("oracle");
    std::string type = oj.at("type").get<std::string>();
    ordered_json j;
    if (type == "gm") {
        auto [m1, m2] = gm_stretch_factors(oj.at("psi0").get<double>(), oj.at("log_rho").get<double>());
        j["m1"] = num(m1);
        j["m2"] = num(m2);
    } else if (type == "spiral") {
        SpiralField f(oj.contains("alpha") ? SpiralParams::from_alpha(oj.at("alpha").get<double>())
                                           : SpiralParams::from_asymmetry(oj.at("a").get<double>()));
        ordered_json vals = ordered_json::array();
        for (const auto& p : cfg.at("points")) {
            cplx z{p.at(0).get<double>(), p.at(1).get<double>()};
            ordered_json e;
            e["z"] = ordered_json::array({num(z.real()), num(z.imag())});
            e["theta"] = num(f.theta(z));
            auto r = f.invariants(z);
            e["R"] = ordered_json::array({num(r.r1), num(r.r2)});
            vals.push_back(e);
        }
        j["values"] = vals;
        j["m1"] = num(f.params().m1);
        j["m2"] = num(f.params().m2);
    } else {
        throw ConfigError("oracle-eval: unknown oracle '" + type + "'");
    }
    write_json(out / "values.json", j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"method-of-characteristics toolkit for planar hyperbolic systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = ".";
    unsigned seed = 1;
    int threads = 0;
    app.add_option("--config", config_path, "config JSON path")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "seed for randomized sweeps");
    app.add_option("--threads", threads, "OpenMP thread count (0 = default)");

    auto* solve = app.add_subcommand("solve-goursat", "characteristic initial value solve");
    auto* tracecmd = app.add_subcommand("trace-net", "trace characteristics through a field");
    auto* audit = app.add_subcommand("audit", "quantitative property audit of a field");
    auto* construct = app.add_subcommand("construct-singular", "self-similar boundary construction");
    auto* dim = app.add_subcommand("dim", "box-counting dimension estimation");
    auto* oracle = app.add_subcommand("oracle-eval", "evaluate closed-form reference solutions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        fs::create_directories(out_dir);
        ordered_json cfg = load_config(config_path);
        if (solve->parsed()) return cmd_solve_goursat(cfg, out_dir);
        if (tracecmd->parsed()) return cmd_trace_net(cfg, out_dir);
        if (audit->parsed()) return cmd_audit(cfg, out_dir, seed);
        if (construct->parsed()) return cmd_construct_singular(cfg, out_dir);
        if (dim->parsed()) return cmd_dim(cfg, out_dir, seed);
        if (oracle->parsed()) return cmd_oracle_eval(cfg, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
