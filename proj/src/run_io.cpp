#include "mfg/run_io.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "mfg/operator_checks.hpp"

namespace mfg {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

TestCase parse_test(const std::string& name) {
    if (name == "test1") return TestCase::test1;
    if (name == "test2") return TestCase::test2;
    if (name == "custom") return TestCase::custom;
    throw ConfigError("unknown test case '" + name + "'");
}

std::string test_name(TestCase t) {
    switch (t) {
        case TestCase::test1: return "test1";
        case TestCase::test2: return "test2";
        default: return "custom";
    }
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps line endings fixed
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

void write_series_csv(const fs::path& path, const char* header,
                      const std::vector<std::array<double, 4>>& rows) {
    auto out = open_output(path);
    out << header << "\n";
    for (const auto& r : rows)
        out << fmt(r[0]) << ',' << fmt(r[1]) << ',' << fmt(r[2]) << ',' << fmt(r[3]) << "\n";
}

void write_field_csv(const fs::path& path, const NodeField& field) {
    auto out = open_output(path);
    out << "k";
    for (int i = 0; i < field.nodes(); ++i) out << ",v" << i;
    out << "\n";
    for (int k = 0; k < field.times(); ++k) {
        out << k;
        for (int i = 0; i < field.nodes(); ++i) out << ',' << fmt(field(i, k));
        out << "\n";
    }
}

void write_errors_csv(const fs::path& path, const std::vector<RunSummary>& rows) {
    auto out = open_output(path);
    out << "rho,h,eps,iterations,err_price,err_u,err_m\n";
    for (const auto& r : rows)
        out << fmt(r.rho) << ',' << fmt(r.h) << ',' << fmt(r.config.eps) << ',' << r.iterations
            << ',' << fmt(r.errors.err_price) << ',' << fmt(r.errors.err_u) << ','
            << fmt(r.errors.err_m) << "\n";
}

json summary_to_json(const RunSummary& s) {
    json j;
    j["schema_version"] = 1;
    j["test"] = test_name(s.config.test);
    j["family"] = s.config.family;
    j["grid"] = {{"a", s.config.a}, {"b", s.config.b}, {"T", s.config.T},
                 {"rho", s.rho},    {"h", s.h},        {"M", s.M},
                 {"N", s.N}};
    j["eps"] = s.config.eps;
    j["max_iterations"] = s.config.max_iterations;
    j["model"] = {{"c", s.config.c},
                  {"eta", s.config.eta},
                  {"tau", s.config.tau},
                  {"a0_bar", s.config.a0_bar},
                  {"a1_bar", s.config.a1_bar}};
    j["supply"] = {{"xi", s.config.xi},
                   {"q0", s.config.q0},
                   {"amplitude", s.config.amplitude},
                   {"frequency", s.config.frequency}};
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    j["final_price_residual"] = s.final_price_residual;
    j["errors"] = {{"price", s.errors.err_price},
                   {"u", s.errors.err_u},
                   {"m", s.errors.err_m},
                   {"absolute_fallback",
                    {s.errors.absolute_price, s.errors.absolute_u, s.errors.absolute_m}}};
    j["seed"] = s.config.seed;
    return j;
}

void write_summary_json(const fs::path& path, const json& j) {
    auto out = open_output(path);
    out << j.dump(2) << "\n";
}

// Solution invariants enforced on every accepted run.
void validate_solution(const DiscreteSolution& sol, const Grid& grid) {
    for (int k = 0; k <= grid.N(); ++k) {
        const auto row = sol.m.slice(k);
        double total = 0.0;
        for (double v : row) {
            if (v < 0.0)
                throw std::runtime_error("solution invariant violated: negative density at k=" +
                                         std::to_string(k));
            total += v;
        }
        if (std::abs(total * grid.rho() - 1.0) > 1e-12)
            throw std::runtime_error("solution invariant violated: mass drift at k=" +
                                     std::to_string(k));
    }
}

}  // namespace

RunConfig default_config(TestCase test) {
    RunConfig cfg;
    cfg.test = test;
    if (test == TestCase::test2) {
        cfg.family = "quartic";
        cfg.eps = 2e-4;
        cfg.eta = 1.0;
        cfg.tau = 0.0;
        cfg.a0_bar = 0.0;
        cfg.a1_bar = 0.0;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    RunConfig cfg = default_config(parse_test(j.value("test", "test1")));
    try {
        if (j.contains("family")) cfg.family = j["family"].get<std::string>();
        if (j.contains("domain")) {
            cfg.a = j["domain"].at(0).get<double>();
            cfg.b = j["domain"].at(1).get<double>();
        }
        cfg.T = j.value("T", cfg.T);
        cfg.rho = j.value("rho", cfg.rho);
        cfg.h = j.value("h", cfg.h);
        cfg.eps = j.value("eps", cfg.eps);
        cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
        if (j.contains("model")) {
            const auto& m = j["model"];
            cfg.c = m.value("c", cfg.c);
            cfg.eta = m.value("eta", cfg.eta);
            cfg.tau = m.value("tau", cfg.tau);
            cfg.a0_bar = m.value("a0_bar", cfg.a0_bar);
            cfg.a1_bar = m.value("a1_bar", cfg.a1_bar);
        }
        if (j.contains("supply")) {
            const auto& s = j["supply"];
            cfg.xi = s.value("xi", cfg.xi);
            cfg.q0 = s.value("q0", cfg.q0);
            cfg.amplitude = s.value("amplitude", cfg.amplitude);
            cfg.frequency = s.value("frequency", cfg.frequency);
        }
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        if (j.contains("emit")) {
            cfg.emit.clear();
            for (const auto& e : j["emit"]) cfg.emit.insert(e.get<std::string>());
        }
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config field error: " + std::string(e.what()));
    }
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    if (!(cfg.b > cfg.a)) throw ConfigError("config: requires b > a");
    if (!(cfg.T > 0.0)) throw ConfigError("config: requires T > 0");
    if (!(cfg.rho > 0.0) || !(cfg.h > 0.0)) throw ConfigError("config: requires rho, h > 0");
    if (!(cfg.eps > 0.0)) throw ConfigError("config: requires eps > 0");
    if (cfg.max_iterations < 1) throw ConfigError("config: requires max_iterations >= 1");
    if (cfg.family != "quadratic" && cfg.family != "quartic")
        throw ConfigError("config: unknown model family '" + cfg.family + "'");
    if (cfg.test == TestCase::test1 && cfg.family != "quadratic")
        throw ConfigError("config: test1 uses the quadratic family");
    if (cfg.test == TestCase::test2 && cfg.family != "quartic")
        throw ConfigError("config: test2 uses the quartic family");
    for (const auto& e : cfg.emit)
        if (e != "fields" && e != "errors" && e != "summary")
            throw ConfigError("config: unknown emit target '" + e + "'");
    if (cfg.family == "quadratic" && !(cfg.c > 0.0))
        throw ConfigError("config: quadratic family requires c > 0");
}

ModelSpec model_from_config(const RunConfig& cfg) {
    if (cfg.family == "quadratic") return make_quadratic_model(cfg.c, cfg.eta, cfg.tau);
    return make_quartic_model(cfg.eta, cfg.tau, cfg.a0_bar, cfg.a1_bar);
}

SupplySpec supply_from_config(const RunConfig& cfg) {
    return make_supply(cfg.xi, cfg.q0, cfg.amplitude, cfg.frequency, cfg.T);
}

RunSummary run_experiment(const RunConfig& cfg) {
    validate_config(cfg);
    const auto t_start = std::chrono::steady_clock::now();

    const Grid grid = Grid::from_steps(cfg.a, cfg.b, cfg.T, cfg.rho, cfg.h);
    const ModelSpec model = model_from_config(cfg);
    const SupplySpec supply = supply_from_config(cfg);
    const TimeSeries Q = sample_supply(supply, grid);

    SolverConfig scfg;
    scfg.eps = cfg.eps;
    scfg.max_iterations = cfg.max_iterations;

    const DiscreteSolution sol = fixed_point_solve(model, grid, Q, scfg);
    validate_solution(sol, grid);
    if (boundary_mass(sol.m, grid) > 1e-8)
        std::cerr << "warning: density mass within one cell of the domain boundary exceeds 1e-8;"
                     " consider widening [a, b]\n";

    const ReferenceSolution ref = make_reference(model, supply);

    RunSummary summary;
    summary.iterations = sol.iterations;
    summary.converged = sol.converged;
    summary.final_price_residual = sol.final_price_residual;
    summary.errors = error_report(sol, ref, grid);
    summary.rho = grid.rho();
    summary.h = grid.h();
    summary.M = grid.M();
    summary.N = grid.N();
    summary.config = cfg;

    if (!cfg.output_dir.empty() && !cfg.emit.empty()) {
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        if (cfg.emit.count("fields")) {
            std::vector<std::array<double, 4>> rows;
            rows.reserve(grid.N());
            for (int k = 0; k < grid.N(); ++k) {
                const double exact = ref.price(grid.t(k));
                rows.push_back({grid.t(k), sol.varpi[k], exact, std::abs(sol.varpi[k] - exact)});
            }
            write_series_csv(dir / "price.csv", "t,varpi,varpi_exact,abs_err", rows);

            rows.clear();
            for (int i = 0; i < grid.num_nodes(); ++i) {
                const double exact = ref.value(grid.x(i), 0.0);
                rows.push_back({grid.x(i), sol.u(i, 0), exact, std::abs(sol.u(i, 0) - exact)});
            }
            write_series_csv(dir / "u_t0.csv", "x,u,u_exact,abs_err", rows);

            rows.clear();
            for (int i = 0; i < grid.num_nodes(); ++i) {
                const double exact = ref.density(grid.x(i), grid.T());
                rows.push_back(
                    {grid.x(i), sol.m(i, grid.N()), exact, std::abs(sol.m(i, grid.N()) - exact)});
            }
            write_series_csv(dir / "m_tT.csv", "x,m,m_exact,abs_err", rows);

            write_field_csv(dir / "field_u.csv", sol.u);
            write_field_csv(dir / "field_m.csv", sol.m);
        }
        if (cfg.emit.count("errors")) write_errors_csv(dir / "errors.csv", {summary});
        if (cfg.emit.count("summary")) write_summary_json(dir / "summary.json", summary_to_json(summary));
    }

    summary.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return summary;
}

std::vector<SweepPair> load_sweep_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("sweep parse error: " + std::string(e.what()));
    }
    if (!j.is_array() || j.empty()) throw ConfigError("sweep file must be a non-empty array");
    std::vector<SweepPair> pairs;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 2)
            throw ConfigError("sweep rows must be [rho, h] pairs");
        pairs.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    return pairs;
}

std::vector<RunSummary> run_sweep(const RunConfig& base, const std::vector<SweepPair>& pairs) {
    std::vector<RunSummary> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) {
        RunConfig cfg = base;
        cfg.rho = p.rho;
        cfg.h = p.h;
        cfg.emit.clear();  // the sweep writes its own aggregate files
        rows.push_back(run_experiment(cfg));
    }
    if (!base.output_dir.empty()) {
        const fs::path dir(base.output_dir);
        fs::create_directories(dir);
        if (base.emit.count("errors")) write_errors_csv(dir / "errors.csv", rows);
        if (base.emit.count("summary")) {
            json j;
            j["schema_version"] = 1;
            j["test"] = test_name(base.test);
            j["rows"] = json::array();
            for (const auto& r : rows) j["rows"].push_back(summary_to_json(r));
            write_summary_json(dir / "summary.json", j);
        }
    }
    return rows;
}

bool CheckReport::all_passed() const {
    for (const auto& s : suites)
        if (!s.passed) return false;
    return true;
}

CheckReport run_checks(std::uint64_t seed, int grid_size, const CheckOptions& opts) {
    if (grid_size < 4) throw ConfigError("run_checks: grid size too small");
    CheckReport report;
    const Grid grid(-1.0, 1.0, 1.0, grid_size, grid_size);
    const ModelSpec model = make_quadratic_model(1.0, 1.0, 0.25);
    const SupplySpec supply = make_supply(4.0, -0.5, 5.0, 3.0, 1.0);
    const TimeSeries Q = sample_supply(supply, grid);
    SolverConfig scfg;
    scfg.eps = 0.004;

    char detail[256];

    // Mass conservation and positivity of one transport pass (any control
    // field conserves mass); the fault hook flips the scatter weights.
    {
        TimeSeries varpi(grid.N());
        for (int k = 0; k < grid.N(); ++k) varpi[k] = -Q[k];
        const auto sweep = hj_backward_sweep(model, grid, varpi, scfg);
        const auto m_bar = normalize_initial_density(model, grid);
        TransportOptions topt;
        if (opts.corrupt_transport_for_test) topt.weight_sign = -1.0;
        const auto m = transport_forward(grid, sweep.alpha_star, m_bar, scfg, topt);
        double drift = 0.0;
        double min_value = 0.0;
        for (int k = 0; k <= grid.N(); ++k) {
            drift = std::max(drift, std::abs(mass(m.slice(k), grid) - 1.0));
            for (double v : m.slice(k)) min_value = std::min(min_value, v);
        }
        std::snprintf(detail, sizeof(detail), "max |mass-1| = %.3g (tol 1e-12)", drift);
        report.suites.push_back({"mass_conservation", drift <= 1e-12, detail});
        std::snprintf(detail, sizeof(detail), "min m = %.3g", min_value);
        report.suites.push_back({"positivity", min_value >= 0.0, detail});
    }

    const DiscreteSolution sol = fixed_point_solve(model, grid, Q, scfg);

    // Space-Lipschitz bound on the value function.
    {
        double lip = 0.0;
        for (int k = 0; k <= grid.N(); ++k) lip = std::max(lip, slice_lipschitz(sol.u.slice(k), grid));
        const double bound = model.lipschitz_u_bar + grid.T() * model.lipschitz_V + 1e-9;
        std::snprintf(detail, sizeof(detail), "max Lip(u_k) = %.6f, bound = %.6f", lip, bound);
        report.suites.push_back({"lipschitz_space", lip <= bound, detail});
    }

    // Translation invariance of the sweep.
    {
        ModelSpec shifted = model;
        const auto base_u_bar = model.u_bar;
        shifted.u_bar = [base_u_bar](double x) { return base_u_bar(x) + 5.0; };
        const auto s1 = hj_backward_sweep(model, grid, sol.varpi, scfg);
        const auto s2 = hj_backward_sweep(shifted, grid, sol.varpi, scfg);
        double dev = 0.0;
        for (int k = 0; k <= grid.N(); ++k)
            for (int i = 0; i < grid.num_nodes(); ++i)
                dev = std::max(dev, std::abs(s2.u(i, k) - (s1.u(i, k) + 5.0)));
        std::snprintf(detail, sizeof(detail), "sup |sweep(u+5) - sweep(u) - 5| = %.3g (tol 1e-13)", dev);
        report.suites.push_back({"translation_invariance", dev <= 1e-13, detail});
    }

    // Minimizer bound: controls selected for a given price stay within the
    // window set by that price and the value-slice slopes.
    {
        const auto sweep = hj_backward_sweep(model, grid, sol.varpi, scfg);
        double worst_alpha = 0.0, worst_bound = 0.0;
        bool ok = true;
        for (int k = 0; k < grid.N(); ++k) {
            const double lip = slice_lipschitz(sweep.u.slice(k + 1), grid);
            const double reach = std::abs(sol.varpi[k]) + lip;
            const double tie_scale =
                scfg.tie_tolerance * (1.0 + lip * (grid.b() - grid.a()));
            const double bound =
                std::max(std::abs(model.l0_prime_inverse(reach)),
                         std::abs(model.l0_prime_inverse(-reach))) +
                std::sqrt(2.0 * tie_scale / (grid.h() * model.kappa)) + 1e-6;
            for (int i = 0; i < grid.num_nodes(); ++i) {
                const double a = std::abs(sweep.alpha_star(i, k));
                if (a > worst_alpha) worst_alpha = a;
                if (bound > worst_bound) worst_bound = bound;
                if (a > bound) ok = false;
            }
        }
        std::snprintf(detail, sizeof(detail), "max |alpha*| = %.6f, bound = %.6f", worst_alpha,
                      worst_bound);
        report.suites.push_back({"minimizer_bound", ok, detail});
    }

    // Monotonicity of the discrete operator over seeded random pairs.
    {
        double min_pairing = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 200; ++trial) {
            const auto pair = random_triplet_pair(seed + trial, grid);
            min_pairing = std::min(
                min_pairing, monotonicity_pairing(pair.w, pair.w_tilde, model, grid, Q, scfg));
        }
        std::snprintf(detail, sizeof(detail), "min pairing = %.3g (tol -1e-9)", min_pairing);
        report.suites.push_back({"monotonicity_pairing", min_pairing >= -1e-9, detail});
    }

    // Consistency probe: smooth data at three refinement levels, plus an
    // affine case that the scheme reproduces exactly.
    {
        std::vector<Grid> levels;
        for (int n = 0; n < 3; ++n)
            levels.emplace_back(-1.0, 1.0, 1.0, 40 << n, 10 << n);
        SmoothFn quad{[](double x, double t) { return x * x + t; },
                      [](double, double) { return 1.0; },
                      [](double x, double) { return 2.0 * x; }};
        const auto rows = consistency_probe(quad, 0.0, model, levels);
        bool decays = true;
        for (size_t n = 1; n < rows.size(); ++n)
            if (!(rows[n].max_error * 1.5 <= rows[n - 1].max_error)) decays = false;

        const ModelSpec flat = make_quadratic_model(1.0, 0.0, 0.0);
        SmoothFn affine{[](double x, double) { return x; }, [](double, double) { return 0.0; },
                        [](double, double) { return 1.0; }};
        const auto flat_rows = consistency_probe(affine, 0.0, flat, levels);
        double affine_err = 0.0;
        for (const auto& r : flat_rows) affine_err = std::max(affine_err, r.max_error);
        std::snprintf(detail, sizeof(detail),
                      "errors %.3g -> %.3g -> %.3g, affine residual %.3g", rows[0].max_error,
                      rows[1].max_error, rows[2].max_error, affine_err);
        report.suites.push_back({"consistency_probe", decays && affine_err <= 1e-12, detail});
    }

    return report;
}

}  // namespace mfg
