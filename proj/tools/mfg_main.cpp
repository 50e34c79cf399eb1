#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfg/run_io.hpp"

namespace {

// Flag overrides applied on top of the config file / test defaults.
struct Overrides {
    std::optional<std::string> test;
    std::optional<double> rho, h, eps;
    std::optional<int> max_iterations;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> c, eta, tau, a0_bar, a1_bar;
    std::optional<double> xi, q0, amplitude, frequency;
};

void add_override_flags(CLI::App* app, Overrides& ov) {
    app->add_option("--test", ov.test, "test case: test1, test2, or custom");
    app->add_option("--rho", ov.rho, "space step");
    app->add_option("--h", ov.h, "time step");
    app->add_option("--eps", ov.eps, "price stopping tolerance");
    app->add_option("--max-iterations", ov.max_iterations, "outer iteration cap");
    app->add_option("--out-dir", ov.out_dir, "output directory");
    app->add_option("--seed", ov.seed, "seed echoed into the summary");
    app->add_option("--c", ov.c, "quadratic cost weight");
    app->add_option("--eta", ov.eta, "preference weight");
    app->add_option("--tau", ov.tau, "preference offset");
    app->add_option("--a0-bar", ov.a0_bar, "terminal cost constant (quartic family)");
    app->add_option("--a1-bar", ov.a1_bar, "terminal cost slope (quartic family)");
    app->add_option("--xi", ov.xi, "supply mean-reversion rate");
    app->add_option("--q0", ov.q0, "initial supply");
    app->add_option("--amplitude", ov.amplitude, "supply forcing amplitude");
    app->add_option("--frequency", ov.frequency, "supply forcing frequency");
}

mfg::RunConfig build_config(const std::string& config_path, const Overrides& ov) {
    mfg::RunConfig cfg;
    if (!config_path.empty()) {
        cfg = mfg::load_config(config_path);
    } else if (ov.test) {
        cfg = mfg::default_config(mfg::TestCase::test1);
    }
    if (ov.test) {
        if (*ov.test == "test1") cfg = mfg::default_config(mfg::TestCase::test1);
        else if (*ov.test == "test2") cfg = mfg::default_config(mfg::TestCase::test2);
        else if (*ov.test == "custom") cfg.test = mfg::TestCase::custom;
        else throw mfg::ConfigError("unknown test case '" + *ov.test + "'");
    }
    if (ov.rho) cfg.rho = *ov.rho;
    if (ov.h) cfg.h = *ov.h;
    if (ov.eps) cfg.eps = *ov.eps;
    if (ov.max_iterations) cfg.max_iterations = *ov.max_iterations;
    if (ov.out_dir) cfg.output_dir = *ov.out_dir;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.c) cfg.c = *ov.c;
    if (ov.eta) cfg.eta = *ov.eta;
    if (ov.tau) cfg.tau = *ov.tau;
    if (ov.a0_bar) cfg.a0_bar = *ov.a0_bar;
    if (ov.a1_bar) cfg.a1_bar = *ov.a1_bar;
    if (ov.xi) cfg.xi = *ov.xi;
    if (ov.q0) cfg.q0 = *ov.q0;
    if (ov.amplitude) cfg.amplitude = *ov.amplitude;
    if (ov.frequency) cfg.frequency = *ov.frequency;
    return cfg;
}

void print_summary(const mfg::RunSummary& s) {
    std::printf("grid: rho=%g h=%g (M=%d, N=%d)\n", s.rho, s.h, s.M, s.N);
    std::printf("iterations: %d (%s, final price residual %.3g)\n", s.iterations,
                s.converged ? "converged" : "NOT converged", s.final_price_residual);
    std::printf("errors: price=%.6g u=%.6g m=%.6g%s\n", s.errors.err_price, s.errors.err_u,
                s.errors.err_m,
                (s.errors.absolute_price || s.errors.absolute_u || s.errors.absolute_m)
                    ? " (absolute-norm fallback)"
                    : "");
    std::printf("wall time: %.3f s\n", s.wall_time_seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-Lagrangian solver for a price-formation mean-field game"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // frees -h / --h for the time step

    std::string config_path;
    Overrides ov;

    auto* solve = app.add_subcommand("solve", "run one experiment and write its outputs");
    solve->set_help_flag("--help", "print help");
    solve->add_option("--config", config_path, "JSON config file");
    add_override_flags(solve, ov);

    std::string pairs_path;
    auto* sweep = app.add_subcommand("sweep", "run a list of (rho, h) pairs and tabulate errors");
    sweep->set_help_flag("--help", "print help");
    sweep->add_option("--config", config_path, "JSON config file");
    sweep->add_option("--pairs", pairs_path, "JSON array of [rho, h] pairs")->required();
    add_override_flags(sweep, ov);

    std::uint64_t seed = 1;
    int grid_size = 10;
    auto* check = app.add_subcommand("check", "run the scheme property suites");
    check->set_help_flag("--help", "print help");
    check->add_option("--seed", seed, "random seed for the property suites");
    check->add_option("--grid-size", grid_size, "intervals per axis of the check grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mfg::kExitConfigError;
    }

    try {
        if (solve->parsed()) {
            const auto cfg = build_config(config_path, ov);
            const auto summary = mfg::run_experiment(cfg);
            print_summary(summary);
            return summary.converged ? mfg::kExitOk : mfg::kExitNoConvergence;
        }
        if (sweep->parsed()) {
            const auto cfg = build_config(config_path, ov);
            const auto pairs = mfg::load_sweep_pairs(pairs_path);
            const auto rows = mfg::run_sweep(cfg, pairs);
            bool all_converged = true;
            for (const auto& row : rows) {
                std::printf("rho=%-10g h=%-10g iters=%d err_price=%.3g err_u=%.3g err_m=%.3g\n",
                            row.rho, row.h, row.iterations, row.errors.err_price,
                            row.errors.err_u, row.errors.err_m);
                all_converged = all_converged && row.converged;
            }
            return all_converged ? mfg::kExitOk : mfg::kExitNoConvergence;
        }
        const auto report = mfg::run_checks(seed, grid_size);
        for (const auto& suite : report.suites)
            std::printf("[%s] %-24s %s\n", suite.passed ? "PASS" : "FAIL", suite.name.c_str(),
                        suite.detail.c_str());
        return report.all_passed() ? mfg::kExitOk : mfg::kExitInvariantViolation;
    } catch (const mfg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mfg::kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mfg::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mfg::kExitInvariantViolation;
    }
}
