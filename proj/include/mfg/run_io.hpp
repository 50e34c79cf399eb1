#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/reference.hpp"
#include "mfg/solver.hpp"

namespace mfg {

enum class TestCase { test1, test2, custom };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One experiment: model family and parameters, grid steps, solver
/// tolerances, supply parameters, and output selection.
struct RunConfig {
    TestCase test = TestCase::test1;
    std::string family = "quadratic";  ///< model family; fixed by test1/test2, free for custom
    double a = -1.0, b = 1.0, T = 1.0;
    double rho = 0.005, h = 0.01;
    double eps = 0.004;
    int max_iterations = 50;
    double c = 1.0, eta = 1.0, tau = 0.25, a0_bar = 0.0, a1_bar = 0.0;
    double xi = 4.0, q0 = -0.5, amplitude = 5.0, frequency = 3.0;
    std::string output_dir = "out";
    std::set<std::string> emit = {"fields", "errors", "summary"};
    std::uint64_t seed = 0;
};

/// Benchmark defaults for the given test case.
RunConfig default_config(TestCase test);

/// Parse a JSON config file on top of the test-case defaults.
RunConfig load_config(const std::string& path);

/// Throws ConfigError on invalid settings.
void validate_config(const RunConfig& config);

ModelSpec model_from_config(const RunConfig& config);
SupplySpec supply_from_config(const RunConfig& config);

struct RunSummary {
    int iterations = 0;
    bool converged = false;
    double final_price_residual = 0.0;
    ErrorReport errors;
    double wall_time_seconds = 0.0;  ///< reported on stdout only, never written to files
    double rho = 0.0, h = 0.0;
    int M = 0, N = 0;
    RunConfig config;
};

/// Solve, compare against the analytic reference, and write the selected
/// output files (price.csv, u_t0.csv, m_tT.csv, field_u.csv, field_m.csv,
/// errors.csv, summary.json). Output files are byte-identical across
/// repeated runs of the same config. Throws ConfigError for bad configs
/// and std::runtime_error when a solution invariant fails.
RunSummary run_experiment(const RunConfig& config);

struct SweepPair {
    double rho, h;
};

/// JSON array of [rho, h] pairs.
std::vector<SweepPair> load_sweep_pairs(const std::string& path);

/// Run the base config once per (rho, h) pair and write a combined
/// errors.csv and summary.json into the base output directory.
std::vector<RunSummary> run_sweep(const RunConfig& base, const std::vector<SweepPair>& pairs);

struct CheckOptions {
    bool corrupt_transport_for_test = false;  ///< fault injection for the mutation sanity test
};

struct CheckSuite {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckSuite> suites;
    bool all_passed() const;
};

/// Property suites over the scheme invariants: mass conservation,
/// positivity, space-Lipschitz bound, translation invariance, minimizer
/// bound, monotonicity pairing, and the consistency probe.
CheckReport run_checks(std::uint64_t seed, int grid_size, const CheckOptions& opts = {});

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitInvariantViolation = 4;

}  // namespace mfg
