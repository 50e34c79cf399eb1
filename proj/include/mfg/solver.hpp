#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/model.hpp"

namespace mfg {

struct SolverConfig {
    double eps = 1e-3;                  ///< sup-norm stopping tolerance on the price change
    int max_iterations = 50;
    double tie_tolerance = 1e-10;       ///< minimizer tie detection, scaled by (1 + slice oscillation)
    double price_root_tolerance = 1e-13;
    std::optional<double> alpha_bound_override;  ///< when set, every |alpha*| is asserted against it
};

struct MinimizeResult {
    double alpha_star;
    double value;
};

/// Global minimum over the admissible controls A_i = {a : x_i + h a in [a,b]} of
///
///     g(a) = I[u_next](x_i + h a) + h (l0(a) + varpi_k a + V(x_i)).
///
/// Since I[u_next] is piecewise linear, g restricted to one interpolation
/// cell is strictly convex with stationary point l0'^{-1}(-varpi_k - s)
/// for s the cell slope, so the minimum is found by exact enumeration of
/// the per-cell minimizers. Among values within the tie tolerance of the
/// minimum, the leftmost control is returned.
MinimizeResult minimize_node(std::span<const double> u_next, int i, double varpi_k,
                             const ModelSpec& model, const Grid& grid, const SolverConfig& cfg);

/// The full set of near-minimizers (ties within the tolerance), ascending.
std::vector<double> minimizer_set(std::span<const double> u_next, int i, double varpi_k,
                                  const ModelSpec& model, const Grid& grid, const SolverConfig& cfg);

struct SweepResult {
    NodeField u;           ///< (M+1) x (N+1)
    NodeField alpha_star;  ///< (M+1) x N
};

/// Backward dynamic-programming sweep: u_{.,N} = u_bar at the nodes, then
/// u_{i,k} = minimize_node for k = N-1..0, recording the selected controls.
SweepResult hj_backward_sweep(const ModelSpec& model, const Grid& grid, const TimeSeries& varpi,
                              const SolverConfig& cfg);

/// Test-only fault injection for the transport scatter.
struct TransportOptions {
    double weight_sign = 1.0;
};

/// Push-forward of the node masses: m_{i,k+1} = sum_j beta_i(x_j + h a*_{j,k}) m_{j,k}
/// with m_{.,0} = m_bar. Nonnegative and mass-conserving by construction.
NodeField transport_forward(const Grid& grid, const NodeField& alpha_star,
                            std::span<const double> m_bar, const SolverConfig& cfg,
                            const TransportOptions& opts = {});

/// Implicit price update: for each k solve
///
///     sum_i DpH(d + DpH^{-1}(-a*_{i,k})) m_{i,k} rho = -Q_k
///
/// for d by safeguarded bracketing (the left side is strictly increasing
/// in d), and return varpi_old + d. For a linear DpH this reproduces the
/// explicit correction varpi_old + sum_i a* m rho - Q.
TimeSeries price_update(const ModelSpec& model, const Grid& grid, const NodeField& m,
                        const NodeField& alpha_star, const TimeSeries& varpi_old,
                        const TimeSeries& Q, const SolverConfig& cfg);

struct DiscreteSolution {
    NodeField u;           ///< (M+1) x (N+1)
    NodeField m;           ///< (M+1) x (N+1)
    NodeField alpha_star;  ///< (M+1) x N
    TimeSeries varpi;      ///< length N; the price after the final update
    int iterations = 0;
    bool converged = false;
    double final_price_residual = 0.0;  ///< sup-norm change of the final update
};

/// Outer fixed-point loop: sweep -> transport -> price update, starting
/// from varpi = -Q, until the sup-norm price change drops below eps or
/// max_iterations is reached. Non-convergence is reported in the result,
/// not thrown. u, m, alpha_star come from the final pass and varpi is the
/// price after its update, so the triplet satisfies the three discrete
/// equations up to the stopping tolerance (exactly, as eps -> 0).
DiscreteSolution fixed_point_solve(const ModelSpec& model, const Grid& grid, const TimeSeries& Q,
                                   const SolverConfig& cfg);

/// Discrete space-Lipschitz constant of one slice: max |f_{i+1} - f_i| / rho.
double slice_lipschitz(std::span<const double> slice, const Grid& grid);

/// Discrete mass sum_i f_i * rho.
double mass(std::span<const double> slice, const Grid& grid);

/// Largest mass found within one cell of either domain endpoint, over all
/// time slices; used to warn when the truncated domain is too tight.
double boundary_mass(const NodeField& m, const Grid& grid);

}  // namespace mfg
