#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Arbitrary discrete state (m, u, varpi) fed to the discrete operator.
/// m and u are (M+1) x (N+1), varpi has length N.
struct Triplet {
    NodeField m;
    NodeField u;
    TimeSeries varpi;
};

/// Stacked residuals of the three discrete equations, evaluated with the
/// selected (leftmost) controls. hj and transport are (M+1) x N; the
/// transport entry at (i, k) compares m at k+1 against the push-forward
/// of m at k. The balance component carries an extra factor h.
struct OperatorResidual {
    NodeField hj;
    NodeField transport;
    TimeSeries balance;
};

struct OperatorOutput {
    OperatorResidual residual;
    NodeField alpha_star;  ///< (M+1) x N, the controls selected from u and varpi
};

/// Evaluate the discrete operator at w. The controls are recomputed from
/// w.u and w.varpi by the same exact per-cell minimization the solver
/// uses, so a converged solver triplet has vanishing hj and transport
/// residuals and a balance residual bounded by h times the stopping
/// tolerance.
OperatorOutput apply_discrete_operator(const Triplet& w, const ModelSpec& model, const Grid& grid,
                                       const TimeSeries& Q, const SolverConfig& cfg);

/// Duality pairing <A[w_tilde] - A[w], w_tilde - w>: the hj components
/// weigh against (m_tilde - m)_{i,k}, the transport components against
/// (u_tilde - u)_{i,k+1}, both with weight h*rho; the balance components
/// weigh against (varpi_tilde - varpi)_k with weight h (their internal
/// factor h is already part of the component). Nonnegative whenever both
/// densities are nonnegative and the two triplets share the initial
/// density row and the terminal value row. Throws on negative m input.
double monotonicity_pairing(const Triplet& w, const Triplet& w_tilde, const ModelSpec& model,
                            const Grid& grid, const TimeSeries& Q, const SolverConfig& cfg);

/// Smooth test function together with its first derivatives.
struct SmoothFn {
    std::function<double(double, double)> f;
    std::function<double(double, double)> ft;
    std::function<double(double, double)> fx;
};

struct ProbeRow {
    double rho;
    double h;
    double max_error;
};

/// Truncation-error probe of the one-step scheme: for each grid, the
/// maximum over interior nodes and all k < N of
///
///     | (f_{i,k} - S(f, i, k)) / h + f_t(x_i, t_k) - H(x_i, varpi + f_x(x_i, t_k)) |.
///
/// Interior means x_i at least `interior_margin` away from the domain
/// ends, keeping the minimizing foot points unclipped.
std::vector<ProbeRow> consistency_probe(const SmoothFn& fn, double varpi, const ModelSpec& model,
                                        const std::vector<Grid>& grids,
                                        double interior_margin = 0.35);

struct TripletPair {
    Triplet w;
    Triplet w_tilde;
};

/// Seeded random pair for the monotonicity suite: nonnegative densities
/// normalized per slice, Lipschitz value fields built from bounded
/// increments, prices uniform in [-2, 2]. The two triplets share the
/// initial density row and the terminal value row, as the monotonicity
/// statement requires.
TripletPair random_triplet_pair(std::uint64_t seed, const Grid& grid);

}  // namespace mfg
