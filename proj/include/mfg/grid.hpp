#pragma once

#include <span>
#include <vector>

namespace mfg {

/// Scalar time series indexed by the time step k.
using TimeSeries = std::vector<double>;

/// Uniform space-time lattice on [a,b] x [0,T].
///
/// Nodes are x_i = a + i*rho for i = 0..M and t_k = k*h for k = 0..N,
/// with rho = (b-a)/M and h = T/N derived from the interval counts so
/// that a + M*rho = b and N*h = T hold to rounding.
class Grid {
public:
    Grid(double a, double b, double horizon, int space_intervals, int time_steps);

    /// Build a grid from step sizes. The steps must divide the domain
    /// and the horizon to within 1e-9 relative tolerance.
    static Grid from_steps(double a, double b, double horizon, double rho, double h);

    double a() const { return a_; }
    double b() const { return b_; }
    double T() const { return T_; }
    double rho() const { return rho_; }
    double h() const { return h_; }
    int M() const { return M_; }
    int N() const { return N_; }
    int num_nodes() const { return M_ + 1; }

    double x(int i) const { return a_ + i * rho_; }
    double t(int k) const { return k * h_; }

private:
    double a_, b_, T_;
    int M_, N_;
    double rho_, h_;
};

/// Real field sampled on grid nodes, indexed (i, k) with i the space
/// index and k the time index. Storage is contiguous per time slice.
class NodeField {
public:
    NodeField() = default;
    NodeField(int num_nodes, int num_times, double fill = 0.0);

    int nodes() const { return nodes_; }
    int times() const { return times_; }

    double& operator()(int i, int k) { return data_[static_cast<size_t>(k) * nodes_ + i]; }
    const double& operator()(int i, int k) const { return data_[static_cast<size_t>(k) * nodes_ + i]; }

    std::span<double> slice(int k) { return {data_.data() + static_cast<size_t>(k) * nodes_, static_cast<size_t>(nodes_)}; }
    std::span<const double> slice(int k) const { return {data_.data() + static_cast<size_t>(k) * nodes_, static_cast<size_t>(nodes_)}; }

    std::span<const double> data() const { return data_; }

private:
    int nodes_ = 0, times_ = 0;
    std::vector<double> data_;
};

/// P1 hat function centered at node i: max{1 - |x - x_i|/rho, 0}.
double basis_eval(int i, double x, const Grid& grid);

/// Index j of the cell [x_j, x_{j+1}] containing x. Queries landing
/// exactly on an interior node resolve to the left cell; x = b returns
/// M-1. Throws std::domain_error for x outside [a,b].
int locate_cell(double x, const Grid& grid);

/// Piecewise-linear interpolation of nodal values at x. Exact at the
/// nodes and for affine data. Queries outside [a,b] clamp to the
/// endpoint values.
double interpolate(std::span<const double> slice, double x, const Grid& grid);

}  // namespace mfg
