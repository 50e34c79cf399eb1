#include "mfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfg {

Grid::Grid(double a, double b, double horizon, int space_intervals, int time_steps)
    : a_(a), b_(b), T_(horizon), M_(space_intervals), N_(time_steps) {
    if (!(b > a)) throw std::invalid_argument("Grid: requires b > a");
    if (!(horizon > 0.0)) throw std::invalid_argument("Grid: requires T > 0");
    if (M_ < 2) throw std::invalid_argument("Grid: requires at least 2 space intervals");
    if (N_ < 1) throw std::invalid_argument("Grid: requires at least 1 time step");
    rho_ = (b_ - a_) / M_;
    h_ = T_ / N_;
}

Grid Grid::from_steps(double a, double b, double horizon, double rho, double h) {
    if (!(rho > 0.0) || !(h > 0.0)) throw std::invalid_argument("Grid: rho and h must be positive");
    const int M = static_cast<int>(std::llround((b - a) / rho));
    const int N = static_cast<int>(std::llround(horizon / h));
    if (M < 2 || N < 1) throw std::invalid_argument("Grid: steps too coarse for the domain");
    if (std::abs(M * rho - (b - a)) > 1e-9 * std::max(1.0, std::abs(b - a)))
        throw std::invalid_argument("Grid: rho does not divide the space domain");
    if (std::abs(N * h - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("Grid: h does not divide the horizon");
    return Grid(a, b, horizon, M, N);
}

NodeField::NodeField(int num_nodes, int num_times, double fill)
    : nodes_(num_nodes), times_(num_times),
      data_(static_cast<size_t>(num_nodes) * num_times, fill) {
    if (num_nodes <= 0 || num_times <= 0)
        throw std::invalid_argument("NodeField: dimensions must be positive");
}

double basis_eval(int i, double x, const Grid& grid) {
    if (i < 0 || i > grid.M())
        throw std::out_of_range("basis_eval: node index " + std::to_string(i) + " out of range");
    return std::max(1.0 - std::abs(x - grid.x(i)) / grid.rho(), 0.0);
}

int locate_cell(double x, const Grid& grid) {
    const double slack = 1e-12 * (1.0 + std::abs(grid.a()) + std::abs(grid.b()));
    if (x < grid.a() - slack || x > grid.b() + slack)
        throw std::domain_error("locate_cell: x = " + std::to_string(x) + " outside [a,b]");
    int j = static_cast<int>(std::floor((x - grid.a()) / grid.rho()));
    j = std::clamp(j, 0, grid.M() - 1);
    if (j >= 1 && x <= grid.x(j)) --j;             // ties at nodes go to the left cell
    if (j < grid.M() - 1 && x > grid.x(j + 1)) ++j;  // guard against floor undershoot
    return j;
}

double interpolate(std::span<const double> slice, double x, const Grid& grid) {
    if (static_cast<int>(slice.size()) != grid.num_nodes())
        throw std::invalid_argument("interpolate: slice length does not match the grid");
    x = std::clamp(x, grid.a(), grid.b());
    const int j = locate_cell(x, grid);
    const double xr = grid.x(j + 1);
    if (x == xr) return slice[j + 1];  // keep node queries exact
    const double theta = (x - grid.x(j)) / grid.rho();
    return slice[j] + (slice[j + 1] - slice[j]) * theta;
}

}  // namespace mfg
