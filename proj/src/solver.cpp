#include "mfg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>

#include "mfg/parallel.hpp"

namespace mfg {

namespace {

struct CellCandidate {
    double alpha;
    double value;
};

// Minimizer of g restricted to one interpolation cell, clipped to the
// admissible alpha interval of that cell.
inline CellCandidate cell_minimum(std::span<const double> u_next, int j, double cell_lo,
                                  double cell_hi, double xi, double Vi, double w,
                                  const ModelSpec& model, const Grid& grid) {
    const double rho = grid.rho();
    const double h = grid.h();
    const double xl = grid.x(j);
    const double s = (u_next[j + 1] - u_next[j]) / rho;
    double ahat = model.l0_prime_inverse(-w - s);
    ahat = std::clamp(ahat, cell_lo, cell_hi);
    const double y = xi + h * ahat;
    const double value = u_next[j] + s * (y - xl) + h * (model.l0(ahat) + w * ahat + Vi);
    return {ahat, value};
}

// Enumeration window in alpha. Every per-cell stationary point lies in
// [l0'^{-1}(-bound), l0'^{-1}(bound)] with bound = |varpi| + Lip(u_next),
// and g is monotone beyond that interval, so the window can be clipped
// there (plus one cell of margin for ties) without losing the minimum.
struct AlphaWindow {
    double lo, hi;
    int j_lo, j_hi;
};

inline AlphaWindow alpha_window(int i, double w, double lip, const ModelSpec& model,
                                const Grid& grid) {
    const double h = grid.h();
    const double xi = grid.x(i);
    const double adm_lo = (grid.a() - xi) / h;
    const double adm_hi = (grid.b() - xi) / h;
    const double bound = std::abs(w) + lip;
    const double bp = model.l0_prime_inverse(bound);
    const double bm = model.l0_prime_inverse(-bound);
    const double margin = grid.rho() / h + 1e-3 * (1.0 + std::max(std::abs(bp), std::abs(bm)));
    double lo = std::max(adm_lo, bm - margin);
    double hi = std::min(adm_hi, bp + margin);
    if (!(lo <= hi)) {
        lo = adm_lo;
        hi = adm_hi;
    }
    const double y_lo = std::clamp(xi + h * lo, grid.a(), grid.b());
    const double y_hi = std::clamp(xi + h * hi, grid.a(), grid.b());
    return {lo, hi, locate_cell(y_lo, grid), locate_cell(y_hi, grid)};
}

MinimizeResult minimize_node_impl(std::span<const double> u_next, int i, double w,
                                  const ModelSpec& model, const Grid& grid,
                                  const SolverConfig& cfg, double lip) {
    const double h = grid.h();
    const double xi = grid.x(i);
    const double Vi = model.V(xi);
    const auto win = alpha_window(i, w, lip, model, grid);

    double vmin = std::numeric_limits<double>::infinity();
    for (int j = win.j_lo; j <= win.j_hi; ++j) {
        const double cell_lo = std::max(win.lo, (grid.x(j) - xi) / h);
        const double cell_hi = std::min(win.hi, (grid.x(j + 1) - xi) / h);
        if (!(cell_lo <= cell_hi)) continue;
        vmin = std::min(vmin,
                        cell_minimum(u_next, j, cell_lo, cell_hi, xi, Vi, w, model, grid).value);
    }
    if (!std::isfinite(vmin))
        throw std::logic_error("minimize_node: empty admissible control set");

    // Leftmost control among the near-minimal candidates; candidates come
    // out in ascending alpha, so the first hit wins. The tie threshold is
    // scaled by the slice oscillation, not the absolute level, so that the
    // selection is invariant under u -> u + K.
    const double tol = cfg.tie_tolerance * (1.0 + lip * (grid.b() - grid.a()));
    for (int j = win.j_lo; j <= win.j_hi; ++j) {
        const double cell_lo = std::max(win.lo, (grid.x(j) - xi) / h);
        const double cell_hi = std::min(win.hi, (grid.x(j + 1) - xi) / h);
        if (!(cell_lo <= cell_hi)) continue;
        const auto cand = cell_minimum(u_next, j, cell_lo, cell_hi, xi, Vi, w, model, grid);
        if (cand.value <= vmin + tol) return {cand.alpha, cand.value};
    }
    throw std::logic_error("minimize_node: tie scan found no candidate");
}

// Strictly increasing scalar residual: expand a bracket by doubling, then
// alternate secant and bisection until |F| meets the tolerance.
double solve_increasing_root(const std::function<double(double)>& F, double tol) {
    double B = 1.0;
    double flo = F(-B);
    double fhi = F(B);
    int expand = 0;
    while (flo > 0.0 || fhi < 0.0) {
        if (++expand > 120)
            throw std::runtime_error("price_update: bracket expansion failed (DpH not increasing?)");
        B *= 2.0;
        flo = F(-B);
        fhi = F(B);
    }
    if (flo == 0.0) return -B;
    if (fhi == 0.0) return B;
    double lo = -B, hi = B;
    for (int it = 0; it < 200; ++it) {
        double mid;
        if (it % 2 == 0 && fhi != flo) {
            mid = lo - flo * (hi - lo) / (fhi - flo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        const double fm = F(mid);
        if (std::abs(fm) <= tol) return mid;
        if (fm > 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo <= 1e-15 * (1.0 + std::abs(lo) + std::abs(hi))) break;
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

void check_alpha_bound(const NodeField& alpha, int k, const SolverConfig& cfg) {
    if (!cfg.alpha_bound_override) return;
    const double bound = *cfg.alpha_bound_override;
    for (int i = 0; i < alpha.nodes(); ++i) {
        if (std::abs(alpha(i, k)) > bound)
            throw std::runtime_error("hj_backward_sweep: |alpha*| = " +
                                     std::to_string(std::abs(alpha(i, k))) +
                                     " exceeds the configured bound " + std::to_string(bound));
    }
}

}  // namespace

MinimizeResult minimize_node(std::span<const double> u_next, int i, double varpi_k,
                             const ModelSpec& model, const Grid& grid, const SolverConfig& cfg) {
    if (static_cast<int>(u_next.size()) != grid.num_nodes())
        throw std::invalid_argument("minimize_node: slice length does not match the grid");
    if (i < 0 || i > grid.M())
        throw std::out_of_range("minimize_node: node index out of range");
    return minimize_node_impl(u_next, i, varpi_k, model, grid, cfg, slice_lipschitz(u_next, grid));
}

std::vector<double> minimizer_set(std::span<const double> u_next, int i, double varpi_k,
                                  const ModelSpec& model, const Grid& grid,
                                  const SolverConfig& cfg) {
    if (static_cast<int>(u_next.size()) != grid.num_nodes())
        throw std::invalid_argument("minimizer_set: slice length does not match the grid");
    if (i < 0 || i > grid.M())
        throw std::out_of_range("minimizer_set: node index out of range");
    const double h = grid.h();
    const double xi = grid.x(i);
    const double Vi = model.V(xi);
    const double adm_lo = (grid.a() - xi) / h;
    const double adm_hi = (grid.b() - xi) / h;

    // Full admissible range; this path is diagnostic, not hot.
    std::vector<CellCandidate> cands;
    for (int j = 0; j < grid.M(); ++j) {
        const double cell_lo = std::max(adm_lo, (grid.x(j) - xi) / h);
        const double cell_hi = std::min(adm_hi, (grid.x(j + 1) - xi) / h);
        if (!(cell_lo <= cell_hi)) continue;
        cands.push_back(cell_minimum(u_next, j, cell_lo, cell_hi, xi, Vi, varpi_k, model, grid));
    }
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) vmin = std::min(vmin, c.value);
    const double tol =
        cfg.tie_tolerance * (1.0 + slice_lipschitz(u_next, grid) * (grid.b() - grid.a()));
    std::vector<double> ties;
    for (const auto& c : cands)
        if (c.value <= vmin + tol) ties.push_back(c.alpha);
    std::sort(ties.begin(), ties.end());
    ties.erase(std::unique(ties.begin(), ties.end(),
                           [](double p, double q) { return std::abs(p - q) <= 1e-12 * (1.0 + std::abs(p)); }),
               ties.end());
    return ties;
}

SweepResult hj_backward_sweep(const ModelSpec& model, const Grid& grid, const TimeSeries& varpi,
                              const SolverConfig& cfg) {
    if (static_cast<int>(varpi.size()) != grid.N())
        throw std::invalid_argument("hj_backward_sweep: price series must have length N");
    SweepResult out{NodeField(grid.num_nodes(), grid.N() + 1),
                    NodeField(grid.num_nodes(), grid.N())};
    for (int i = 0; i < grid.num_nodes(); ++i) out.u(i, grid.N()) = model.u_bar(grid.x(i));
    for (int k = grid.N() - 1; k >= 0; --k) {
        const auto next = out.u.slice(k + 1);
        const double lip = slice_lipschitz(next, grid);
        auto u_row = out.u.slice(k);
        auto a_row = out.alpha_star.slice(k);
        parallel_for(0, grid.num_nodes(), [&](int i) {
            const auto r = minimize_node_impl(next, i, varpi[k], model, grid, cfg, lip);
            u_row[i] = r.value;
            a_row[i] = r.alpha_star;
        });
        check_alpha_bound(out.alpha_star, k, cfg);
    }
    return out;
}

NodeField transport_forward(const Grid& grid, const NodeField& alpha_star,
                            std::span<const double> m_bar, const SolverConfig& cfg,
                            const TransportOptions& opts) {
    (void)cfg;
    if (static_cast<int>(m_bar.size()) != grid.num_nodes())
        throw std::invalid_argument("transport_forward: initial density length mismatch");
    if (alpha_star.nodes() != grid.num_nodes() || alpha_star.times() != grid.N())
        throw std::invalid_argument("transport_forward: control field shape mismatch");
    NodeField m(grid.num_nodes(), grid.N() + 1, 0.0);
    std::copy(m_bar.begin(), m_bar.end(), m.slice(0).begin());
    const double slack = 1e-9 * (1.0 + std::abs(grid.a()) + std::abs(grid.b()));
    for (int k = 0; k < grid.N(); ++k) {
        const auto cur = m.slice(k);
        auto nxt = m.slice(k + 1);
        for (int j = 0; j < grid.num_nodes(); ++j) {
            const double mv = cur[j];
            if (mv == 0.0) continue;
            double y = grid.x(j) + grid.h() * alpha_star(j, k);
            if (y < grid.a() || y > grid.b()) {
                if (y < grid.a() - slack || y > grid.b() + slack)
                    throw std::logic_error("transport_forward: foot point outside [a,b]");
                y = std::clamp(y, grid.a(), grid.b());
            }
            const int c = locate_cell(y, grid);
            double wr = (y - grid.x(c)) / grid.rho();
            if (y == grid.x(c + 1)) wr = 1.0;  // keep exact node hits exact
            wr = std::clamp(wr, 0.0, 1.0);
            nxt[c] += mv * opts.weight_sign * (1.0 - wr);
            nxt[c + 1] += mv * opts.weight_sign * wr;
        }
    }
    return m;
}

TimeSeries price_update(const ModelSpec& model, const Grid& grid, const NodeField& m,
                        const NodeField& alpha_star, const TimeSeries& varpi_old,
                        const TimeSeries& Q, const SolverConfig& cfg) {
    if (m.nodes() != grid.num_nodes() || m.times() < grid.N())
        throw std::invalid_argument("price_update: density shape mismatch");
    if (alpha_star.nodes() != grid.num_nodes() || alpha_star.times() != grid.N())
        throw std::invalid_argument("price_update: control field shape mismatch");
    if (static_cast<int>(varpi_old.size()) != grid.N() || static_cast<int>(Q.size()) != grid.N())
        throw std::invalid_argument("price_update: series length mismatch");
    TimeSeries out(grid.N());
    std::vector<double> shift, weight;
    shift.reserve(grid.num_nodes());
    weight.reserve(grid.num_nodes());
    for (int k = 0; k < grid.N(); ++k) {
        shift.clear();
        weight.clear();
        for (int i = 0; i < grid.num_nodes(); ++i) {
            const double w = m(i, k) * grid.rho();
            if (w == 0.0) continue;
            shift.push_back(model.DpH_inverse(-alpha_star(i, k)));
            weight.push_back(w);
        }
        if (shift.empty())
            throw std::invalid_argument("price_update: density row has no mass");
        const double qk = Q[k];
        auto residual = [&](double delta) {
            double s = 0.0;
            for (size_t n = 0; n < shift.size(); ++n) s += model.DpH(delta + shift[n]) * weight[n];
            return s + qk;
        };
        out[k] = varpi_old[k] + solve_increasing_root(residual, cfg.price_root_tolerance);
    }
    return out;
}

DiscreteSolution fixed_point_solve(const ModelSpec& model, const Grid& grid, const TimeSeries& Q,
                                   const SolverConfig& cfg) {
    if (static_cast<int>(Q.size()) != grid.N())
        throw std::invalid_argument("fixed_point_solve: supply series must have length N");
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("fixed_point_solve: requires eps > 0");
    if (cfg.max_iterations < 1)
        throw std::invalid_argument("fixed_point_solve: requires max_iterations >= 1");
    const auto m_bar = normalize_initial_density(model, grid);

    TimeSeries varpi(grid.N());
    for (int k = 0; k < grid.N(); ++k) varpi[k] = -Q[k];

    DiscreteSolution sol;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        auto sweep = hj_backward_sweep(model, grid, varpi, cfg);
        auto m = transport_forward(grid, sweep.alpha_star, m_bar, cfg);
        auto varpi_new = price_update(model, grid, m, sweep.alpha_star, varpi, Q, cfg);
        double resid = 0.0;
        for (int k = 0; k < grid.N(); ++k)
            resid = std::max(resid, std::abs(varpi_new[k] - varpi[k]));
        sol.u = std::move(sweep.u);
        sol.m = std::move(m);
        sol.alpha_star = std::move(sweep.alpha_star);
        sol.iterations = it;
        sol.final_price_residual = resid;
        varpi = std::move(varpi_new);
        sol.varpi = varpi;
        if (resid < cfg.eps) {
            sol.converged = true;
            break;
        }
    }
    return sol;
}

double slice_lipschitz(std::span<const double> slice, const Grid& grid) {
    double lip = 0.0;
    for (size_t i = 0; i + 1 < slice.size(); ++i)
        lip = std::max(lip, std::abs(slice[i + 1] - slice[i]));
    return lip / grid.rho();
}

double mass(std::span<const double> slice, const Grid& grid) {
    double s = 0.0;
    for (double v : slice) s += v;
    return s * grid.rho();
}

double boundary_mass(const NodeField& m, const Grid& grid) {
    double worst = 0.0;
    for (int k = 0; k < m.times(); ++k) {
        const auto row = m.slice(k);
        const double edge = (row[0] + row[1] + row[grid.M() - 1] + row[grid.M()]) * grid.rho();
        worst = std::max(worst, edge);
    }
    return worst;
}

}  // namespace mfg
