#include "mfg/operator_checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mfg {

namespace {

void check_shapes(const Triplet& w, const Grid& grid, const char* who) {
    if (w.u.nodes() != grid.num_nodes() || w.u.times() != grid.N() + 1 ||
        w.m.nodes() != grid.num_nodes() || w.m.times() != grid.N() + 1 ||
        static_cast<int>(w.varpi.size()) != grid.N())
        throw std::invalid_argument(std::string(who) + ": triplet shape does not match the grid");
}

}  // namespace

OperatorOutput apply_discrete_operator(const Triplet& w, const ModelSpec& model, const Grid& grid,
                                       const TimeSeries& Q, const SolverConfig& cfg) {
    check_shapes(w, grid, "apply_discrete_operator");
    if (static_cast<int>(Q.size()) != grid.N())
        throw std::invalid_argument("apply_discrete_operator: supply series length mismatch");

    const int n_nodes = grid.num_nodes();
    OperatorOutput out{{NodeField(n_nodes, grid.N()), NodeField(n_nodes, grid.N()),
                        TimeSeries(grid.N())},
                       NodeField(n_nodes, grid.N())};

    for (int k = 0; k < grid.N(); ++k) {
        const auto u_next = w.u.slice(k + 1);
        for (int i = 0; i < n_nodes; ++i) {
            const auto r = minimize_node(u_next, i, w.varpi[k], model, grid, cfg);
            out.alpha_star(i, k) = r.alpha_star;
            out.residual.hj(i, k) = -w.u(i, k) + r.value;
        }
        // Push-forward of the current density row under the selected controls.
        const auto m_row = w.m.slice(k);
        auto tr = out.residual.transport.slice(k);
        for (int i = 0; i < n_nodes; ++i) tr[i] = w.m(i, k + 1);
        double flux = 0.0;
        for (int j = 0; j < n_nodes; ++j) {
            const double mv = m_row[j];
            flux += out.alpha_star(j, k) * mv;
            if (mv == 0.0) continue;
            double y = grid.x(j) + grid.h() * out.alpha_star(j, k);
            y = std::clamp(y, grid.a(), grid.b());
            const int c = locate_cell(y, grid);
            double wr = (y - grid.x(c)) / grid.rho();
            if (y == grid.x(c + 1)) wr = 1.0;
            wr = std::clamp(wr, 0.0, 1.0);
            tr[c] -= mv * (1.0 - wr);
            tr[c + 1] -= mv * wr;
        }
        out.residual.balance[k] = -grid.h() * (flux * grid.rho() - Q[k]);
    }
    return out;
}

double monotonicity_pairing(const Triplet& w, const Triplet& w_tilde, const ModelSpec& model,
                            const Grid& grid, const TimeSeries& Q, const SolverConfig& cfg) {
    check_shapes(w, grid, "monotonicity_pairing");
    check_shapes(w_tilde, grid, "monotonicity_pairing");
    for (int k = 0; k <= grid.N(); ++k)
        for (int i = 0; i < grid.num_nodes(); ++i)
            if (w.m(i, k) < 0.0 || w_tilde.m(i, k) < 0.0)
                throw std::invalid_argument("monotonicity_pairing: requires m >= 0");

    const auto A = apply_discrete_operator(w, model, grid, Q, cfg);
    const auto At = apply_discrete_operator(w_tilde, model, grid, Q, cfg);

    const double h = grid.h();
    const double rho = grid.rho();
    double pairing = 0.0;
    for (int k = 0; k < grid.N(); ++k) {
        double hj_term = 0.0;
        double tr_term = 0.0;
        for (int i = 0; i < grid.num_nodes(); ++i) {
            hj_term += (At.residual.hj(i, k) - A.residual.hj(i, k)) * (w_tilde.m(i, k) - w.m(i, k));
            tr_term += (At.residual.transport(i, k) - A.residual.transport(i, k)) *
                       (w_tilde.u(i, k + 1) - w.u(i, k + 1));
        }
        pairing += h * rho * (hj_term + tr_term);
        pairing += h * (At.residual.balance[k] - A.residual.balance[k]) *
                   (w_tilde.varpi[k] - w.varpi[k]);
    }
    return pairing;
}

std::vector<ProbeRow> consistency_probe(const SmoothFn& fn, double varpi, const ModelSpec& model,
                                        const std::vector<Grid>& grids, double interior_margin) {
    std::vector<ProbeRow> rows;
    rows.reserve(grids.size());
    SolverConfig cfg;
    for (const auto& grid : grids) {
        std::vector<double> f_next(grid.num_nodes());
        double worst = 0.0;
        for (int k = 0; k < grid.N(); ++k) {
            const double tk = grid.t(k);
            const double tk1 = grid.t(k + 1);
            for (int i = 0; i < grid.num_nodes(); ++i) f_next[i] = fn.f(grid.x(i), tk1);
            for (int i = 0; i < grid.num_nodes(); ++i) {
                const double x = grid.x(i);
                if (x < grid.a() + interior_margin || x > grid.b() - interior_margin) continue;
                const auto r = minimize_node(f_next, i, varpi, model, grid, cfg);
                const double probe = (fn.f(x, tk) - r.value) / grid.h() + fn.ft(x, tk) -
                                     model.hamiltonian(x, varpi + fn.fx(x, tk));
                worst = std::max(worst, std::abs(probe));
            }
        }
        rows.push_back({grid.rho(), grid.h(), worst});
    }
    return rows;
}

TripletPair random_triplet_pair(std::uint64_t seed, const Grid& grid) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n_nodes = grid.num_nodes();
    const int n_times = grid.N() + 1;

    auto random_density_row = [&](std::span<double> row) {
        double sum = 0.0;
        for (auto& v : row) {
            v = std::abs(gauss(rng));
            sum += v;
        }
        const double scale = 1.0 / (sum * grid.rho());
        for (auto& v : row) v *= scale;
    };
    // Lipschitz by construction: cumulative sums of increments bounded by
    // 2*rho, anchored at a random level.
    auto random_value_row = [&](std::span<double> row) {
        row[0] = unif(rng);
        for (size_t i = 1; i < row.size(); ++i)
            row[i] = row[i - 1] + 2.0 * grid.rho() * unif(rng);
    };

    TripletPair pair{{NodeField(n_nodes, n_times), NodeField(n_nodes, n_times), TimeSeries(grid.N())},
                     {NodeField(n_nodes, n_times), NodeField(n_nodes, n_times), TimeSeries(grid.N())}};
    for (int k = 0; k < n_times; ++k) {
        random_density_row(pair.w.m.slice(k));
        random_value_row(pair.w.u.slice(k));
        random_density_row(pair.w_tilde.m.slice(k));
        random_value_row(pair.w_tilde.u.slice(k));
    }
    for (int k = 0; k < grid.N(); ++k) {
        pair.w.varpi[k] = 2.0 * unif(rng);
        pair.w_tilde.varpi[k] = 2.0 * unif(rng);
    }
    // Shared initial density and terminal value rows.
    std::copy(pair.w.m.slice(0).begin(), pair.w.m.slice(0).end(), pair.w_tilde.m.slice(0).begin());
    std::copy(pair.w.u.slice(grid.N()).begin(), pair.w.u.slice(grid.N()).end(),
              pair.w_tilde.u.slice(grid.N()).begin());
    return pair;
}

}  // namespace mfg
