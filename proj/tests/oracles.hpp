#pragma once

// Independent numerical oracles used by the test suites. These stay
// deliberately naive (fixed-step integrators, mesh scans) so they share
// no code path with the library they check.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Fixed-step classical Runge-Kutta for small systems; returns y(t1).
template <size_t D>
std::array<double, D> rk4(const std::function<std::array<double, D>(double, const std::array<double, D>&)>& f,
                          std::array<double, D> y, double t0, double t1, int steps) {
    const double dt = (t1 - t0) / steps;
    double t = t0;
    for (int n = 0; n < steps; ++n) {
        std::array<double, D> k1 = f(t, y), tmp;
        for (size_t d = 0; d < D; ++d) tmp[d] = y[d] + 0.5 * dt * k1[d];
        std::array<double, D> k2 = f(t + 0.5 * dt, tmp);
        for (size_t d = 0; d < D; ++d) tmp[d] = y[d] + 0.5 * dt * k2[d];
        std::array<double, D> k3 = f(t + 0.5 * dt, tmp);
        for (size_t d = 0; d < D; ++d) tmp[d] = y[d] + dt * k3[d];
        std::array<double, D> k4 = f(t + dt, tmp);
        for (size_t d = 0; d < D; ++d)
            y[d] += dt / 6.0 * (k1[d] + 2.0 * (k2[d] + k3[d]) + k4[d]);
        t += dt;
    }
    return y;
}

struct ScanMin {
    double arg;
    double value;
};

/// Brute-force scalar minimization on a uniform mesh.
inline ScanMin scan_min(const std::function<double(double)>& g, double lo, double hi, int n) {
    ScanMin best{lo, g(lo)};
    for (int j = 1; j <= n; ++j) {
        const double a = lo + (hi - lo) * j / n;
        const double v = g(a);
        if (v < best.value) best = {a, v};
    }
    return best;
}

/// All mesh points whose value lies within tol of the mesh minimum.
inline std::vector<double> scan_argmin_set(const std::function<double(double)>& g, double lo,
                                           double hi, int n, double tol) {
    double vmin = g(lo);
    for (int j = 1; j <= n; ++j) vmin = std::min(vmin, g(lo + (hi - lo) * j / n));
    std::vector<double> args;
    for (int j = 0; j <= n; ++j) {
        const double a = lo + (hi - lo) * j / n;
        if (g(a) <= vmin + tol) args.push_back(a);
    }
    return args;
}

/// Composite-trapezoid cumulative double integral: int_0^T int_0^s f(r) dr ds.
inline double double_integral(const std::function<double(double)>& f, double T, int steps) {
    const double dt = T / steps;
    double inner = 0.0;       // int_0^{t_j} f
    double outer = 0.0;       // trapezoid accumulation of inner
    double prev_f = f(0.0);
    double prev_inner = 0.0;
    for (int j = 1; j <= steps; ++j) {
        const double fj = f(j * dt);
        inner += 0.5 * (prev_f + fj) * dt;
        outer += 0.5 * (prev_inner + inner) * dt;
        prev_f = fj;
        prev_inner = inner;
    }
    return outer;
}

/// Composite trapezoid on [lo, hi].
inline double integral(const std::function<double(double)>& f, double lo, double hi, int steps) {
    const double dt = (hi - lo) / steps;
    double s = 0.5 * (f(lo) + f(hi));
    for (int j = 1; j < steps; ++j) s += f(lo + j * dt);
    return s * dt;
}

}  // namespace oracle
