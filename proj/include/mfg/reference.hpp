#pragma once

#include <functional>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Dense samples of the quadratic-ansatz coefficients (a0, a1, a2) of the
/// quadratic-model value function u = a0 + a1 x + a2 x^2, on a uniform
/// time mesh with linear interpolation between samples.
struct RiccatiCoefficients {
    double dt = 0.0;
    std::vector<double> a0, a1, a2;  ///< samples at t_j = j*dt

    double a0_at(double t) const { return interp(a0, t); }
    double a1_at(double t) const { return interp(a1, t); }
    double a2_at(double t) const { return interp(a2, t); }
    int steps() const { return static_cast<int>(a0.size()) - 1; }

private:
    double interp(const std::vector<double>& samples, double t) const;
};

/// Mean integral x of the normalized initial density, by high-resolution
/// midpoint quadrature of the continuum bump (independent of any grid).
double initial_density_mean(const ModelSpec& model);

/// Integral of the unnormalized bump m_hat, same quadrature rule.
double initial_density_integral(const ModelSpec& model);

/// Closed-form price for the quadratic model:
///     eta (tau - int x mbar) (T - t) - eta IIQ(t) - c Q(t).
double exact_price_test1(const ModelSpec& model, const SupplySpec& supply, double t);

/// Backward integration of the coefficient system
///     a2' = 2 a2^2 / c - eta / 2
///     a1' = 2 a2 (varpi + a1) / c + eta tau
///     a0' = (varpi + a1)^2 / (2 c) - eta tau^2 / 2
/// from a0(T) = a1(T) = a2(T) = 0, refining the step until halving it
/// moves no sample by more than 1e-10.
RiccatiCoefficients solve_riccati_test1(const ModelSpec& model, const SupplySpec& supply,
                                        int initial_steps = 2000);

/// Analytically evaluable benchmark solution.
struct ReferenceSolution {
    std::function<double(double)> price;            ///< t -> varpi(t)
    std::function<double(double, double)> value;    ///< (x, t) -> u(x, t)
    std::function<double(double, double)> density;  ///< (x, t) -> m(x, t)
    ModelKind kind = ModelKind::quadratic;
    int ode_steps = 0;  ///< resolution of the coefficient / flow meshes (0 = closed form)
};

ReferenceSolution make_reference_test1(const ModelSpec& model, const SupplySpec& supply,
                                       int ode_steps = 2000);
ReferenceSolution make_reference_test2(const ModelSpec& model, const SupplySpec& supply);

/// Dispatch on the model family.
ReferenceSolution make_reference(const ModelSpec& model, const SupplySpec& supply,
                                 int ode_steps = 2000);

/// Relative sup-norm errors in the conventions of the benchmark tables:
/// price over k = 0..N-1, value at t = 0, density at t = T. Degenerate
/// exact solutions fall back to absolute norms, flagged per component.
struct ErrorReport {
    double err_price = 0.0, err_u = 0.0, err_m = 0.0;
    bool absolute_price = false, absolute_u = false, absolute_m = false;

    double total() const { return err_price + err_u + err_m; }
};

ErrorReport error_report(const DiscreteSolution& sol, const ReferenceSolution& ref,
                         const Grid& grid);

namespace detail {
/// Roots of fn on [lo, hi] located by uniform scan plus bisection.
std::vector<double> find_roots(const std::function<double(double)>& fn, double lo, double hi,
                               int scan_points = 10000);
/// Recursive adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& fn, double lo, double hi,
                        double tol = 1e-11);
}  // namespace detail

}  // namespace mfg
