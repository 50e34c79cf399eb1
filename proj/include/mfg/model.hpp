#pragma once

#include <functional>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

enum class ModelKind { quadratic, quartic };

/// One price-formation game instance: the running-cost pieces, the
/// Hamiltonian derivatives used by the price update, and the initial /
/// terminal data. Immutable after construction; all evaluators are pure.
struct ModelSpec {
    ModelKind kind = ModelKind::quadratic;

    std::function<double(double)> l0;                ///< market impact cost
    std::function<double(double)> l0_prime;
    std::function<double(double)> l0_prime_inverse;  ///< inverse of l0', used by the per-cell minimizer
    std::function<double(double)> V;                 ///< preference potential
    std::function<double(double)> u_bar;             ///< terminal cost
    std::function<double(double)> m_hat;             ///< unnormalized initial density, compactly supported
    std::function<double(double)> DpH;
    std::function<double(double)> DpH_inverse;
    std::function<double(double, double)> hamiltonian;  ///< H(x, p)

    double kappa = 0.0;          ///< convexity constant of l0 over the sampled control window
    double lipschitz_V = 0.0;    ///< Lipschitz constant of V on [-1, 1]
    double lipschitz_u_bar = 0.0;
    double support_radius = 0.0; ///< m_hat vanishes outside [-r, r]

    // family parameters, echoed by the reference solutions and the CLI
    double c = 0.0, eta = 0.0, tau = 0.0, a0_bar = 0.0, a1_bar = 0.0;
};

/// Supply path Q(t) solving dQ/dt = amplitude*sin(frequency*pi*t) - xi*Q,
/// Q(0) = q0, in closed form, together with its running integrals.
struct SupplySpec {
    double xi = 4.0;
    double q0 = -0.5;
    double amplitude = 5.0;
    double frequency = 3.0;
    double horizon = 1.0;

    double Qbar(double t) const;  ///< forcing term
    double Q(double t) const;     ///< throws outside [0, horizon]
    double IQ(double t) const;    ///< integral of Q over [0, t]
    double IIQ(double t) const;   ///< double integral: int_t^T int_0^s Q(r) dr ds
};

/// Construct and validate a supply path. Checks Q(0) = q0 and a
/// finite-difference residual of the defining equation at sampled times.
SupplySpec make_supply(double xi, double q0, double amplitude, double frequency, double horizon);

/// Quadratic family: l0 = c|a|^2/2, V = (eta/2)(x - tau)^2, terminal cost
/// zero, bump initial density with scale factor 1.1, DpH(p) = p/c.
ModelSpec make_quadratic_model(double c, double eta, double tau);

/// Quartic family: l0 = 3|a|^{4/3}/4, V = tau + eta*x, u_bar = a0 + a1*x,
/// bump initial density with scale factor 1.2, DpH(p) = p^3.
ModelSpec make_quartic_model(double eta, double tau, double a0_bar, double a1_bar);

/// Node samples of the initial density, normalized so that the discrete
/// mass sum_i m_i * rho equals one. Also checks that the support of
/// m_hat lies strictly inside (a, b).
std::vector<double> normalize_initial_density(const ModelSpec& model, const Grid& grid);

/// Q(t_k) for k = 0..N-1 (the price series length).
TimeSeries sample_supply(const SupplySpec& supply, const Grid& grid);

}  // namespace mfg
