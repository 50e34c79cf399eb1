#include "mfg/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfg {

namespace {

// Particular + homogeneous pieces of the closed-form supply. With
// w = frequency*pi the solution is C e^{-xi t} + A sin(wt) + B cos(wt).
struct SupplyCoeffs {
    double w, A, B, C;
};

SupplyCoeffs supply_coeffs(const SupplySpec& s) {
    SupplyCoeffs c{};
    c.w = s.frequency * M_PI;
    if (s.amplitude == 0.0 || s.frequency == 0.0) {
        c.A = c.B = 0.0;
    } else {
        const double denom = s.xi * s.xi + c.w * c.w;
        c.A = s.amplitude * s.xi / denom;
        c.B = -s.amplitude * c.w / denom;
    }
    c.C = s.q0 - c.B;
    return c;
}

void check_time(const SupplySpec& s, double t) {
    const double slack = 1e-12 * (1.0 + s.horizon);
    if (t < -slack || t > s.horizon + slack)
        throw std::domain_error("SupplySpec: t = " + std::to_string(t) + " outside [0, T]");
}

// Running assertions on a freshly built model; throws on violation.
void validate_model(const ModelSpec& m) {
    const double delta = 1e-3;
    for (int j = 0; j <= 80; ++j) {
        const double alpha = -8.0 + 0.2 * j;
        const double dd = (m.l0(alpha + delta) - 2.0 * m.l0(alpha) + m.l0(alpha - delta)) / (delta * delta);
        if (!(dd >= m.kappa * (1.0 - 1e-6) - 1e-9))  // slack absorbs cancellation in the differences
            throw std::invalid_argument("ModelSpec: sampled l0 convexity below kappa at alpha = " +
                                        std::to_string(alpha));
        if (!std::isfinite(m.V(alpha / 4.0)))
            throw std::invalid_argument("ModelSpec: V not finite on the sampled domain");
    }
    double prev = m.DpH(-8.0);
    for (int j = 1; j <= 80; ++j) {
        const double p = -8.0 + 0.2 * j;
        const double v = m.DpH(p);
        if (!(v > prev))
            throw std::invalid_argument("ModelSpec: DpH not strictly increasing at p = " + std::to_string(p));
        prev = v;
        const double roundtrip = m.DpH_inverse(m.DpH(p));
        if (std::abs(roundtrip - p) > 1e-10 * (1.0 + std::abs(p)))
            throw std::invalid_argument("ModelSpec: DpH_inverse does not invert DpH at p = " + std::to_string(p));
    }
    if (m.m_hat(m.support_radius + 1e-12) != 0.0 || m.m_hat(-m.support_radius - 1e-12) != 0.0)
        throw std::invalid_argument("ModelSpec: m_hat does not vanish outside its declared support");
    for (int j = 0; j <= 40; ++j) {
        const double x = -m.support_radius + 2.0 * m.support_radius * j / 40.0;
        if (!(m.m_hat(x) >= 0.0))
            throw std::invalid_argument("ModelSpec: m_hat negative at x = " + std::to_string(x));
    }
}

// Standard bump exp(-1/(1 - (s x)^2)) on |s x| < 1, zero elsewhere.
std::function<double(double)> bump_density(double scale) {
    return [scale](double x) {
        const double y = scale * x;
        const double d = 1.0 - y * y;
        if (d <= 0.0) return 0.0;
        return std::exp(-1.0 / d);
    };
}

}  // namespace

double SupplySpec::Qbar(double t) const { return amplitude * std::sin(frequency * M_PI * t); }

double SupplySpec::Q(double t) const {
    check_time(*this, t);
    const auto c = supply_coeffs(*this);
    return c.C * std::exp(-xi * t) + c.A * std::sin(c.w * t) + c.B * std::cos(c.w * t);
}

double SupplySpec::IQ(double t) const {
    check_time(*this, t);
    const auto c = supply_coeffs(*this);
    double v = c.C * (1.0 - std::exp(-xi * t)) / xi;
    if (c.w != 0.0) v += c.A * (1.0 - std::cos(c.w * t)) / c.w + c.B * std::sin(c.w * t) / c.w;
    return v;
}

double SupplySpec::IIQ(double t) const {
    check_time(*this, t);
    const auto c = supply_coeffs(*this);
    // F(s) = int_0^s IQ; IIQ(t) = F(T) - F(t).
    auto F = [&](double s) {
        double v = c.C * s / xi - c.C * (1.0 - std::exp(-xi * s)) / (xi * xi);
        if (c.w != 0.0)
            v += c.A * (s - std::sin(c.w * s) / c.w) / c.w + c.B * (1.0 - std::cos(c.w * s)) / (c.w * c.w);
        return v;
    };
    return F(horizon) - F(t);
}

SupplySpec make_supply(double xi, double q0, double amplitude, double frequency, double horizon) {
    if (!(xi > 0.0)) throw std::invalid_argument("SupplySpec: requires xi > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("SupplySpec: requires horizon > 0");
    SupplySpec s;
    s.xi = xi;
    s.q0 = q0;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.horizon = horizon;
    if (std::abs(s.Q(0.0) - q0) > 1e-12 * (1.0 + std::abs(q0)))
        throw std::logic_error("SupplySpec: Q(0) != q0");
    // Finite-difference residual of dQ/dt = Qbar - xi Q at sampled times.
    const double delta = 1e-6;
    for (int j = 1; j < 16; ++j) {
        const double t = horizon * j / 16.0;
        const double dq = (s.Q(t + delta) - s.Q(t - delta)) / (2.0 * delta);
        if (std::abs(dq - (s.Qbar(t) - xi * s.Q(t))) > 1e-8)
            throw std::logic_error("SupplySpec: closed form does not satisfy the supply equation");
    }
    return s;
}

ModelSpec make_quadratic_model(double c, double eta, double tau) {
    if (!(c > 0.0)) throw std::invalid_argument("make_quadratic_model: requires c > 0");
    if (eta < 0.0) throw std::invalid_argument("make_quadratic_model: requires eta >= 0");
    ModelSpec m;
    m.kind = ModelKind::quadratic;
    m.c = c;
    m.eta = eta;
    m.tau = tau;
    m.l0 = [c](double a) { return 0.5 * c * a * a; };
    m.l0_prime = [c](double a) { return c * a; };
    m.l0_prime_inverse = [c](double q) { return q / c; };
    m.V = [eta, tau](double x) { return 0.5 * eta * (x - tau) * (x - tau); };
    m.u_bar = [](double) { return 0.0; };
    m.m_hat = bump_density(1.1);
    m.DpH = [c](double p) { return p / c; };
    m.DpH_inverse = [c](double q) { return c * q; };
    m.hamiltonian = [c, eta, tau](double x, double p) {
        return 0.5 * p * p / c - 0.5 * eta * (x - tau) * (x - tau);
    };
    m.kappa = c;
    m.lipschitz_V = eta * (1.0 + std::abs(tau));
    m.lipschitz_u_bar = 0.0;
    m.support_radius = 1.0 / 1.1;
    validate_model(m);
    return m;
}

ModelSpec make_quartic_model(double eta, double tau, double a0_bar, double a1_bar) {
    ModelSpec m;
    m.kind = ModelKind::quartic;
    m.eta = eta;
    m.tau = tau;
    m.a0_bar = a0_bar;
    m.a1_bar = a1_bar;
    m.l0 = [](double a) { return 0.75 * std::pow(std::abs(a), 4.0 / 3.0); };
    m.l0_prime = [](double a) { return std::cbrt(a); };
    m.l0_prime_inverse = [](double q) { return q * q * q; };
    m.V = [eta, tau](double x) { return tau + eta * x; };
    m.u_bar = [a0_bar, a1_bar](double x) { return a0_bar + a1_bar * x; };
    m.m_hat = bump_density(1.2);
    m.DpH = [](double p) { return p * p * p; };
    m.DpH_inverse = [](double q) { return std::cbrt(q); };
    m.hamiltonian = [eta, tau](double x, double p) {
        const double p2 = p * p;
        return 0.25 * p2 * p2 - (tau + eta * x);
    };
    // l0'' = |a|^{-2/3}/3 decays with |a|; this is its floor on the
    // sampled window [-8, 8], with margin.
    m.kappa = 0.05;
    m.lipschitz_V = std::abs(eta);
    m.lipschitz_u_bar = std::abs(a1_bar);
    m.support_radius = 1.0 / 1.2;
    validate_model(m);
    return m;
}

std::vector<double> normalize_initial_density(const ModelSpec& model, const Grid& grid) {
    if (!(grid.a() < -model.support_radius && model.support_radius < grid.b()))
        throw std::invalid_argument("normalize_initial_density: m_hat support not inside (a, b)");
    std::vector<double> m(grid.num_nodes());
    double sum = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        m[i] = model.m_hat(grid.x(i));
        sum += m[i];
    }
    if (sum <= 0.0)
        throw std::invalid_argument("normalize_initial_density: m_hat vanishes at every node");
    const double scale = 1.0 / (sum * grid.rho());
    for (double& v : m) v *= scale;
    return m;
}

TimeSeries sample_supply(const SupplySpec& supply, const Grid& grid) {
    TimeSeries q(grid.N());
    for (int k = 0; k < grid.N(); ++k) q[k] = supply.Q(grid.t(k));
    return q;
}

}  // namespace mfg
