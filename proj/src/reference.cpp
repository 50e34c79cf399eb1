#include "mfg/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace mfg {

namespace {

constexpr int kQuadraturePoints = 1000000;

// Time-dependent price used throughout the quadratic-model formulas,
// with the density mean precomputed once.
struct QuadraticPrice {
    double eta, tau, c, horizon, mean_m;
    const SupplySpec* supply;

    double operator()(double t) const {
        return eta * (tau - mean_m) * (horizon - t) - eta * supply->IIQ(t) - supply->Q(t) * c;
    }
};

template <size_t D>
using State = std::array<double, D>;

// One classical Runge-Kutta step; dt may be negative.
template <size_t D, class Rhs>
State<D> rk4_step(const Rhs& rhs, double t, const State<D>& y, double dt) {
    State<D> k1 = rhs(t, y), k2{}, k3{}, k4{}, tmp{};
    for (size_t d = 0; d < D; ++d) tmp[d] = y[d] + 0.5 * dt * k1[d];
    k2 = rhs(t + 0.5 * dt, tmp);
    for (size_t d = 0; d < D; ++d) tmp[d] = y[d] + 0.5 * dt * k2[d];
    k3 = rhs(t + 0.5 * dt, tmp);
    for (size_t d = 0; d < D; ++d) tmp[d] = y[d] + dt * k3[d];
    k4 = rhs(t + dt, tmp);
    State<D> out;
    for (size_t d = 0; d < D; ++d)
        out[d] = y[d] + dt / 6.0 * (k1[d] + 2.0 * (k2[d] + k3[d]) + k4[d]);
    return out;
}

RiccatiCoefficients integrate_riccati(const ModelSpec& model, const SupplySpec& supply,
                                      const QuadraticPrice& price, int steps) {
    const double T = supply.horizon;
    const double dt = T / steps;
    const double c = model.c, eta = model.eta, tau = model.tau;
    auto rhs = [&](double t, const State<3>& y) -> State<3> {
        const double w = price(std::clamp(t, 0.0, T));
        const double wa1 = w + y[1];
        return {wa1 * wa1 / (2.0 * c) - 0.5 * eta * tau * tau,
                2.0 * y[2] * wa1 / c + eta * tau,
                2.0 * y[2] * y[2] / c - 0.5 * eta};
    };
    RiccatiCoefficients r;
    r.dt = dt;
    r.a0.assign(steps + 1, 0.0);
    r.a1.assign(steps + 1, 0.0);
    r.a2.assign(steps + 1, 0.0);
    State<3> y{0.0, 0.0, 0.0};  // terminal data from u(x, T) = 0
    for (int j = steps; j > 0; --j) {
        y = rk4_step(rhs, j * dt, y, -dt);
        if (!std::isfinite(y[0]) || std::abs(y[2]) > 1e6)
            throw std::runtime_error("solve_riccati_test1: coefficient blow-up");
        r.a0[j - 1] = y[0];
        r.a1[j - 1] = y[1];
        r.a2[j - 1] = y[2];
    }
    return r;
}

// Affine flow X(t) = g(t) x + r(t) of the quadratic-model transport field
// b(t, x) = -(varpi + a1 + 2 a2 x)/c, sampled on the coefficient mesh.
struct FlowSamples {
    double dt = 0.0;
    std::vector<double> g, r;

    double g_at(double t) const { return lin(g, t); }
    double r_at(double t) const { return lin(r, t); }

private:
    double lin(const std::vector<double>& s, double t) const {
        const double pos = std::clamp(t / dt, 0.0, static_cast<double>(s.size() - 1));
        const size_t j = std::min(static_cast<size_t>(pos), s.size() - 2);
        const double th = pos - j;
        return s[j] + (s[j + 1] - s[j]) * th;
    }
};

FlowSamples integrate_flow(const ModelSpec& model, const RiccatiCoefficients& ric,
                           const QuadraticPrice& price, double horizon) {
    const int steps = ric.steps();
    const double dt = horizon / steps;
    auto rhs = [&](double t, const State<2>& y) -> State<2> {
        const double tc = std::clamp(t, 0.0, horizon);
        const double q = -2.0 * ric.a2_at(tc) / model.c;
        const double p = -(price(tc) + ric.a1_at(tc)) / model.c;
        return {q * y[0], q * y[1] + p};
    };
    FlowSamples f;
    f.dt = dt;
    f.g.assign(steps + 1, 1.0);
    f.r.assign(steps + 1, 0.0);
    State<2> y{1.0, 0.0};
    for (int j = 0; j < steps; ++j) {
        y = rk4_step(rhs, j * dt, y, dt);
        f.g[j + 1] = y[0];
        f.r[j + 1] = y[1];
    }
    return f;
}

}  // namespace

double RiccatiCoefficients::interp(const std::vector<double>& samples, double t) const {
    const double pos = std::clamp(t / dt, 0.0, static_cast<double>(samples.size() - 1));
    const size_t j = std::min(static_cast<size_t>(pos), samples.size() - 2);
    const double th = pos - j;
    return samples[j] + (samples[j + 1] - samples[j]) * th;
}

double initial_density_integral(const ModelSpec& model) {
    const double r = model.support_radius;
    const double dx = 2.0 * r / kQuadraturePoints;
    double sum = 0.0;
    for (int j = 0; j < kQuadraturePoints; ++j) sum += model.m_hat(-r + (j + 0.5) * dx);
    return sum * dx;
}

double initial_density_mean(const ModelSpec& model) {
    const double r = model.support_radius;
    const double dx = 2.0 * r / kQuadraturePoints;
    double sum = 0.0, weighted = 0.0;
    for (int j = 0; j < kQuadraturePoints; ++j) {
        const double x = -r + (j + 0.5) * dx;
        const double v = model.m_hat(x);
        sum += v;
        weighted += x * v;
    }
    return weighted / sum;
}

double exact_price_test1(const ModelSpec& model, const SupplySpec& supply, double t) {
    if (model.kind != ModelKind::quadratic)
        throw std::invalid_argument("exact_price_test1: requires the quadratic model");
    QuadraticPrice price{model.eta, model.tau, model.c, supply.horizon,
                         initial_density_mean(model), &supply};
    return price(t);
}

RiccatiCoefficients solve_riccati_test1(const ModelSpec& model, const SupplySpec& supply,
                                        int initial_steps) {
    if (model.kind != ModelKind::quadratic)
        throw std::invalid_argument("solve_riccati_test1: requires the quadratic model");
    if (initial_steps < 2) throw std::invalid_argument("solve_riccati_test1: too few steps");
    QuadraticPrice price{model.eta, model.tau, model.c, supply.horizon,
                         initial_density_mean(model), &supply};
    int steps = initial_steps;
    RiccatiCoefficients coarse = integrate_riccati(model, supply, price, steps);
    for (int round = 0; round < 8; ++round) {
        RiccatiCoefficients fine = integrate_riccati(model, supply, price, 2 * steps);
        double diff = 0.0;
        for (int j = 0; j <= steps; ++j) {
            diff = std::max(diff, std::abs(fine.a0[2 * j] - coarse.a0[j]));
            diff = std::max(diff, std::abs(fine.a1[2 * j] - coarse.a1[j]));
            diff = std::max(diff, std::abs(fine.a2[2 * j] - coarse.a2[j]));
        }
        if (diff < 1e-10) return fine;
        steps *= 2;
        coarse = std::move(fine);
    }
    throw std::runtime_error("solve_riccati_test1: step refinement did not settle");
}

ReferenceSolution make_reference_test1(const ModelSpec& model, const SupplySpec& supply,
                                       int ode_steps) {
    auto ric = std::make_shared<RiccatiCoefficients>(solve_riccati_test1(model, supply, ode_steps));
    auto price = std::make_shared<QuadraticPrice>(QuadraticPrice{
        model.eta, model.tau, model.c, supply.horizon, initial_density_mean(model), nullptr});
    auto supply_copy = std::make_shared<SupplySpec>(supply);
    price->supply = supply_copy.get();
    auto flow = std::make_shared<FlowSamples>(integrate_flow(model, *ric, *price, supply.horizon));
    const double norm = initial_density_integral(model);
    auto m_hat = model.m_hat;

    ReferenceSolution ref;
    ref.kind = ModelKind::quadratic;
    ref.ode_steps = ric->steps();
    ref.price = [price, supply_copy](double t) { return (*price)(t); };
    ref.value = [ric](double x, double t) {
        return ric->a0_at(t) + ric->a1_at(t) * x + ric->a2_at(t) * x * x;
    };
    ref.density = [flow, m_hat, norm](double x, double t) {
        const double g = flow->g_at(t);
        if (!(g > 0.0)) throw std::logic_error("reference density: nonpositive flow jacobian");
        return m_hat((x - flow->r_at(t)) / g) / (norm * g);
    };
    return ref;
}

ReferenceSolution make_reference_test2(const ModelSpec& model, const SupplySpec& supply) {
    if (model.kind != ModelKind::quartic)
        throw std::invalid_argument("make_reference_test2: requires the quartic model");
    auto supply_copy = std::make_shared<SupplySpec>(supply);
    const double T = supply.horizon;
    const double eta = model.eta, a1_bar = model.a1_bar;
    const double norm = initial_density_integral(model);
    auto m_hat = model.m_hat;
    auto V = model.V;
    auto u_bar = model.u_bar;

    // |Q|^{4/3} is C^1 but not C^2 at the zeros of Q; split there.
    auto roots = std::make_shared<std::vector<double>>(detail::find_roots(
        [supply_copy](double t) { return supply_copy->Q(t); }, 0.0, T));

    ReferenceSolution ref;
    ref.kind = ModelKind::quartic;
    ref.ode_steps = 0;
    ref.price = [supply_copy, T, eta, a1_bar](double t) {
        return -std::cbrt(supply_copy->Q(t)) - (T - t) * eta - a1_bar;
    };
    ref.value = [supply_copy, roots, T, V, u_bar](double x, double t) {
        auto integrand = [&](double s) {
            const double q = supply_copy->Q(s);
            const double cr = std::cbrt(q);
            const double c2 = cr * cr;
            return 0.25 * c2 * c2;  // |Q|^{4/3} / 4
        };
        double integral = 0.0;
        double lo = t;
        for (double root : *roots) {
            if (root <= t) continue;
            integral += detail::adaptive_simpson(integrand, lo, root);
            lo = root;
        }
        integral += detail::adaptive_simpson(integrand, lo, T);
        return -integral + (T - t) * V(x) + u_bar(x);
    };
    ref.density = [supply_copy, m_hat, norm](double x, double t) {
        return m_hat(x - supply_copy->IQ(t)) / norm;
    };
    return ref;
}

ReferenceSolution make_reference(const ModelSpec& model, const SupplySpec& supply, int ode_steps) {
    return model.kind == ModelKind::quadratic ? make_reference_test1(model, supply, ode_steps)
                                              : make_reference_test2(model, supply);
}

ErrorReport error_report(const DiscreteSolution& sol, const ReferenceSolution& ref,
                         const Grid& grid) {
    if (sol.u.nodes() != grid.num_nodes() || static_cast<int>(sol.varpi.size()) != grid.N())
        throw std::invalid_argument("error_report: solution shape does not match the grid");
    ErrorReport rep;
    auto relative = [](double num, double den, double& out, bool& absolute) {
        if (den > 1e-14) {
            out = num / den;
        } else {
            out = num;
            absolute = true;
        }
    };

    double num = 0.0, den = 0.0;
    for (int k = 0; k < grid.N(); ++k) {
        const double exact = ref.price(grid.t(k));
        num = std::max(num, std::abs(sol.varpi[k] - exact));
        den = std::max(den, std::abs(exact));
    }
    relative(num, den, rep.err_price, rep.absolute_price);

    num = den = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const double exact = ref.value(grid.x(i), 0.0);
        num = std::max(num, std::abs(sol.u(i, 0) - exact));
        den = std::max(den, std::abs(exact));
    }
    relative(num, den, rep.err_u, rep.absolute_u);

    num = den = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const double exact = ref.density(grid.x(i), grid.T());
        num = std::max(num, std::abs(sol.m(i, grid.N()) - exact));
        den = std::max(den, std::abs(exact));
    }
    relative(num, den, rep.err_m, rep.absolute_m);
    return rep;
}

namespace detail {

std::vector<double> find_roots(const std::function<double(double)>& fn, double lo, double hi,
                               int scan_points) {
    std::vector<double> roots;
    double prev_t = lo;
    double prev_v = fn(lo);
    for (int j = 1; j <= scan_points; ++j) {
        const double t = lo + (hi - lo) * j / scan_points;
        const double v = fn(t);
        if (prev_v == 0.0) {
            roots.push_back(prev_t);
        } else if ((prev_v < 0.0) != (v < 0.0) && v != 0.0) {
            double bl = prev_t, bh = t, fl = prev_v;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (bl + bh);
                const double fm = fn(mid);
                if ((fm < 0.0) == (fl < 0.0)) {
                    bl = mid;
                    fl = fm;
                } else {
                    bh = mid;
                }
            }
            roots.push_back(0.5 * (bl + bh));
        }
        prev_t = t;
        prev_v = v;
    }
    return roots;
}

namespace {
double simpson(const std::function<double(double)>& fn, double lo, double hi, double flo,
               double fmid, double fhi, double whole, double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double flm = fn(lmid);
    const double frm = fn(rmid);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (depth > 30 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(fn, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1) +
           simpson(fn, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double lo, double hi,
                        double tol) {
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi);
    const double flo = fn(lo), fmid = fn(mid), fhi = fn(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return simpson(fn, lo, hi, flo, fmid, fhi, whole, tol, 0);
}

}  // namespace detail

}  // namespace mfg
