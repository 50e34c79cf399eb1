#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfg/model.hpp"
#include "oracles.hpp"

using namespace mfg;

TEST_CASE("quadratic model evaluators") {
    const ModelSpec m = make_quadratic_model(1.0, 1.0, 0.25);
    CHECK(m.V(0.25) == doctest::Approx(0.0));          // vertex of the parabola
    CHECK(m.DpH(2.0) == doctest::Approx(2.0));
    CHECK(m.l0_prime_inverse(3.0) == doctest::Approx(3.0));
    CHECK(m.m_hat(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(m.kappa == doctest::Approx(1.0));
    CHECK(m.lipschitz_V == doctest::Approx(1.25));
    CHECK(m.hamiltonian(0.25, 1.0) == doctest::Approx(0.5));
    CHECK(m.m_hat(1.0 / 1.1) == 0.0);
    CHECK(m.m_hat(-0.95) == 0.0);

    CHECK_THROWS_AS(make_quadratic_model(0.0, 1.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(make_quadratic_model(1.0, -1.0, 0.25), std::invalid_argument);
}

TEST_CASE("quartic model evaluators") {
    const ModelSpec m = make_quartic_model(1.0, 0.0, 0.0, 0.0);
    CHECK(m.DpH(-2.0) == doctest::Approx(-8.0));
    CHECK(m.DpH_inverse(-8.0) == doctest::Approx(-2.0));
    CHECK(m.l0(1.0) == doctest::Approx(0.75));
    CHECK(m.l0_prime(8.0) == doctest::Approx(2.0));
    CHECK(m.l0_prime_inverse(2.0) == doctest::Approx(8.0));  // inverse of |a|^{1/3} sign(a)
    CHECK(m.u_bar(0.7) == doctest::Approx(0.0));
    CHECK(m.V(0.7) == doctest::Approx(0.7));
    CHECK(m.hamiltonian(0.0, 2.0) == doctest::Approx(4.0));  // |p|^4/4 - V
    CHECK(m.m_hat(1.0 / 1.2) == 0.0);
}

TEST_CASE("supply closed form") {
    const SupplySpec s = make_supply(4.0, -0.5, 5.0, 3.0, 1.0);
    CHECK(std::abs(s.Q(0.0) + 0.5) <= 1e-12);

    SUBCASE("zero forcing reduces to exponential decay") {
        const SupplySpec s0 = make_supply(4.0, -0.5, 0.0, 3.0, 1.0);
        for (int j = 0; j <= 10; ++j) {
            const double t = j / 10.0;
            CHECK(s0.Q(t) == doctest::Approx(-0.5 * std::exp(-4.0 * t)).epsilon(1e-12));
        }
    }

    SUBCASE("rk4 oracle agrees with the closed form") {
        auto rhs = [&](double t, const std::array<double, 1>& y) -> std::array<double, 1> {
            return {s.Qbar(t) - s.xi * y[0]};
        };
        const auto y = oracle::rk4<1>(rhs, {s.q0}, 0.0, 0.5, 50000);  // step 1e-5
        CHECK(std::abs(y[0] - s.Q(0.5)) <= 1e-9);
        // uniform agreement on [0, T]
        std::array<double, 1> yy{s.q0};
        const int per = 1000;
        for (int j = 1; j <= 100; ++j) {
            yy = oracle::rk4<1>(rhs, yy, (j - 1) / 100.0, j / 100.0, per);
            CHECK(std::abs(yy[0] - s.Q(j / 100.0)) <= 1e-8);
        }
    }

    SUBCASE("integrals agree with an rk4 route") {
        auto rhs = [&](double t, const std::array<double, 3>& y) -> std::array<double, 3> {
            return {s.Qbar(t) - s.xi * y[0], y[0], y[1]};  // (Q, IQ, int_0^t IQ)
        };
        std::array<double, 3> y{s.q0, 0.0, 0.0};
        const auto yT = oracle::rk4<3>(rhs, y, 0.0, 1.0, 20000);
        CHECK(std::abs(yT[1] - s.IQ(1.0)) <= 1e-9);
        for (int j = 0; j <= 10; ++j) {
            const double t = j / 10.0;
            const auto yt = oracle::rk4<3>(rhs, y, 0.0, std::max(t, 1e-12), 20000);
            CHECK(std::abs(yt[1] - s.IQ(t)) <= 1e-9);
            CHECK(std::abs((yT[2] - yt[2]) - s.IIQ(t)) <= 1e-8);
        }
    }

    CHECK_THROWS_AS(make_supply(0.0, -0.5, 5.0, 3.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(s.Q(1.5), std::domain_error);
    CHECK_THROWS_AS(s.Q(-0.1), std::domain_error);
}

TEST_CASE("initial density normalization") {
    const ModelSpec m = make_quadratic_model(1.0, 1.0, 0.25);
    const Grid grid(-1.0, 1.0, 1.0, 400, 100);  // rho = 0.005
    const auto mbar = normalize_initial_density(m, grid);

    double total = 0.0, first_moment = 0.0;
    for (int i = 0; i <= grid.M(); ++i) {
        total += mbar[i] * grid.rho();
        first_moment += grid.x(i) * mbar[i] * grid.rho();
    }
    CHECK(std::abs(total - 1.0) <= 1e-14);
    CHECK(std::abs(first_moment) <= 1e-12);  // even bump on a symmetric grid
    for (int i = 0; i <= grid.M(); ++i) {
        if (std::abs(grid.x(i)) >= 1.0 / 1.1) CHECK(mbar[i] == 0.0);
    }

    SUBCASE("support must sit inside the domain") {
        const Grid tight(-0.5, 0.5, 1.0, 10, 10);
        CHECK_THROWS_AS(normalize_initial_density(m, tight), std::invalid_argument);
    }

    SUBCASE("all-zero node samples are rejected") {
        ModelSpec narrow = m;
        narrow.support_radius = 0.4;
        narrow.m_hat = [](double x) { return std::abs(x - 0.33) < 1e-4 ? 1.0 : 0.0; };
        const Grid coarse(-1.0, 1.0, 1.0, 4, 2);  // nodes miss the pulse
        CHECK_THROWS_AS(normalize_initial_density(narrow, coarse), std::invalid_argument);
    }
}

TEST_CASE("supply sampling matches the price series length") {
    const SupplySpec s = make_supply(4.0, -0.5, 5.0, 3.0, 1.0);
    const Grid grid(-1.0, 1.0, 1.0, 10, 25);
    const auto q = sample_supply(s, grid);
    REQUIRE(static_cast<int>(q.size()) == grid.N());
    CHECK(q[0] == doctest::Approx(-0.5));
    CHECK(q[24] == doctest::Approx(s.Q(grid.t(24))));
}
