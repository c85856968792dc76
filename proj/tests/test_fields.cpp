#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "curvflow/fields.hpp"
#include "curvflow/poisson.hpp"

using namespace curvflow;

namespace {

Grid3 periodic_cube(int n, double length = 2.0 * M_PI) {
    const double h = length / n;
    return Grid3({n, n, n}, {h, h, h}, {0.0, 0.0, 0.0},
                 {Boundary::periodic, Boundary::periodic, Boundary::periodic});
}

Grid3 clamped_cube(int n, double lo, double hi) {
    const double h = (hi - lo) / (n - 1);
    return Grid3({n, n, n}, {h, h, h}, {lo, lo, lo},
                 {Boundary::clamped, Boundary::clamped, Boundary::clamped});
}

} // namespace

TEST_CASE("grid invariants", "[fields]") {
    CHECK_THROWS_AS(Grid3({4, 5, 5}, {0.1, 0.1, 0.1}, {0, 0, 0},
                          {Boundary::clamped, Boundary::clamped, Boundary::clamped}),
                    validation_error);
    CHECK_THROWS_AS(Grid3({5, 5, 5}, {0.1, -0.1, 0.1}, {0, 0, 0},
                          {Boundary::clamped, Boundary::clamped, Boundary::clamped}),
                    validation_error);
    const Grid3 g = clamped_cube(5, 0.0, 1.0);
    CHECK(g.node_count() == 125);
    CHECK(g.index(1, 2, 3) == 1 + 5 * (2 + 5 * 3)); // x1 fastest
}

TEST_CASE("partial_derivative is exact on linear fields", "[fields]") {
    const Grid3 g = clamped_cube(9, -1.0, 1.0);
    const ScalarField f = ScalarField::sample(g, [](double, double x2, double) { return 3.0 * x2 + 1.0; });
    const ScalarField d = partial_derivative(f, 2);
    double err = 0.0;
    for (double v : d.values) err = std::max(err, std::abs(v - 3.0));
    CHECK(err <= 1e-12);
}

TEST_CASE("partial_derivative of a constant is exactly zero", "[fields]") {
    const Grid3 g = clamped_cube(7, 0.0, 1.0);
    const ScalarField f(g, 4.25);
    for (int axis = 1; axis <= 3; ++axis) {
        const ScalarField d = partial_derivative(f, axis);
        CHECK(d.max_abs() == 0.0);
    }
}

TEST_CASE("partial_derivative second-order convergence on sin", "[fields]") {
    auto err_at = [](int n) {
        const Grid3 g = periodic_cube(n);
        const ScalarField f = ScalarField::sample(g, [](double x1, double, double) { return std::sin(x1); });
        const ScalarField d = partial_derivative(f, 1);
        double err = 0.0;
        std::size_t m = 0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i, ++m)
                    err = std::max(err, std::abs(d.values[m] - std::cos(g.coord(i, j, k)[0])));
        return err;
    };
    const double e32 = err_at(32), e64 = err_at(64);
    const double h32 = 2.0 * M_PI / 32.0;
    CHECK(e32 <= h32 * h32); // C <= 1
    CHECK(e64 <= e32 / 3.5);
}

TEST_CASE("partial_derivative order 4 on the clamped boundary", "[fields]") {
    // the order knob: quartic accuracy, exact on cubics including the edges
    const Grid3 g = clamped_cube(9, 0.0, 1.0);
    const ScalarField f = ScalarField::sample(g, [](double x, double, double) { return x * x * x; });
    const ScalarField d = partial_derivative(f, 1, 4);
    double err = 0.0;
    std::size_t m = 0;
    for (int k = 0; k < 9; ++k)
        for (int j = 0; j < 9; ++j)
            for (int i = 0; i < 9; ++i, ++m)
                err = std::max(err, std::abs(d.values[m] - 3.0 * g.coord(i, j, k)[0] * g.coord(i, j, k)[0]));
    CHECK(err <= 1e-12);
}

TEST_CASE("partial_derivative rejects non-finite input naming the node", "[fields]") {
    const Grid3 g = clamped_cube(5, 0.0, 1.0);
    ScalarField f(g, 1.0);
    f.at(2, 1, 3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH(partial_derivative(f, 1), Catch::Matchers::ContainsSubstring("(2,1,3)"));
}

TEST_CASE("mixed partials commute on smooth periodic data", "[fields]") {
    const Grid3 g = periodic_cube(24);
    const ScalarField f =
        ScalarField::sample(g, [](double x1, double x2, double) { return std::sin(x1) * std::sin(x2); });
    const ScalarField d12 = partial_derivative(partial_derivative(f, 1), 2);
    const ScalarField d21 = partial_derivative(partial_derivative(f, 2), 1);
    double err = 0.0;
    for (std::size_t n = 0; n < d12.values.size(); ++n)
        err = std::max(err, std::abs(d12.values[n] - d21.values[n]));
    CHECK(err <= 1e-12);
}

TEST_CASE("cumulative_integral trapezoid values", "[fields]") {
    SECTION("constant integrand is exact") {
        std::vector<double> ones(11, 1.0);
        const auto I = cumulative_integral(ones, 0.1);
        CHECK(I.front() == 0.0);
        CHECK(std::abs(I.back() - 1.0) <= 1e-14);
    }
    SECTION("linear integrand is exact") {
        std::vector<double> s(11);
        for (int k = 0; k <= 10; ++k) s[static_cast<std::size_t>(k)] = 0.1 * k;
        const auto I = cumulative_integral(s, 0.1);
        CHECK(std::abs(I.back() - 0.5) <= 1e-14);
    }
    SECTION("quadratic integrand: h^2/6 error, bounded by h^2/2") {
        const int n = 41;
        const double h = 1.0 / (n - 1);
        std::vector<double> s2(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) s2[static_cast<std::size_t>(k)] = (h * k) * (h * k);
        const auto I = cumulative_integral(s2, h);
        const double err = std::abs(I.back() - 1.0 / 3.0);
        CHECK(err <= h * h / 2.0);
        CHECK(err == Catch::Approx(h * h / 6.0).epsilon(0.05));
    }
    SECTION("monotone for nonnegative integrands") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> dist(0.0, 3.0);
        std::vector<double> s(50);
        for (auto& v : s) v = dist(rng);
        const auto I = cumulative_integral(s, 0.05);
        for (std::size_t k = 1; k < I.size(); ++k) CHECK(I[k] >= I[k - 1]);
    }
    SECTION("rejects fewer than 2 samples") {
        std::vector<double> one(1, 1.0);
        CHECK_THROWS_AS(cumulative_integral(one, 0.1), validation_error);
    }
}

TEST_CASE("pressure poisson: zero and shear velocities give zero pressure", "[fields][poisson]") {
    const Grid3 g = periodic_cube(16);
    SECTION("u = 0") {
        const VectorField u(g);
        const PoissonResult r = solve_pressure_poisson(u);
        CHECK(r.pressure.max_abs() == 0.0);
    }
    SECTION("shear u1(x3)") {
        VectorField u(g);
        u[1] = ScalarField::sample(g, [](double, double, double x3) { return std::sin(x3) + 2.0; });
        const PoissonResult r = solve_pressure_poisson(u);
        // only d11(u1^2) could contribute and u1 is independent of x1
        CHECK(momentum_flux_rhs(u).max_abs() == 0.0);
        CHECK(r.pressure.max_abs() <= 1e-10);
    }
}

TEST_CASE("pressure poisson: Taylor-Green manufactured solution", "[fields][poisson]") {
    auto solve_err = [](int n) {
        const Grid3 g = periodic_cube(n);
        VectorField u(g);
        u[1] = ScalarField::sample(g, [](double x1, double x2, double) { return std::sin(x1) * std::cos(x2); });
        u[2] = ScalarField::sample(g, [](double x1, double x2, double) { return -std::cos(x1) * std::sin(x2); });
        const PoissonResult r = solve_pressure_poisson(u);
        const ScalarField exact = ScalarField::sample(
            g, [](double x1, double x2, double) { return -(std::cos(2.0 * x1) + std::cos(2.0 * x2)) / 4.0; });
        double err = 0.0;
        for (std::size_t m = 0; m < exact.values.size(); ++m)
            err = std::max(err, std::abs(r.pressure.values[m] - exact.values[m]));
        return std::pair<double, PoissonResult>(err, r);
    };
    const auto [e16, r16] = solve_err(16);
    const auto [e32, r32] = solve_err(32);
    CHECK(e32 <= e16 / 3.5);
    CHECK(r32.max_norm_residual <= 1e-10 * std::max(1.0, 4.0)); // rhs scale ~ 2
    CHECK(std::abs(r32.pressure.mean()) <= 1e-13);
}

TEST_CASE("pressure poisson: gauge invariance under constant velocity shift", "[fields][poisson]") {
    const Grid3 g = periodic_cube(16);
    VectorField u(g);
    u[1] = ScalarField::sample(g, [](double x1, double x2, double) { return std::sin(x1) * std::cos(x2); });
    u[2] = ScalarField::sample(g, [](double x1, double x2, double) { return -std::cos(x1) * std::sin(x2); });
    VectorField shifted = u;
    for (double& v : shifted[1].values) v += 2.5;
    const ScalarField p0 = solve_pressure_poisson(u).pressure;
    const ScalarField p1 = solve_pressure_poisson(shifted).pressure;
    double diff = 0.0;
    for (std::size_t n = 0; n < p0.values.size(); ++n)
        diff = std::max(diff, std::abs(p0.values[n] - p1.values[n]));
    CHECK(diff <= 1e-8);
}

TEST_CASE("pressure poisson error paths", "[fields][poisson]") {
    const Grid3 g = periodic_cube(8);
    SECTION("nonzero-mean rhs is incompatible") {
        const ScalarField rhs(g, 1.0);
        CHECK_THROWS_AS(solve_periodic_poisson(rhs), validation_error);
    }
    SECTION("iteration cap produces a numeric error with the residual") {
        const ScalarField rhs = ScalarField::sample(
            g, [](double x1, double x2, double) { return std::cos(2.0 * x1) + std::cos(3.0 * x2); });
        CHECK_THROWS_AS(solve_periodic_poisson(rhs, 1e-10, 2), numeric_error);
    }
    SECTION("clamped grids are rejected") {
        const Grid3 c = clamped_cube(8, 0.0, 1.0);
        CHECK_THROWS_AS(solve_pressure_poisson(VectorField(c)), validation_error);
    }
}
