#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "forchfem/config.hpp"
#include "forchfem/problems.hpp"

using namespace forchfem;

namespace {

// independent PDE-residual oracle: f should equal rho_t - div(K(|grad rho|) grad rho).
// rho_t and grad rho are analytic; only the divergence of the flux is taken by
// fourth-order central differences, with the closed-form K of the two-term law.
double closed_k(double xi) { return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * xi)); }

template <class Grad>
double divergence_fd(const Grad& grad, Vec2 x, double t, double delta) {
    const auto flux = [&](Vec2 p, int comp) {
        const Vec2 g = grad(p, t);
        const double k = closed_k(norm(g));
        return comp == 0 ? k * g.x : k * g.y;
    };
    const auto d4 = [&](int comp, Vec2 e) {
        const Vec2 x1{x.x + e.x * delta, x.y + e.y * delta};
        const Vec2 x2{x.x + 2.0 * e.x * delta, x.y + 2.0 * e.y * delta};
        const Vec2 xm1{x.x - e.x * delta, x.y - e.y * delta};
        const Vec2 xm2{x.x - 2.0 * e.x * delta, x.y - 2.0 * e.y * delta};
        return (-flux(x2, comp) + 8.0 * flux(x1, comp) - 8.0 * flux(xm1, comp) + flux(xm2, comp)) /
               (12.0 * delta);
    };
    return d4(0, {1.0, 0.0}) + d4(1, {0.0, 1.0});
}

template <class Exact>
double time_derivative_fd(const Exact& exact, Vec2 x, double t, double delta) {
    return (-exact(x, t + 2.0 * delta) + 8.0 * exact(x, t + delta) - 8.0 * exact(x, t - delta) +
            exact(x, t - 2.0 * delta)) /
           (12.0 * delta);
}

} // namespace

TEST_CASE("example 1 data") {
    const Problem p = example1();
    CHECK_THAT(p.exact({0.5, 0.5}, 0.0), Catch::Matchers::WithinAbs(1.0 / 16.0, 1e-15));
    CHECK_THAT(p.initial({0.5, 0.5}), Catch::Matchers::WithinAbs(1.0 / 16.0, 1e-15));

    // psi vanishes on all four edges
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double c = uni(rng), t = 2.0 * uni(rng);
        CHECK(p.boundary({0.0, c}, t) == 0.0);
        CHECK(p.boundary({1.0, c}, t) == 0.0);
        CHECK(p.boundary({c, 0.0}, t) == 0.0);
        CHECK(p.boundary({c, 1.0}, t) == 0.0);
    }
    CHECK_NOTHROW(validate_problem(p));
}

TEST_CASE("example 1 forcing passes the PDE-residual oracle") {
    const Problem p = example1();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    for (double t : {0.1, 0.5}) {
        int accepted = 0;
        while (accepted < 20) {
            const Vec2 x{uni(rng), uni(rng)};
            // keep the FD stencil away from the gradient-degenerate center lines
            if (std::abs(x.x - 0.5) < 0.05 || std::abs(x.y - 0.5) < 0.05) continue;
            ++accepted;
            const double f_oracle = time_derivative_fd(p.exact, x, t, 1e-3) -
                                    divergence_fd(p.exact_gradient, x, t, 1e-3);
            REQUIRE_THAT(p.forcing(x, t), Catch::Matchers::WithinAbs(f_oracle, 1e-5));
        }
    }
}

TEST_CASE("example 1 forcing is finite where the gradient degenerates") {
    const Problem p = example1();
    for (double t : {0.0, 0.3, 1.0}) {
        // at the center w(x) = 0; the quotient terms take their limit 0 and
        // f = e^{-2t}(1 - 1/8) remains
        const double f = p.forcing({0.5, 0.5}, t);
        CHECK(std::isfinite(f));
        CHECK_THAT(f, Catch::Matchers::WithinAbs(std::exp(-2.0 * t) * 7.0 / 8.0, 1e-12));
        CHECK(std::isfinite(p.forcing({0.0, 0.0}, t)));
        CHECK(std::isfinite(p.forcing({1.0, 1.0}, t)));
    }
}

TEST_CASE("example 2 data") {
    const Problem p = example2();
    CHECK_THAT(p.exact({1.0, 1.0}, 1.0), Catch::Matchers::WithinAbs(2.0, 1e-14));
    CHECK_THAT(p.initial({1.0, 0.0}), Catch::Matchers::WithinAbs(std::exp(1.0), 1e-14));

    // the four printed boundary pieces against the exact trace
    CHECK_NOTHROW(validate_problem(p));
    CHECK_THROWS_AS(p.boundary({0.5, 0.5}, 0.0), std::domain_error);
}

TEST_CASE("example 2 forcing passes the PDE-residual oracle") {
    const Problem p = example2();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    for (double t : {0.1, 0.5}) {
        for (int k = 0; k < 20; ++k) {
            const Vec2 x{uni(rng), uni(rng)};
            const double f_oracle = time_derivative_fd(p.exact, x, t, 1e-3) -
                                    divergence_fd(p.exact_gradient, x, t, 1e-3);
            REQUIRE_THAT(p.forcing(x, t), Catch::Matchers::WithinAbs(f_oracle, 1e-5));
        }
    }
    // corner z = 0: quotient term takes its limit
    CHECK(std::isfinite(p.forcing({0.0, 0.0}, 0.5)));
}

TEST_CASE("problem validation reports the failing sample") {
    Problem broken = example1();
    broken.initial = [](Vec2 x) { return x.x; };   // disagrees with exact(., 0)
    CHECK_THROWS_MATCHES(validate_problem(broken), std::invalid_argument,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("initial data disagrees")));

    Problem bad_bc = example2();
    bad_bc.boundary = [](Vec2, double) { return 0.0; };
    CHECK_THROWS_MATCHES(validate_problem(bad_bc), std::invalid_argument,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("boundary data disagrees")));
}

TEST_CASE("load_problem from configuration text") {
    CHECK(load_problem(Config::parse_string("example = 1")).name == "example1");
    CHECK(load_problem(Config::parse_string("example = 2\nT = 10")).name == "example2");

    const Problem hom = load_problem(Config::parse_string(
        "example = homogeneous\nalphas = [0, 1, 2]\ncoeffs = [1, 0.5, 1]"));
    CHECK(hom.g.degree() == 2.0);

    // malformed law: a_0 = 0 violates the type invariant
    CHECK_THROWS_AS(load_problem(Config::parse_string(
                        "example = homogeneous\nalphas = [0, 1]\ncoeffs = [0, 1]")),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_problem(Config::parse_string("example = 3")), std::invalid_argument);
    CHECK_THROWS_AS(load_problem(Config::parse_string("example = 1\nalphas = [0, 1]\ncoeffs = [1, 1]")),
                    std::invalid_argument);
}
