#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "forchfem/config.hpp"
#include "forchfem/core.hpp"
#include "forchfem/forchheimer.hpp"

namespace forchfem {

/// Initial boundary value problem data on the unit square. `exact` and
/// `exact_gradient` are present for manufactured problems only.
struct Problem {
    std::string name;
    GPolynomial g = GPolynomial({0.0, 1.0}, {1.0, 1.0});   // two-term law unless overridden
    std::function<double(Vec2, double)> forcing;   // f(x, t)
    std::function<double(Vec2, double)> boundary;  // psi(x, t) on the boundary
    std::function<double(Vec2)> initial;           // rho^0(x)
    std::function<double(Vec2, double)> exact;     // may be empty
    std::function<Vec2(Vec2, double)> exact_gradient;

    bool has_exact() const { return static_cast<bool>(exact); }
};

/// Manufactured solution rho = e^{-2t} x(1-x) y(1-y) with the two-term law
/// g = 1 + s. Zero boundary data. The forcing below is the closed form of
/// rho_t - div(K(|grad rho|) grad rho); where the gradient magnitude w(x)
/// vanishes (center and corners) the quotient terms are evaluated as their
/// limit 0.
inline Problem example1() {
    Problem p;
    p.name = "example1";
    p.g = GPolynomial({0.0, 1.0}, {1.0, 1.0});
    p.exact = [](Vec2 x, double t) {
        return std::exp(-2.0 * t) * x.x * (1.0 - x.x) * x.y * (1.0 - x.y);
    };
    p.exact_gradient = [](Vec2 x, double t) -> Vec2 {
        const double e = std::exp(-2.0 * t);
        return {e * (1.0 - 2.0 * x.x) * x.y * (1.0 - x.y),
                e * x.x * (1.0 - x.x) * (1.0 - 2.0 * x.y)};
    };
    p.initial = [](Vec2 x) { return x.x * (1.0 - x.x) * x.y * (1.0 - x.y); };
    p.boundary = [](Vec2, double) { return 0.0; };
    p.forcing = [](Vec2 x, double t) {
        const double x1 = x.x, x2 = x.y;
        const double e = std::exp(-2.0 * t);
        const double u1 = x1 * (1.0 - x1), u2 = x2 * (1.0 - x2);
        const double d1 = 1.0 - 2.0 * x1, d2 = 1.0 - 2.0 * x2;
        const double w = std::sqrt(u2 * d1 * (u2 * d1) + u1 * d2 * (u1 * d2));
        const double root = std::sqrt(1.0 + 4.0 * e * w);

        double f = -2.0 * e * u1 * u2;                       // rho_t
        f += 4.0 * e * (u2 + u1) / (1.0 + root);             // -K * laplacian

        if (w > 1e-14) {
            const double denom = w * root * (1.0 + root) * (1.0 + root);
            const double e2 = std::exp(-4.0 * t);
            const double b1 = 2.0 * x1 * (1.0 - x1) * (1.0 - x1) * d2 * d2 -
                              2.0 * x1 * x1 * (1.0 - x1) * d2 * d2 -
                              4.0 * x2 * x2 * (1.0 - x2) * (1.0 - x2) * d1;
            const double b2 = 2.0 * x2 * (1.0 - x2) * (1.0 - x2) * d1 * d1 -
                              2.0 * x2 * x2 * (1.0 - x2) * d1 * d1 -
                              4.0 * x1 * x1 * (1.0 - x1) * (1.0 - x1) * d2;
            f += 2.0 * e2 * u2 * d1 * b1 / denom;
            f += 2.0 * e2 * u1 * d2 * b2 / denom;
        }
        return f;
    };
    return p;
}

/// Manufactured solution rho = e^{1-t} (x1^2 + x2^2) with g = 1 + s and
/// nonzero Dirichlet data given edge by edge. The quotient term in the forcing
/// vanishes in the limit z -> 0 (corner at the origin).
inline Problem example2() {
    Problem p;
    p.name = "example2";
    p.g = GPolynomial({0.0, 1.0}, {1.0, 1.0});
    p.exact = [](Vec2 x, double t) { return std::exp(1.0 - t) * (x.x * x.x + x.y * x.y); };
    p.exact_gradient = [](Vec2 x, double t) -> Vec2 {
        const double e = std::exp(1.0 - t);
        return {2.0 * e * x.x, 2.0 * e * x.y};
    };
    p.initial = [](Vec2 x) { return std::exp(1.0) * (x.x * x.x + x.y * x.y); };
    p.boundary = [](Vec2 x, double t) {
        const double e = std::exp(1.0 - t);
        const double tol = 1e-12;
        if (std::abs(x.x) < tol) return e * x.y * x.y;
        if (std::abs(x.x - 1.0) < tol) return e * (1.0 + x.y * x.y);
        if (std::abs(x.y - 1.0) < tol) return e * (1.0 + x.x * x.x);
        if (std::abs(x.y) < tol) return e * x.x * x.x;
        throw std::domain_error("example2: boundary data evaluated off the boundary");
    };
    p.forcing = [](Vec2 x, double t) {
        const double e = std::exp(1.0 - t);
        const double z = x.x * x.x + x.y * x.y;
        const double sz = std::sqrt(z);
        const double root = std::sqrt(1.0 + 8.0 * e * sz);
        double f = -e * z;
        if (sz > 1e-14)
            f += 16.0 * e * e * z / (sz * root * (1.0 + root) * (1.0 + root));
        f -= 8.0 * e / (1.0 + root);
        return f;
    };
    return p;
}

/// Zero forcing and zero boundary data; the initial field is supplied by the
/// caller (stability studies start from a random or tabulated field).
inline Problem homogeneous_problem(GPolynomial g) {
    Problem p;
    p.name = "homogeneous";
    p.g = std::move(g);
    p.forcing = [](Vec2, double) { return 0.0; };
    p.boundary = [](Vec2, double) { return 0.0; };
    p.initial = [](Vec2) { return 0.0; };
    return p;
}

/// Checks that boundary and initial data agree with the trace/restriction of
/// the exact solution by random sampling; throws with the failing sample point.
inline void validate_problem(const Problem& p, int samples = 100, double tol = 1e-12,
                             unsigned seed = 20260811u) {
    if (!p.has_exact()) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < samples; ++k) {
        // boundary sample: random edge, random coordinate, random time in [0, 2]
        const int edge = static_cast<int>(rng() % 4);
        const double c = uni(rng);
        Vec2 x;
        switch (edge) {
            case 0: x = {0.0, c}; break;
            case 1: x = {1.0, c}; break;
            case 2: x = {c, 0.0}; break;
            default: x = {c, 1.0}; break;
        }
        const double t = 2.0 * uni(rng);
        const double psi = p.boundary(x, t);
        const double ex = p.exact(x, t);
        if (std::abs(psi - ex) > tol)
            throw std::invalid_argument(p.name + ": boundary data disagrees with exact trace at (" +
                                        std::to_string(x.x) + ", " + std::to_string(x.y) +
                                        "), t = " + std::to_string(t) + ": psi = " + std::to_string(psi) +
                                        ", exact = " + std::to_string(ex));
        // interior sample for the initial data
        const Vec2 xi{uni(rng), uni(rng)};
        const double r0 = p.initial(xi);
        const double ex0 = p.exact(xi, 0.0);
        if (std::abs(r0 - ex0) > tol)
            throw std::invalid_argument(p.name + ": initial data disagrees with exact at (" +
                                        std::to_string(xi.x) + ", " + std::to_string(xi.y) +
                                        "): rho0 = " + std::to_string(r0) +
                                        ", exact = " + std::to_string(ex0));
    }
}

/// Builds a Problem from configuration text. `example` selects 1, 2 or
/// `homogeneous`; the homogeneous problem accepts `alphas`/`coeffs` arrays for
/// its Forchheimer law.
inline Problem load_problem(const Config& cfg) {
    const std::string which = cfg.has("example") ? cfg.get_string("example") : "homogeneous";
    if (which == "1") {
        if (cfg.has("alphas") || cfg.has("coeffs"))
            throw std::invalid_argument("load_problem: example 1 fixes g = 1 + s; "
                                        "remove the alphas/coeffs keys");
        Problem p = example1();
        validate_problem(p);
        return p;
    }
    if (which == "2") {
        if (cfg.has("alphas") || cfg.has("coeffs"))
            throw std::invalid_argument("load_problem: example 2 fixes g = 1 + s; "
                                        "remove the alphas/coeffs keys");
        Problem p = example2();
        validate_problem(p);
        return p;
    }
    if (which == "homogeneous" || which == "hom") {
        std::vector<double> alphas{0.0, 1.0}, coeffs{1.0, 1.0};
        if (cfg.has("alphas")) alphas = cfg.get_list("alphas");
        if (cfg.has("coeffs")) coeffs = cfg.get_list("coeffs");
        return homogeneous_problem(GPolynomial(alphas, coeffs));
    }
    throw std::invalid_argument("load_problem: unknown example '" + which + "'");
}

} // namespace forchfem
