#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace forchfem {

/// Generalized polynomial g(s) = a_0 s^{alpha_0} + a_1 s^{alpha_1} + ... + a_N s^{alpha_N}
/// with alpha_0 = 0 < alpha_1 < ... < alpha_N, a_0 > 0, a_N > 0 and all a_i >= 0.
/// s * g(s) is strictly increasing on [0, inf), which makes the inversion in
/// solve_s well posed.
class GPolynomial {
public:
    GPolynomial(std::vector<double> exponents, std::vector<double> coefficients)
        : exponents_(std::move(exponents)), coefficients_(std::move(coefficients)) {
        if (exponents_.size() != coefficients_.size())
            throw std::invalid_argument("GPolynomial: exponent/coefficient lists differ in length");
        if (exponents_.size() < 2)
            throw std::invalid_argument("GPolynomial: need at least two terms (N >= 1)");
        if (exponents_.front() != 0.0)
            throw std::invalid_argument("GPolynomial: leading exponent must be 0");
        for (std::size_t i = 1; i < exponents_.size(); ++i)
            if (!(exponents_[i] > exponents_[i - 1]))
                throw std::invalid_argument("GPolynomial: exponents must be strictly increasing");
        if (!(coefficients_.front() > 0.0))
            throw std::invalid_argument("GPolynomial: a_0 must be positive");
        if (!(coefficients_.back() > 0.0))
            throw std::invalid_argument("GPolynomial: a_N must be positive");
        for (double c : coefficients_)
            if (c < 0.0) throw std::invalid_argument("GPolynomial: coefficients must be nonnegative");

        // integer fast path for the common two/three-term laws
        int_exponents_.resize(exponents_.size(), -1);
        for (std::size_t i = 0; i < exponents_.size(); ++i) {
            const double e = exponents_[i];
            if (e == std::floor(e) && e >= 0.0 && e <= 16.0) int_exponents_[i] = static_cast<int>(e);
        }
    }

    /// g(s); throws on negative argument.
    double operator()(double s) const {
        if (s < 0.0) throw std::domain_error("GPolynomial: negative argument s = " + std::to_string(s));
        double r = 0.0;
        for (std::size_t i = 0; i < coefficients_.size(); ++i)
            r += coefficients_[i] * power(s, i);
        return r;
    }

    /// s * g'(s) = sum_{i>=1} a_i alpha_i s^{alpha_i}. Finite at s = 0 for any
    /// admissible exponent set, unlike g'(s) itself.
    double s_times_dg(double s) const {
        double r = 0.0;
        for (std::size_t i = 1; i < coefficients_.size(); ++i)
            r += coefficients_[i] * exponents_[i] * power(s, i);
        return r;
    }

    double degree() const { return exponents_.back(); }
    double a0() const { return coefficients_.front(); }
    std::size_t terms() const { return coefficients_.size(); }
    const std::vector<double>& exponents() const { return exponents_; }
    const std::vector<double>& coefficients() const { return coefficients_; }

private:
    double power(double s, std::size_t i) const {
        const int n = int_exponents_[i];
        if (n < 0) return std::pow(s, exponents_[i]);
        double r = 1.0, b = s;
        for (int k = n; k > 0; k >>= 1) {
            if (k & 1) r *= b;
            b *= b;
        }
        return r;
    }

    std::vector<double> exponents_;
    std::vector<double> coefficients_;
    std::vector<int> int_exponents_;
};

inline double gpoly_eval(const GPolynomial& g, double s) { return g(s); }

/// Inverts s*g(s) = xi for the unique nonnegative root. Safeguarded Newton on
/// phi(s) = s*g(s) - xi over the bracket [0, max(1, xi/a_0)]; bisection kicks in
/// whenever the Newton step leaves the bracket or stops making progress.
/// Terminates with |s*g(s) - xi| <= 1e-13 * max(1, xi).
inline double solve_s(const GPolynomial& g, double xi) {
    if (xi < 0.0) throw std::domain_error("solve_s: negative xi = " + std::to_string(xi));
    if (xi == 0.0) return 0.0;

    const double tol = 1e-13 * std::max(1.0, xi);
    double lo = 0.0;                               // phi(lo) = -xi < 0
    double hi = std::max(1.0, xi / g.a0());        // s*g(s) >= a_0*s, so the root is <= xi/a_0

    // initial guess with the right asymptotics at xi -> 0 and xi -> inf
    double s = xi / g(std::pow(xi, 1.0 / (g.degree() + 1.0)));
    s = std::clamp(s, lo, hi);

    double phi = s * g(s) - xi;
    double step_prev = hi - lo;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(phi) <= tol) return s;
        if (phi > 0.0) hi = s; else lo = s;

        const double dphi = g(s) + g.s_times_dg(s);   // phi'(s) > 0
        double step = phi / dphi;
        double snext = s - step;
        if (!(snext > lo) || !(snext < hi) || std::abs(step) > 0.5 * step_prev) {
            snext = 0.5 * (lo + hi);
            step = s - snext;
        }
        step_prev = std::abs(step);
        s = snext;
        phi = s * g(s) - xi;
    }
    throw std::runtime_error("solve_s: no convergence after 200 iterations (xi = " +
                             std::to_string(xi) + ")");
}

/// K(xi) = 1 / g(s(xi)), the scalar diffusivity. Decreasing, with range (0, 1/a_0].
inline double kfun(const GPolynomial& g, double xi) {
    return 1.0 / g(solve_s(g, xi));
}

/// dK/dxi by implicit differentiation of s*g(s) = xi:
///   s'(xi) = 1 / (g(s) + s g'(s)),   K'(xi) = -g'(s) s'(xi) / g(s)^2.
/// Satisfies -a K(xi) <= K'(xi) xi <= 0.
inline double kfun_deriv(const GPolynomial& g, double xi) {
    if (!(xi > 0.0)) throw std::domain_error("kfun_deriv: requires xi > 0");
    const double s = solve_s(g, xi);     // > 0 since xi > 0
    const double gs = g(s);
    const double sdg = g.s_times_dg(s);  // s g'(s)
    return -(sdg / s) / (gs * gs * (gs + sdg));
}

namespace detail {

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

} // namespace detail

/// H(xi) = integral of K(sqrt(u)) du over [0, xi^2]. The substitution u = v^2
/// turns the integrand into 2 v K(v) on [0, xi], which is smooth at the origin;
/// adaptive Simpson then resolves it to relative tolerance 1e-10.
/// Satisfies the sandwich K(xi) xi^2 <= H(xi) <= 2 K(xi) xi^2.
inline double hfun(const GPolynomial& g, double xi) {
    if (xi < 0.0) throw std::domain_error("hfun: negative xi = " + std::to_string(xi));
    if (xi == 0.0) return 0.0;
    const auto f = [&g](double v) { return 2.0 * v * kfun(g, v); };
    const double fa = 0.0, fm = f(0.5 * xi), fb = f(xi);
    const double whole = xi / 6.0 * (fa + 4.0 * fm + fb);
    const double eps = 1e-10 * std::max(std::abs(whole), std::numeric_limits<double>::min());
    return detail::adaptive_simpson(f, 0.0, xi, fa, fm, fb, whole, eps, 48);
}

/// Exponents derived from deg(g): a = deg/(deg+1), beta = 2-a,
/// lambda = beta/(beta-1), gamma = a/beta, plus the degree condition
/// deg(g) <= 4/(d-2) (vacuous in two dimensions).
struct Exponents {
    double a;
    double beta;
    double lambda;
    double gamma;
    double degree;
    bool degree_condition;
};

inline Exponents exponents(const GPolynomial& g, int dim = 2) {
    if (dim < 2) throw std::invalid_argument("exponents: dimension must be >= 2");
    Exponents e{};
    e.degree = g.degree();
    e.a = e.degree / (e.degree + 1.0);
    e.beta = 2.0 - e.a;
    e.lambda = e.beta / (e.beta - 1.0);
    e.gamma = e.a / e.beta;
    e.degree_condition = (dim == 2) || (e.degree <= 4.0 / (dim - 2));
    return e;
}

} // namespace forchfem
