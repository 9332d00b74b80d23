#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "forchfem/forchheimer.hpp"

namespace testsupport {

/// Random admissible Forchheimer law: alpha_0 = 0 plus 1..4 strictly
/// increasing exponents in (0.1, 5], positive leading/trailing coefficients.
inline forchfem::GPolynomial random_gpoly(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(1, 4);
    std::uniform_real_distribution<double> expo(0.1, 5.0);
    std::uniform_real_distribution<double> coef(0.2, 5.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const int n = nterms(rng);
    std::vector<double> alphas{0.0};
    for (int i = 0; i < n; ++i) alphas.push_back(expo(rng));
    std::sort(alphas.begin(), alphas.end());
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (alphas[i] - alphas[i - 1] < 1e-3) alphas[i] = alphas[i - 1] + 1e-3;

    std::vector<double> coeffs;
    coeffs.push_back(coef(rng));
    for (int i = 0; i < n - 1; ++i) coeffs.push_back(uni(rng) < 0.25 ? 0.0 : coef(rng));
    coeffs.push_back(coef(rng));
    return forchfem::GPolynomial(alphas, coeffs);
}

/// Eigenvalues of a symmetric dense matrix by cyclic Jacobi rotations
/// (oracle-grade, for tiny systems only).
inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Composite Simpson with a fixed panel count (brute-force quadrature oracle).
template <class F>
double composite_simpson(const F& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

} // namespace testsupport
