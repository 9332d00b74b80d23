#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchfem/sparse.hpp"

namespace forchfem {

struct SolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems. Converges when
/// ||b - A x|| / ||b|| <= tol; throws SolveFailure past the 10*n iteration cap.
inline CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b, double tol) {
    const int n = A.rows();
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("cg_solve: size mismatch");

    CgResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);
    if (n == 0) return res;

    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return res;   // x = 0 solves exactly

    std::vector<double> dinv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double d = A.coeff(i, i);
        dinv[static_cast<std::size_t>(i)] = (d != 0.0) ? 1.0 / d : 1.0;
    }

    std::vector<double> r = b;
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = dinv[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    std::vector<double> p = z;
    std::vector<double> Ap(static_cast<std::size_t>(n));

    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];

    const int max_iters = 10 * n;
    double rnorm = bnorm;
    for (int it = 1; it <= max_iters; ++it) {
        A.multiply(p, Ap);
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += p[static_cast<std::size_t>(i)] * Ap[static_cast<std::size_t>(i)];
        if (!(pAp > 0.0))
            throw SolveFailure("cg_solve: matrix not positive definite (p'Ap = " + std::to_string(pAp) + ")");
        const double alpha = rz / pAp;
        rnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            res.x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(i)] -= alpha * Ap[static_cast<std::size_t>(i)];
            rnorm += r[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
        }
        rnorm = std::sqrt(rnorm);
        if (rnorm <= tol * bnorm) {
            res.iterations = it;
            res.relative_residual = rnorm / bnorm;
            return res;
        }
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) {
            z[static_cast<std::size_t>(i)] = dinv[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
            rz_new += r[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    }
    throw SolveFailure("cg_solve: iteration cap " + std::to_string(max_iters) +
                       " exceeded, relative residual " + std::to_string(rnorm / bnorm));
}

} // namespace forchfem
