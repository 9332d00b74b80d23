#pragma once

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchfem/fem.hpp"
#include "forchfem/forchheimer.hpp"
#include "forchfem/mesh.hpp"
#include "forchfem/quadrature.hpp"
#include "forchfem/solver.hpp"

namespace forchfem {

/// ||u_h - exact(.,t)||_{L2} by per-element quadrature.
template <class Exact>
double error_l2(const Mesh& mesh, const ScalarField& u, Exact&& exact, double t,
                std::span<const TriQuadPoint> rule = triangle_rule_degree4()) {
    check_field(mesh, u, "error_l2");
    double s = 0.0;
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const auto& tri = mesh.triangles[e];
        const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
        const double v0 = u.values[static_cast<std::size_t>(tri[0])];
        const double v1 = u.values[static_cast<std::size_t>(tri[1])];
        const double v2 = u.values[static_cast<std::size_t>(tri[2])];
        for (const TriQuadPoint& qp : rule) {
            const Vec2 x = qp.l0 * p0 + qp.l1 * p1 + qp.l2 * p2;
            const double uh = qp.l0 * v0 + qp.l1 * v1 + qp.l2 * v2;
            const double d = uh - exact(x, t);
            s += geo.area * qp.w * d * d;
        }
    }
    return std::sqrt(s);
}

/// ||grad u_h - grad exact(.,t)||_{0,beta}; the discrete gradient is constant
/// per element, the exact gradient is sampled at the quadrature points.
template <class ExactGrad>
double error_grad_lbeta(const Mesh& mesh, const ScalarField& u, ExactGrad&& exact_grad, double t,
                        double beta, std::span<const TriQuadPoint> rule = triangle_rule_degree4()) {
    check_field(mesh, u, "error_grad_lbeta");
    double s = 0.0;
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const auto& tri = mesh.triangles[e];
        const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
        const Vec2 gh = element_gradient(mesh, u.values, e);
        for (const TriQuadPoint& qp : rule) {
            const Vec2 x = qp.l0 * p0 + qp.l1 * p1 + qp.l2 * p2;
            s += geo.area * qp.w * std::pow(norm(gh - exact_grad(x, t)), beta);
        }
    }
    return std::pow(s, 1.0 / beta);
}

/// Approximate sup-norm: max of |u_h - exact| over a 3x3 sample grid per
/// element (the P1 max error need not sit at the nodes).
template <class Exact>
double error_linf(const Mesh& mesh, const ScalarField& u, Exact&& exact, double t) {
    check_field(mesh, u, "error_linf");
    constexpr double samples[3] = {1.0 / 6.0, 0.5, 5.0 / 6.0};
    double best = 0.0;
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const auto& tri = mesh.triangles[e];
        const Vec2 p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
        const double v0 = u.values[static_cast<std::size_t>(tri[0])];
        const double v1 = u.values[static_cast<std::size_t>(tri[1])];
        const double v2 = u.values[static_cast<std::size_t>(tri[2])];
        for (double a : samples)
            for (double b : samples) {
                double l1 = a, l2 = b;
                if (l1 + l2 > 1.0) { l1 = 1.0 - l1; l2 = 1.0 - l2; }   // fold into the triangle
                const double l0 = 1.0 - l1 - l2;
                const Vec2 x = l0 * p0 + l1 * p1 + l2 * p2;
                const double uh = l0 * v0 + l1 * v1 + l2 * v2;
                best = std::max(best, std::abs(uh - exact(x, t)));
            }
    }
    return best;
}

/// One refinement level of a convergence study.
struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    double err_l2 = 0.0;
    std::optional<double> rate_l2;
    double err_grad = 0.0;
    std::optional<double> rate_grad;
    double err_linf = 0.0;
};

struct ErrorSample {
    int n = 0;
    double err_l2 = 0.0;
    double err_grad = 0.0;
    double err_linf = 0.0;
};

/// Rates via log2 of successive error ratios; requires strictly doubling N.
inline std::vector<ConvergenceRow> convergence_table(const std::vector<ErrorSample>& samples) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0 && samples[i].n != 2 * samples[i - 1].n)
            throw std::invalid_argument("convergence_table: N must double between rows (" +
                                        std::to_string(samples[i - 1].n) + " -> " +
                                        std::to_string(samples[i].n) + ")");
        ConvergenceRow r;
        r.n = samples[i].n;
        r.h = 1.0 / samples[i].n;
        r.err_l2 = samples[i].err_l2;
        r.err_grad = samples[i].err_grad;
        r.err_linf = samples[i].err_linf;
        if (i > 0) {
            r.rate_l2 = std::log2(samples[i - 1].err_l2 / samples[i].err_l2);
            r.rate_grad = std::log2(samples[i - 1].err_grad / samples[i].err_grad);
        }
        rows.push_back(r);
    }
    return rows;
}

namespace detail {

inline std::string fmt6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

} // namespace detail

/// CSV with 6 significant digits, one row per refinement level.
inline void write_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "N,h,err_l2,rate_l2,err_gradbeta,rate_gradbeta,err_linf\n";
    for (const ConvergenceRow& r : rows) {
        os << r.n << ',' << detail::fmt6(r.h) << ',' << detail::fmt6(r.err_l2) << ',';
        if (r.rate_l2) os << detail::fmt6(*r.rate_l2);
        os << ',' << detail::fmt6(r.err_grad) << ',';
        if (r.rate_grad) os << detail::fmt6(*r.rate_grad);
        os << ',' << detail::fmt6(r.err_linf) << '\n';
    }
}

/// Per-step energy quantities of a trajectory: the gradient norm, the
/// degeneracy weight omega = (1 + ||grad rho_h||_{0,beta})^{-a} and the
/// interior L2 norm.
struct EnergyPoint {
    double time = 0.0;
    double grad_lbeta = 0.0;
    double omega = 0.0;
    double l2_interior = 0.0;
    int nonlinear_iters = 0;
};

inline std::vector<EnergyPoint> energy_diagnostics(const Trajectory& traj, const GPolynomial& g) {
    if (traj.steps.empty())
        throw std::invalid_argument("energy_diagnostics: empty trajectory");
    const double a = exponents(g).a;
    std::vector<EnergyPoint> out;
    out.reserve(traj.steps.size());
    for (const StepRecord& s : traj.steps) {
        EnergyPoint p;
        p.time = s.time;
        p.grad_lbeta = s.grad_lbeta;
        p.omega = std::pow(1.0 + s.grad_lbeta, -a);
        p.l2_interior = s.l2_interior;
        p.nonlinear_iters = s.nonlinear_iters;
        out.push_back(p);
    }
    return out;
}

inline void write_history_csv(std::ostream& os, const std::vector<EnergyPoint>& pts) {
    os << "step,t,l2,gradbeta,omega,iters\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
        os << i << ',' << detail::fmt6(pts[i].time) << ',' << detail::fmt6(pts[i].l2_interior) << ','
           << detail::fmt6(pts[i].grad_lbeta) << ',' << detail::fmt6(pts[i].omega) << ','
           << pts[i].nonlinear_iters << '\n';
}

} // namespace forchfem
