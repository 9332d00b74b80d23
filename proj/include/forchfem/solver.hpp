#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchfem/cg.hpp"
#include "forchfem/fem.hpp"
#include "forchfem/forchheimer.hpp"
#include "forchfem/mesh.hpp"
#include "forchfem/problems.hpp"

namespace forchfem {

enum class Scheme { picard, newton };

struct TimeSteppingConfig {
    double dt = 0.0;
    double t_end = 0.0;
    double nonlinear_tol = 1e-10;   // on the M-norm of the increment
    int max_nonlinear_iters = 50;
    double linear_tol = 1e-12;      // relative CG residual
    Scheme scheme = Scheme::picard;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeSteppingConfig: dt must be positive");
        if (!(t_end > 0.0)) throw std::invalid_argument("TimeSteppingConfig: t_end must be positive");
        if (dt > t_end * (1.0 + 1e-12))
            throw std::invalid_argument("TimeSteppingConfig: dt exceeds t_end");
        if (!(nonlinear_tol > 0.0) || !(linear_tol > 0.0))
            throw std::invalid_argument("TimeSteppingConfig: tolerances must be positive");
    }
};

struct StepRecord {
    double time = 0.0;
    ScalarField field;
    double l2_interior = 0.0;  // L2 norm of the homogenized part (boundary data subtracted)
    double grad_lbeta = 0.0;   // ||grad rho_h||_{0,beta}
    int nonlinear_iters = 0;
};

struct Trajectory {
    std::vector<StepRecord> steps;   // steps[0] is the initial state

    const StepRecord& back() const { return steps.back(); }
};

struct StepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline CsrMatrix add_scaled_mass(const CsrMatrix& mass, double inv_dt, const CsrMatrix& other) {
    CsrMatrix out = other;   // same vertex pattern
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += inv_dt * mass.values[k];
    return out;
}

inline double increment_mass_norm(const CsrMatrix& mass, const std::vector<double>& a,
                                  const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return mass_norm(mass, d);
}

inline double euclidean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace detail

/// One backward Euler step from `state` (at t_next - dt) to t_next.
///
/// Picard freezes K at the previous iterate, so every inner solve is SPD:
///   (M/dt + S(u^k)) u^{k+1} = M*state/dt + b(t_next),
/// with boundary values at t_next imposed inside each iteration. Newton
/// replaces S(u^k) with the Jacobian and solves for the increment. The loop
/// stops once the M-norm of the increment is below nonlinear_tol and the
/// discrete residual norm is below 10*nonlinear_tol.
inline ScalarField backward_euler_step(const Mesh& mesh, const CsrMatrix& mass,
                                       const ScalarField& state, double t_next,
                                       const Problem& problem, const TimeSteppingConfig& cfg,
                                       int* iterations_out = nullptr) {
    check_field(mesh, state, "backward_euler_step");
    const double dt = cfg.dt;
    const BoundaryValues bc = boundary_values(mesh, problem.boundary, t_next);

    const std::vector<double> load =
        assemble_load(mesh, [&](Vec2 x) { return problem.forcing(x, t_next); });
    std::vector<double> rhs_full = mass.multiply(state.values);
    for (std::size_t i = 0; i < rhs_full.size(); ++i)
        rhs_full[i] = rhs_full[i] / dt + load[i];

    // warm start: previous state with the new boundary values imposed
    ScalarField u;
    u.values = state.values;
    u.time = t_next;
    for (const auto& [v, val] : bc) u.values[static_cast<std::size_t>(v)] = val;

    const auto residual_norm = [&](const ScalarField& w) {
        return detail::euclidean(residual(mesh, problem.g, state, w, dt, problem.forcing, t_next));
    };

    for (int it = 1; it <= cfg.max_nonlinear_iters; ++it) {
        std::vector<double> next;
        if (cfg.scheme == Scheme::picard) {
            const CsrMatrix A = detail::add_scaled_mass(mass, 1.0 / dt,
                                                        assemble_stiffness(mesh, u, problem.g));
            const ConstrainedSystem sys = apply_dirichlet(A, rhs_full, bc, mesh);
            next = sys.expand(cg_solve(sys.A, sys.b, cfg.linear_tol).x);
        } else {
            // Newton: J delta = -r with homogeneous boundary increments
            const CsrMatrix J = detail::add_scaled_mass(mass, 1.0 / dt,
                                                        assemble_jacobian(mesh, problem.g, u));
            const std::vector<double> r =
                residual(mesh, problem.g, state, u, dt, problem.forcing, t_next);
            BoundaryValues zero_bc = bc;
            for (auto& [v, val] : zero_bc) val = 0.0;
            std::vector<double> zero_rhs(static_cast<std::size_t>(mesh.n_vertices()), 0.0);
            ConstrainedSystem sys = apply_dirichlet(J, zero_rhs, zero_bc, mesh);
            for (std::size_t k = 0; k < sys.b.size(); ++k) sys.b[k] = -r[k];
            const std::vector<double> delta = sys.expand(cg_solve(sys.A, sys.b, cfg.linear_tol).x);
            next = u.values;
            for (std::size_t i = 0; i < next.size(); ++i) next[i] += delta[i];
        }

        const double inc = detail::increment_mass_norm(mass, next, u.values);
        u.values = std::move(next);
        if (inc <= cfg.nonlinear_tol && residual_norm(u) <= 10.0 * cfg.nonlinear_tol) {
            if (iterations_out) *iterations_out = it;
            return u;
        }
    }
    throw StepFailure("backward_euler_step: no convergence in " +
                      std::to_string(cfg.max_nonlinear_iters) + " iterations at t = " +
                      std::to_string(t_next));
}

namespace detail {

/// L2 norm of the homogenized part: the field minus the nodal interpolant of
/// the boundary data extended by zero.
inline double interior_l2(const Mesh& mesh, const CsrMatrix& mass, const ScalarField& u,
                          const Problem& problem, double t) {
    std::vector<double> tilde = u.values;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.on_boundary[static_cast<std::size_t>(v)])
            tilde[static_cast<std::size_t>(v)] -= problem.boundary(mesh.vertices[static_cast<std::size_t>(v)], t);
    return mass_norm(mass, tilde);
}

inline StepRecord make_record(const Mesh& mesh, const CsrMatrix& mass, const Problem& problem,
                              ScalarField field, double t, double beta, int iters) {
    StepRecord rec;
    rec.time = t;
    rec.l2_interior = interior_l2(mesh, mass, field, problem, t);
    rec.grad_lbeta = grad_norm_lbeta(mesh, field, beta);
    rec.nonlinear_iters = iters;
    rec.field = std::move(field);
    return rec;
}

} // namespace detail

/// Runs the backward Euler loop from t = 0 to t_end. The initial field is the
/// L2 projection of the problem's initial data unless an explicit field is
/// supplied (stability studies start from given nodal values).
inline Trajectory run_transient(const Mesh& mesh, const Problem& problem,
                                const TimeSteppingConfig& cfg,
                                const ScalarField* initial_override = nullptr) {
    cfg.validate();
    const double ratio = cfg.t_end / cfg.dt;
    const double steps_real = std::round(ratio);
    if (std::abs(ratio - steps_real) > 4.0 * std::numeric_limits<double>::epsilon() * ratio)
        throw std::invalid_argument("run_transient: t_end/dt = " + std::to_string(ratio) +
                                    " is not an integer number of steps");
    const int steps = static_cast<int>(steps_real);

    const CsrMatrix mass = assemble_mass(mesh);
    const double beta = exponents(problem.g).beta;

    ScalarField u;
    if (initial_override) {
        check_field(mesh, *initial_override, "run_transient");
        u = *initial_override;
        u.time = 0.0;
    } else {
        u = l2_project(mesh, problem.initial, 0.0, cfg.linear_tol);
    }

    Trajectory traj;
    traj.steps.reserve(static_cast<std::size_t>(steps) + 1);
    traj.steps.push_back(detail::make_record(mesh, mass, problem, u, 0.0, beta, 0));

    for (int n = 1; n <= steps; ++n) {
        const double t = n * cfg.dt;
        int iters = 0;
        ScalarField next;
        try {
            next = backward_euler_step(mesh, mass, traj.steps.back().field, t, problem, cfg, &iters);
        } catch (const std::exception& err) {
            throw StepFailure("run_transient: step to t = " + std::to_string(t) +
                              " failed: " + err.what());
        }
        traj.steps.push_back(detail::make_record(mesh, mass, problem, std::move(next), t, beta, iters));
    }
    return traj;
}

/// Steady state by Picard iteration on S(u^k) u^{k+1} = b with Dirichlet data;
/// used by the patch tests and available for time-independent data.
template <class Psi, class F>
ScalarField solve_steady(const Mesh& mesh, const GPolynomial& g, Psi&& psi, F&& f,
                         double tol = 1e-12, int max_iters = 50) {
    const CsrMatrix mass = assemble_mass(mesh);
    const BoundaryValues bc = boundary_values(mesh, psi, 0.0);
    const std::vector<double> load = assemble_load(mesh, [&](Vec2 x) { return f(x); });

    ScalarField u;
    u.values.assign(static_cast<std::size_t>(mesh.n_vertices()), 0.0);
    for (const auto& [v, val] : bc) u.values[static_cast<std::size_t>(v)] = val;

    for (int it = 1; it <= max_iters; ++it) {
        const CsrMatrix S = assemble_stiffness(mesh, u, g);
        const ConstrainedSystem sys = apply_dirichlet(S, load, bc, mesh);
        std::vector<double> next = sys.expand(cg_solve(sys.A, sys.b, tol).x);
        const double inc = detail::increment_mass_norm(mass, next, u.values);
        u.values = std::move(next);
        if (inc <= tol) return u;
    }
    throw SolveFailure("solve_steady: no convergence in " + std::to_string(max_iters) +
                       " Picard iterations");
}

} // namespace forchfem
