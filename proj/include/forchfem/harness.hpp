#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchfem/analysis.hpp"
#include "forchfem/problems.hpp"
#include "forchfem/solver.hpp"

namespace forchfem {

/// One study: a problem, a list of mesh resolutions and the time stepping
/// parameters. `dt = 0` selects the default h/4 rule with h = 1/max(N).
struct RunSpec {
    enum class Mode { convergence, stability, single };

    Mode mode = Mode::single;
    Problem problem;
    std::vector<int> n_list;
    TimeSteppingConfig ts;
    int threads = 1;
    unsigned seed = 1;   // random initial data of stability runs

    void validate() const {
        if (n_list.empty()) throw std::invalid_argument("RunSpec: N list is empty");
        for (int n : n_list)
            if (n < 1) throw std::invalid_argument("RunSpec: N must be >= 1");
        if (mode == Mode::convergence)
            for (std::size_t i = 1; i < n_list.size(); ++i)
                if (n_list[i] != 2 * n_list[i - 1])
                    throw std::invalid_argument("RunSpec: convergence mode needs strictly doubling N "
                                                "(got " + std::to_string(n_list[i - 1]) + " -> " +
                                                std::to_string(n_list[i]) + ")");
        if (mode != Mode::convergence && n_list.size() != 1)
            throw std::invalid_argument("RunSpec: this mode takes a single N");
    }

    /// A single small dt across all rows keeps the O(dt) error below the
    /// spatial error of every level.
    double effective_dt() const {
        if (ts.dt > 0.0) return ts.dt;
        const int n_max = *std::max_element(n_list.begin(), n_list.end());
        return 1.0 / (4.0 * n_max);
    }
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    bool complete = false;
    std::string failure;   // nonempty if a level failed

    std::string csv() const {
        std::ostringstream os;
        write_csv(os, rows);
        if (!complete) os << "# INCOMPLETE: " << failure << '\n';
        return os.str();
    }
};

/// Runs the transient problem on each level of the N list and measures the
/// errors against the exact solution at the final time.
inline ConvergenceResult run_convergence(const RunSpec& spec) {
    spec.validate();
    if (!spec.problem.has_exact())
        throw std::invalid_argument("run_convergence: problem has no exact solution");

    TimeSteppingConfig ts = spec.ts;
    ts.dt = spec.effective_dt();
    const double beta = exponents(spec.problem.g).beta;

    const auto level = [&](int n) {
        const Mesh mesh = unit_square_mesh(n);
        const Trajectory traj = run_transient(mesh, spec.problem, ts);
        const ScalarField& u = traj.back().field;
        ErrorSample s;
        s.n = n;
        s.err_l2 = error_l2(mesh, u, spec.problem.exact, ts.t_end);
        s.err_grad = error_grad_lbeta(mesh, u, spec.problem.exact_gradient, ts.t_end, beta);
        s.err_linf = error_linf(mesh, u, spec.problem.exact, ts.t_end);
        return s;
    };

    ConvergenceResult result;
    std::vector<ErrorSample> samples;
    try {
        if (spec.threads > 1) {
            std::vector<std::future<ErrorSample>> futures;
            futures.reserve(spec.n_list.size());
            for (int n : spec.n_list)
                futures.push_back(std::async(std::launch::async, level, n));
            for (auto& f : futures) samples.push_back(f.get());
        } else {
            for (int n : spec.n_list) samples.push_back(level(n));
        }
        result.complete = true;
    } catch (const std::exception& err) {
        result.failure = err.what();
    }
    result.rows = convergence_table(samples);
    return result;
}

/// Seeded random interior field with zero boundary values.
inline ScalarField random_interior_field(const Mesh& mesh, unsigned seed, double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-amplitude, amplitude);
    ScalarField f;
    f.values.assign(static_cast<std::size_t>(mesh.n_vertices()), 0.0);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (!mesh.on_boundary[static_cast<std::size_t>(v)])
            f.values[static_cast<std::size_t>(v)] = uni(rng);
    return f;
}

struct StabilityResult {
    std::vector<EnergyPoint> history;
    bool monotone = false;       // interior L2 norms never increase (1e-12 relative slack)
    double initial_l2 = 0.0;
    double final_l2 = 0.0;

    std::string csv() const {
        std::ostringstream os;
        write_history_csv(os, history);
        if (!monotone) os << "# MONOTONICITY VIOLATED\n";
        return os.str();
    }
};

/// Runs one level and reports the norm history. Homogeneous problems start
/// from a seeded random interior field; problems with their own initial data
/// start from its L2 projection.
inline StabilityResult run_stability(const RunSpec& spec) {
    spec.validate();
    TimeSteppingConfig ts = spec.ts;
    ts.dt = spec.effective_dt();

    const Mesh mesh = unit_square_mesh(spec.n_list.front());
    std::optional<ScalarField> init;
    if (spec.problem.name == "homogeneous")
        init = random_interior_field(mesh, spec.seed);

    const Trajectory traj = run_transient(mesh, spec.problem, ts, init ? &*init : nullptr);

    StabilityResult res;
    res.history = energy_diagnostics(traj, spec.problem.g);
    res.initial_l2 = res.history.front().l2_interior;
    res.final_l2 = res.history.back().l2_interior;
    res.monotone = true;
    for (std::size_t i = 1; i < res.history.size(); ++i) {
        const double prev = res.history[i - 1].l2_interior;
        if (res.history[i].l2_interior > prev * (1.0 + 1e-12) + 1e-300) {
            res.monotone = false;
            break;
        }
    }
    return res;
}

struct SingleResult {
    std::vector<EnergyPoint> history;
    std::optional<double> err_l2;
    std::optional<double> err_grad;
    std::optional<double> err_linf;
};

inline SingleResult run_single(const RunSpec& spec) {
    spec.validate();
    TimeSteppingConfig ts = spec.ts;
    ts.dt = spec.effective_dt();

    const Mesh mesh = unit_square_mesh(spec.n_list.front());
    const Trajectory traj = run_transient(mesh, spec.problem, ts);

    SingleResult res;
    res.history = energy_diagnostics(traj, spec.problem.g);
    if (spec.problem.has_exact()) {
        const ScalarField& u = traj.back().field;
        const double beta = exponents(spec.problem.g).beta;
        res.err_l2 = error_l2(mesh, u, spec.problem.exact, ts.t_end);
        res.err_grad = error_grad_lbeta(mesh, u, spec.problem.exact_gradient, ts.t_end, beta);
        res.err_linf = error_linf(mesh, u, spec.problem.exact, ts.t_end);
    }
    return res;
}

} // namespace forchfem
