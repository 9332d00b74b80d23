// Command-line front end: convergence studies, long-time stability runs and
// single simulations of the generalized Forchheimer flow solver, with CSV and
// table output.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forchfem/forchfem.hpp"

namespace {

using namespace forchfem;

constexpr int kExitUsage = 1;
constexpr int kExitSolverFailure = 2;
constexpr int kExitMonotonicity = 3;

struct CliOptions {
    std::string example = "1";
    std::string n_csv = "4,8,16";
    double dt = 0.0;      // 0 = default rule
    double t_end = 1.0;
    std::string scheme = "picard";
    std::string out;
    std::string config_path;
    int threads = 1;
    unsigned seed = 1;
};

std::vector<int> parse_n_list(const std::string& csv) {
    std::vector<int> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("invalid N list entry '" + item + "'");
        }
    }
    return out;
}

// Config file values override the command-line flags.
void merge_config(CliOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw std::invalid_argument("cannot open config file '" + opt.config_path + "'");
    const Config cfg = Config::parse(in);
    if (cfg.has("example")) opt.example = cfg.get_string("example");
    if (cfg.has("N_list")) {
        std::string csv;
        for (double v : cfg.get_list("N_list")) {
            if (!csv.empty()) csv += ',';
            csv += std::to_string(static_cast<int>(v));
        }
        opt.n_csv = csv;
    }
    if (cfg.has("dt")) opt.dt = cfg.get_double("dt");
    if (cfg.has("T")) opt.t_end = cfg.get_double("T");
    if (cfg.has("scheme")) opt.scheme = cfg.get_string("scheme");
    if (cfg.has("output")) opt.out = cfg.get_string("output");
    if (cfg.has("threads")) opt.threads = cfg.get_int("threads");
    if (cfg.has("seed")) opt.seed = static_cast<unsigned>(cfg.get_int("seed"));
}

RunSpec build_spec(const CliOptions& opt, RunSpec::Mode mode) {
    std::ostringstream problem_cfg;
    problem_cfg << "example = " << opt.example << "\n";
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        const Config cfg = Config::parse(in);
        if (cfg.has("alphas")) problem_cfg << "alphas = " << cfg.get_string("alphas") << "\n";
        if (cfg.has("coeffs")) problem_cfg << "coeffs = " << cfg.get_string("coeffs") << "\n";
    }

    RunSpec spec;
    spec.mode = mode;
    spec.problem = load_problem(Config::parse_string(problem_cfg.str()));
    spec.n_list = parse_n_list(opt.n_csv);
    spec.ts.dt = opt.dt;
    spec.ts.t_end = opt.t_end;
    if (opt.scheme == "picard") spec.ts.scheme = Scheme::picard;
    else if (opt.scheme == "newton") spec.ts.scheme = Scheme::newton;
    else throw std::invalid_argument("unknown scheme '" + opt.scheme + "'");
    spec.threads = opt.threads;
    spec.seed = opt.seed;
    spec.validate();
    return spec;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
    out << text;
}

void print_convergence_table(const std::vector<ConvergenceRow>& rows) {
    std::printf("%6s %10s %12s %8s %12s %8s %12s\n", "N", "h", "err_l2", "rate",
                "err_grad_b", "rate", "err_linf");
    for (const ConvergenceRow& r : rows) {
        std::printf("%6d %10.6g %12.6g ", r.n, r.h, r.err_l2);
        if (r.rate_l2) std::printf("%8.3f ", *r.rate_l2); else std::printf("%8s ", "-");
        std::printf("%12.6g ", r.err_grad);
        if (r.rate_grad) std::printf("%8.3f ", *r.rate_grad); else std::printf("%8s ", "-");
        std::printf("%12.6g\n", r.err_linf);
    }
}

int cmd_convergence(CliOptions& opt) {
    merge_config(opt);
    const RunSpec spec = build_spec(opt, RunSpec::Mode::convergence);
    const ConvergenceResult result = run_convergence(spec);
    print_convergence_table(result.rows);
    write_output(opt.out, result.csv());
    if (!result.complete) {
        std::fprintf(stderr, "solver failure: %s\n", result.failure.c_str());
        return kExitSolverFailure;
    }
    return 0;
}

int cmd_stability(CliOptions& opt) {
    merge_config(opt);
    const RunSpec spec = build_spec(opt, RunSpec::Mode::stability);
    const StabilityResult result = run_stability(spec);
    std::printf("steps: %zu  initial L2: %.6g  final L2: %.6g  monotone: %s\n",
                result.history.size() - 1, result.initial_l2, result.final_l2,
                result.monotone ? "yes" : "no");
    write_output(opt.out, result.csv());
    const bool homogeneous = spec.problem.name == "homogeneous";
    if (homogeneous && !result.monotone) {
        std::fprintf(stderr, "monotonicity violated on homogeneous data\n");
        return kExitMonotonicity;
    }
    return 0;
}

int cmd_single(CliOptions& opt) {
    merge_config(opt);
    const RunSpec spec = build_spec(opt, RunSpec::Mode::single);
    const SingleResult result = run_single(spec);
    const EnergyPoint& last = result.history.back();
    std::printf("t = %.6g  l2_interior = %.6g  grad_lbeta = %.6g  omega = %.6g\n", last.time,
                last.l2_interior, last.grad_lbeta, last.omega);
    if (result.err_l2)
        std::printf("errors at T: l2 = %.6g  grad_lbeta = %.6g  linf = %.6g\n", *result.err_l2,
                    *result.err_grad, *result.err_linf);
    std::ostringstream csv;
    write_history_csv(csv, result.history);
    write_output(opt.out, csv.str());
    return 0;
}

int cmd_mesh(int n, const std::string& out) {
    const Mesh mesh = unit_square_mesh(n);
    if (out.empty()) {
        write_mesh(std::cout, mesh);
    } else {
        std::ofstream file(out);
        if (!file) throw std::runtime_error("cannot write output file '" + out + "'");
        write_mesh(file, mesh);
    }
    return 0;
}

void add_common_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--example,-e", opt.example, "problem: 1, 2 or homogeneous");
    cmd->add_option("--N,-N", opt.n_csv, "comma list of mesh subdivisions");
    cmd->add_option("--dt", opt.dt, "time step (default: h/4 with h = 1/max N)");
    cmd->add_option("--T", opt.t_end, "final time");
    cmd->add_option("--scheme", opt.scheme, "nonlinear scheme: picard or newton");
    cmd->add_option("--out,-o", opt.out, "CSV output path");
    cmd->add_option("--config,-c", opt.config_path, "config file (overrides flags)");
    cmd->add_option("--threads", opt.threads, "parallel refinement levels (convergence mode)");
    cmd->add_option("--seed", opt.seed, "random initial field seed (stability mode)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galerkin FEM solver for generalized Forchheimer flows of slightly "
                 "compressible fluids"};
    app.require_subcommand(1);

    CliOptions conv_opt, stab_opt, single_opt;
    stab_opt.example = "homogeneous";
    stab_opt.n_csv = "16";
    single_opt.n_csv = "8";

    CLI::App* conv = app.add_subcommand("convergence", "refinement study against the exact solution");
    add_common_options(conv, conv_opt);
    CLI::App* stab = app.add_subcommand("stability", "long-time norm history on one mesh");
    add_common_options(stab, stab_opt);
    CLI::App* single = app.add_subcommand("single", "one simulation with final diagnostics");
    add_common_options(single, single_opt);

    int mesh_n = 4;
    std::string mesh_out;
    CLI::App* mesh = app.add_subcommand("mesh", "dump a unit-square triangulation as text");
    mesh->add_option("--N,-N", mesh_n, "subdivisions per side");
    mesh->add_option("--out,-o", mesh_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (conv->parsed()) return cmd_convergence(conv_opt);
        if (stab->parsed()) return cmd_stability(stab_opt);
        if (single->parsed()) return cmd_single(single_opt);
        if (mesh->parsed()) return cmd_mesh(mesh_n, mesh_out);
    } catch (const StepFailure& err) {
        std::fprintf(stderr, "solver failure: %s\n", err.what());
        return kExitSolverFailure;
    } catch (const SolveFailure& err) {
        std::fprintf(stderr, "solver failure: %s\n", err.what());
        return kExitSolverFailure;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kExitUsage;
    }
    return 0;
}
