// Benchmark CLI for the mixed-formulation hyperelastodynamics solver.
//
// Subcommands:
//   block-compression   compressible block under a ramped surface load
//   tensile-test        anisotropic tissue strip under a ramped end force
//   sweep               parameter studies emitting one CSV row per cell
//   linear-bench        one preconditioned solve of the first-step system
//
// Every configuration key (see README) is exposed as a flag of the same name,
// e.g. `--mesh.n 8` or `--solver.precond simple`; `--config FILE` loads a
// key = value file first, and flags win over the file.

#include "CLI11.hpp"

#include "elastodyn/driver.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>

namespace {

using elastodyn::BenchmarkConfig;
using elastodyn::Config;

const std::vector<std::pair<const char*, const char*>> kConfigKeys = {
    {"mesh.n", "divisions per edge (sets nx = ny = nz)"},
    {"mesh.nx", "cells in x"},
    {"mesh.ny", "cells in y"},
    {"mesh.nz", "cells in z"},
    {"mesh.lx", "edge length in x (cm)"},
    {"mesh.ly", "edge length in y (cm)"},
    {"mesh.lz", "edge length in z (cm)"},
    {"time.dt", "time step size (s)"},
    {"time.n_steps", "number of time steps"},
    {"time.rho_inf", "spectral radius of the time integrator in [0, 1]"},
    {"material.rho0", "referential density (g/cm^3)"},
    {"material.mu", "shear modulus (dyn/cm^2)"},
    {"material.kappa", "bulk modulus (dyn/cm^2, compressible model)"},
    {"material.eta", "stiffness and load scaling factor"},
    {"material.nu", "Poisson ratio; derives kappa, >= 0.5 selects incompressible"},
    {"material.incompressible", "force the incompressible volumetric model"},
    {"material.k1", "fiber stiffness (dyn/cm^2)"},
    {"material.k2", "fiber exponent"},
    {"material.kd", "fiber dispersion in [0, 1/3]"},
    {"material.phi_deg", "fiber angle from the loading axis (degrees)"},
    {"load.magnitude", "peak traction (dyn/cm^2) or peak total force (dyn)"},
    {"load.ramp_time", "linear ramp duration (s); < 0 uses the benchmark default"},
    {"stabilization.c_m", "stabilization constant"},
    {"newton.tol_rel", "nonlinear relative tolerance"},
    {"newton.tol_abs", "nonlinear absolute tolerance"},
    {"newton.max_iters", "maximum corrector passes per step"},
    {"solver.precond", "nested | simple | ilu0 | jacobi | none"},
    {"solver.outer_rtol", "outer Krylov relative tolerance"},
    {"solver.outer_restart", "outer Krylov restart length"},
    {"solver.outer_max", "outer Krylov iteration cap"},
    {"solver.tol_a", "momentum-block solve relative tolerance"},
    {"solver.a_max", "momentum-block iteration cap"},
    {"solver.tol_s", "Schur solve relative tolerance"},
    {"solver.s_max", "Schur solve iteration cap"},
    {"solver.tol_i", "inner solve relative tolerance; >= 1 disables the inner solver"},
    {"solver.i_max", "inner solve iteration cap"},
    {"solver.scale", "apply symmetric diagonal scaling"},
    {"output.dir", "output directory"},
    {"output.vtk", "write VTK snapshots"},
    {"output.vtk_every", "snapshot stride in steps"},
    {"output.quiet", "suppress per-step progress lines"},
};

struct CommonArgs {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--config", args.config_file, "key = value configuration file");
    for (const auto& [key, desc] : kConfigKeys) {
        const std::string name = "--" + std::string(key);
        cmd->add_option_function<std::string>(
            name,
            [&args, k = std::string(key)](const std::string& v) { args.overrides[k] = v; },
            desc);
    }
}

Config build_config(const CommonArgs& args, const std::string& benchmark)
{
    Config c;
    if (!args.config_file.empty()) c = Config::parse_file(args.config_file);
    for (const auto& [k, v] : args.overrides) c.set(k, v);
    if (!benchmark.empty()) c.set("benchmark", benchmark);
    return c;
}

int run_single(const Config& c)
{
    const BenchmarkConfig cfg = BenchmarkConfig::from_config(c);
    const elastodyn::BenchmarkProblem prob = elastodyn::make_benchmark(cfg);
    if (!cfg.quiet)
        std::cout << "mesh: " << prob.mesh.n_nodes() << " nodes, " << prob.mesh.n_tets()
                  << " tets; unknowns: " << prob.dofs.nv << " velocity + " << prob.dofs.np
                  << " pressure\n";
    const elastodyn::BenchmarkResult res = elastodyn::run_benchmark(prob, true);
    if (!res.completed) {
        const auto& last = res.steps.back();
        std::cerr << "no convergence at step " << last.step << " (t = " << last.time
                  << ") after " << last.newton_iters
                  << " corrector passes; |R| = " << last.res_final << "\n";
        return 1;
    }
    if (!cfg.quiet)
        std::cout << "completed " << cfg.n_steps << " steps; outputs in " << cfg.out_dir
                  << "\n";
    return 0;
}

std::unique_ptr<std::ofstream> open_csv(const std::string& path)
{
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nested-preconditioner benchmarks for stabilized hyperelastodynamics"};
    app.require_subcommand(1);

    CommonArgs block_args, tensile_args, sweep_args, lin_args;

    CLI::App* block = app.add_subcommand("block-compression",
                                         "compressible block under a ramped surface load");
    add_config_flags(block, block_args);

    CLI::App* tensile = app.add_subcommand("tensile-test",
                                           "anisotropic strip under a ramped end force");
    add_config_flags(tensile, tensile_args);

    CLI::App* sweep = app.add_subcommand("sweep", "parameter studies (CSV output)");
    add_config_flags(sweep, sweep_args);
    std::string study;
    std::string sweep_benchmark;
    std::string sweep_out;
    bool strict = false;
    std::vector<double> tols = {1e0, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
    std::vector<double> etas = {1e-2, 1e0, 1e2};
    std::vector<double> nus = {0.0, 0.3, 0.4999};
    std::vector<std::string> precond_names = {"nested", "simple", "ilu0"};
    sweep->add_option("--study", study, "inner-tol | material | precond")->required();
    sweep->add_option("--benchmark", sweep_benchmark,
                      "block-compression | tensile-test (study-specific default)");
    sweep->add_option("--out", sweep_out, "CSV output path (default: stdout)");
    sweep->add_option("--tols", tols, "inner tolerances (inner-tol study)");
    sweep->add_option("--etas", etas, "stiffness scalings (material study)");
    sweep->add_option("--nus", nus, "Poisson ratios (material study)");
    sweep->add_option("--preconds", precond_names, "preconditioners (precond study)");
    sweep->add_flag("--strict", strict, "exit nonzero when any cell fails to converge");

    CLI::App* lin = app.add_subcommand("linear-bench",
                                       "one preconditioned solve of the first-step system");
    add_config_flags(lin, lin_args);
    std::string lin_benchmark = "block-compression";
    std::string export_basename;
    lin->add_option("--benchmark", lin_benchmark, "block-compression | tensile-test");
    lin->add_option("--export", export_basename,
                    "write <basename>_K.mtx and <basename>_rhs.mtx (Matrix Market)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (block->parsed()) return run_single(build_config(block_args, "block-compression"));
        if (tensile->parsed()) return run_single(build_config(tensile_args, "tensile-test"));

        if (lin->parsed()) {
            const Config c = build_config(lin_args, lin_benchmark);
            BenchmarkConfig cfg = BenchmarkConfig::from_config(c);
            cfg.quiet = true;
            const elastodyn::LinearStats st =
                elastodyn::run_linear_bench(cfg, std::cout, export_basename);
            return st.converged ? 0 : 1;
        }

        if (sweep->parsed()) {
            Config c = build_config(sweep_args, sweep_benchmark);
            int nc = 0;
            if (study == "inner-tol") {
                if (sweep_benchmark.empty()) c.set("benchmark", "block-compression");
                const BenchmarkConfig base = BenchmarkConfig::from_config(c);
                auto f = open_csv(sweep_out);
                nc = elastodyn::sweep_inner_tolerance(base, tols, f ? *f : std::cout);
            } else if (study == "material") {
                if (sweep_benchmark.empty()) c.set("benchmark", "block-compression");
                // The robustness study runs every level at the same tolerance.
                if (!c.has("solver.tol_i")) c.set("solver.tol_i", "1e-6");
                const BenchmarkConfig base = BenchmarkConfig::from_config(c);
                auto f = open_csv(sweep_out);
                nc = elastodyn::sweep_material(base, etas, nus, f ? *f : std::cout);
            } else if (study == "precond") {
                if (sweep_benchmark.empty()) c.set("benchmark", "tensile-test");
                const BenchmarkConfig base = BenchmarkConfig::from_config(c);
                std::vector<elastodyn::PrecondKind> kinds;
                for (const std::string& n : precond_names)
                    kinds.push_back(elastodyn::precond_from_name(n));
                auto f = open_csv(sweep_out);
                nc = elastodyn::sweep_preconditioner(base, kinds, f ? *f : std::cout);
            } else {
                std::cerr << "unknown study '" << study << "'\n";
                return 2;
            }
            if (nc > 0)
                std::cerr << nc << " cell(s) did not converge (recorded as NC)\n";
            return strict && nc > 0 ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
