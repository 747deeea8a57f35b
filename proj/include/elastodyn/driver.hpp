#pragma once

#include "elastodyn/config.hpp"
#include "elastodyn/output.hpp"
#include "elastodyn/timeint.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace elastodyn {

enum class BenchmarkKind { BlockCompression, TensileTest };

// All user-facing parameters of the two benchmarks.  Units are CGS
// (cm, g, s, dyn).  Defaults depend on the benchmark; use the two factory
// functions, then overlay a Config with apply().
struct BenchmarkConfig {
    BenchmarkKind kind = BenchmarkKind::BlockCompression;

    // Discretization: cells per direction and box edge lengths.
    int nx = 8, ny = 8, nz = 8;
    double lx = 0.1, ly = 0.1, lz = 0.1;

    // Time stepping.
    double dt = 0.1;
    int n_steps = 10;
    double rho_inf = 0.5;

    // Material.  When `nu` is set (has_nu), kappa is derived from
    // (mu * eta, nu); nu >= 0.5 selects the incompressible model.  `eta`
    // scales both the shear modulus and the applied load.
    double rho0 = 1.0;
    double mu = 8.0194e8;
    double kappa = 4.00889806e12;
    double eta = 1.0;
    bool has_nu = false;
    double nu = 0.4999;
    bool incompressible = false;
    double k1 = 9.966e6, k2 = 524.6, kd = 0.226, phi_deg = 40.02; // fiber data

    // Loading: peak traction magnitude (dyn/cm^2, block compression) or peak
    // total force (dyn, tensile test), ramped linearly over ramp_time
    // (< 0: benchmark default) and held afterwards.
    double load = 3.2e9;
    double ramp_time = -1.0;

    // Stabilization.
    double c_m = 1e-3;

    // Solvers.
    NonlinearConfig newton{};
    BlockSolverOptions linear{};

    // Output.
    std::string out_dir = "out";
    bool write_vtk_files = false;
    int vtk_every = 1;
    bool quiet = false;

    static BenchmarkConfig block_compression_defaults();
    static BenchmarkConfig tensile_test_defaults();

    // Defaults for the benchmark named by key "benchmark", overlaid with
    // every recognized key present in `c`.  Throws on unknown benchmark or
    // preconditioner names.
    static BenchmarkConfig from_config(const Config& c);

    // Overlays recognized keys of `c` onto this config.
    void apply(const Config& c);

    double effective_mu() const { return mu * eta; }
    double effective_load() const { return load * eta; }
    double ramp_duration() const; // resolved default when ramp_time < 0
};

PrecondKind precond_from_name(const std::string& name);
std::string precond_name(PrecondKind kind);

// A fully assembled transient benchmark.  Move-only (owns the material).
struct BenchmarkProblem {
    BenchmarkConfig cfg;
    Mesh mesh;
    DofMap dofs;
    Material mat;
    StabilizationParams stab;
    std::function<Loads(double)> loads_at;
    std::function<double(double)> force_at; // total applied force (dyn)
    std::vector<int> loaded_nodes;          // unique nodes of the loaded face
    int measure_comp = 2;                   // displacement component reported
    GenAlphaParams ga;

    // View for the time integrator; valid while this object is alive.
    TransientProblem transient() const;

    // Mean displacement of the loaded face along measure_comp.
    double mean_loaded_displacement(const State& s) const;
};

// Benchmark factories: build mesh, constraints, material, stabilization, load
// functions, and the multigrid row grouping derived from the constraint map.
BenchmarkProblem make_block_compression(const BenchmarkConfig& cfg);
BenchmarkProblem make_tensile_test(const BenchmarkConfig& cfg);
BenchmarkProblem make_benchmark(const BenchmarkConfig& cfg);

struct BenchmarkResult {
    std::vector<StepStats> steps;
    std::vector<LoadDisplacementRow> load_disp; // one row per completed step
    bool completed = true;
    State state; // final accepted state
};

// Runs the transient benchmark.  When write_outputs is true, emits
// stats.csv, load_displacement.csv, and (if configured) VTK snapshots under
// cfg.out_dir.
BenchmarkResult run_benchmark(const BenchmarkProblem& prob, bool write_outputs);

// The block system of the first corrector pass of the first time step
// (predictor state, loads at t = alpha_f * dt): the system used by the
// solver-statistics studies.
struct FirstStepSystem {
    TangentBlocks tangent;
    std::vector<double> rhs; // nv + np, monolithic ordering
};
FirstStepSystem make_first_step_system(const BenchmarkProblem& prob);

// --- Parameter sweeps.  Each writes one CSV row per cell; cells that fail to
// converge (Newton or linear solver) print NC in the numeric columns and the
// sweep continues.  Returns the number of non-converged cells.

// Inner-tolerance study on the first time step: header
//   tol_I,T_L,l_hat,n,n_bar_A,n_bar_S,n_bar_I,converged
// with n the total outer iterations over the step.  tol_I >= 1 rows solve
// with S_hat in place of the matrix-free Schur complement (n_bar_I prints -).
int sweep_inner_tolerance(const BenchmarkConfig& base, const std::vector<double>& tols_inner,
                          std::ostream& out);

// Material robustness study over (eta, nu) pairs, statistics collected over
// the full run: header
//   eta,nu,l_hat,n,n_bar_A,n_bar_S,n_bar_I,T_L_bar,converged
// with n the average outer iterations and T_L_bar the average linear-solve
// seconds per nonlinear iteration.
int sweep_material(const BenchmarkConfig& base, const std::vector<double>& etas,
                   const std::vector<double>& nus, std::ostream& out);

// Preconditioner comparison on one benchmark, statistics over the full run:
//   precond,l_hat,n,n_bar_A,n_bar_S,n_bar_I,T_L,converged
int sweep_preconditioner(const BenchmarkConfig& base, const std::vector<PrecondKind>& kinds,
                         std::ostream& out);

// One linear solve of the first-step system with the configured
// preconditioner; prints a stats row to `out` and optionally exports the
// monolithic matrix and right-hand side in Matrix Market format.
LinearStats run_linear_bench(const BenchmarkConfig& cfg, std::ostream& out,
                             const std::string& export_basename = "");

} // namespace elastodyn
