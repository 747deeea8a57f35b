#pragma once

#include "elastodyn/assembly.hpp"
#include "elastodyn/precond.hpp"

#include <functional>
#include <vector>

namespace elastodyn {

// First-order generalized-alpha parameters.  alpha_m, alpha_f, gamma follow
// from the spectral radius rho_inf of the amplification matrix at the highest
// frequency; rho_inf in [0, 1].
struct GenAlphaParams {
    double rho_inf = 0.5;
    double alpha_m = 5.0 / 6.0;
    double alpha_f = 2.0 / 3.0;
    double gamma = 2.0 / 3.0;
    double dt = 1.0;

    TimeScalars scalars() const { return {dt, alpha_m, alpha_f, gamma}; }
};

GenAlphaParams gen_alpha_params(double rho_inf, double dt);

struct NonlinearConfig {
    double tol_R = 1e-6; // relative residual tolerance
    double tol_A = 1e-6; // absolute residual tolerance
    int l_max = 20;      // maximum corrector passes per step
};

// Per-time-step solver statistics: Newton count, accumulated linear-solver
// counters, and wall times for assembly (t_assembly) and linear solves
// (linear.t_solve).
struct StepStats {
    int step = 0;
    double time = 0.0;      // t_{n+1}
    int newton_iters = 0;   // corrector passes that performed a solve
    bool converged = false;
    double res0 = 0.0;      // ||R_(0)||
    double res_final = 0.0; // residual norm at exit
    std::vector<double> res_history; // ||R_(l)|| for l = 0, 1, ... at entry to each pass
    LinearStats linear;
    double t_assembly = 0.0;
};

// A transient problem: spatial discretization, material, stabilization, and
// time-dependent loads (evaluated at the generalized-alpha intermediate time
// t_{n+alpha_f}).
struct TransientProblem {
    const Mesh* mesh = nullptr;
    const DofMap* dofs = nullptr;
    const Material* mat = nullptr;
    StabilizationParams stab;
    std::function<Loads(double)> loads_at;
};

// Advances the state from t_n to t_n + dt with the predictor/multi-corrector
// Newton algorithm: same-displacement predictor, residual-based stopping
// before each solve, segregated two-stage update (2x2 solve for the rate
// increments, then the displacement-rate recovery).  On convergence `s` holds
// the accepted iterate; on Newton failure `converged` stays false and `s`
// holds the last iterate.
StepStats step_generalized_alpha(const TransientProblem& prob, const GenAlphaParams& ga,
                                 const NonlinearConfig& nl, const BlockSolverOptions& ls,
                                 double t_n, State& s);

struct RunResult {
    std::vector<StepStats> steps;
    bool completed = true; // false when a step failed to converge
};

// Runs n_steps uniform steps from t0, invoking on_step (if set) after each
// step.  Stops early on Newton failure.
RunResult advance(const TransientProblem& prob, const GenAlphaParams& ga,
                  const NonlinearConfig& nl, const BlockSolverOptions& ls, double t0,
                  int n_steps, State& s,
                  const std::function<void(const State&, const StepStats&)>& on_step = {});

} // namespace elastodyn
