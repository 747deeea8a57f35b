#include "elastodyn/timeint.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elastodyn {

GenAlphaParams gen_alpha_params(double rho_inf, double dt)
{
    if (rho_inf < 0.0 || rho_inf > 1.0)
        throw std::invalid_argument("gen_alpha_params: rho_inf must lie in [0, 1]");
    GenAlphaParams p;
    p.rho_inf = rho_inf;
    p.alpha_m = 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf);
    p.alpha_f = 1.0 / (1.0 + rho_inf);
    p.gamma = 1.0 / (1.0 + rho_inf);
    p.dt = dt;
    return p;
}

namespace {

double now_seconds(const std::chrono::steady_clock::time_point& t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// y_mid = y_n + w * (y - y_n), applied to a full nodal array.
void blend(const std::vector<double>& yn, const std::vector<double>& y, double w,
           std::vector<double>& out)
{
    out.resize(yn.size());
    for (std::size_t i = 0; i < yn.size(); ++i) out[i] = yn[i] + w * (y[i] - yn[i]);
}

} // namespace

StepStats step_generalized_alpha(const TransientProblem& prob, const GenAlphaParams& ga,
                                 const NonlinearConfig& nl, const BlockSolverOptions& ls,
                                 double t_n, State& s)
{
    const Mesh& mesh = *prob.mesh;
    const DofMap& dofs = *prob.dofs;
    const Material& mat = *prob.mat;
    const TimeScalars ts = ga.scalars();
    const double chi = ts.chi();
    const double gdt = ga.gamma * ga.dt;

    StepStats st;
    st.time = t_n + ga.dt;

    const State yn = s; // converged state at t_n
    State cur = s;      // iterate (l-1) of (y_{n+1}, ydot_{n+1})

    // Predictor: same displacement, rates scaled by (gamma-1)/gamma.
    const double pf = (ga.gamma - 1.0) / ga.gamma;
    for (auto& x : cur.udot) x *= pf;
    for (auto& x : cur.pdot) x *= pf;
    for (auto& x : cur.vdot) x *= pf;

    const Loads loads = prob.loads_at ? prob.loads_at(t_n + ga.alpha_f * ga.dt) : Loads{};

    State mid; // rates at n+alpha_m, values at n+alpha_f
    State prev; // iterate before the last update, for the admissibility guard
    std::vector<double> rk(dofs.nv), rm, rp;
    std::vector<double> rhs(dofs.nv + dofs.np), x;

    // Largest tolerated residual growth between consecutive corrector passes.
    // A full Newton step from a soft state can overshoot into the steep part
    // of an exponential stress response, where the residual jumps by many
    // orders of magnitude even though the direction is a descent direction;
    // halving the step recovers.  Growth below the cap passes through
    // untouched, so a healthy Newton sequence is never damped.
    constexpr double kGrowthCap = 4.0;
    double norm_prev = std::numeric_limits<double>::infinity();

    for (int l = 1; l <= nl.l_max + 1; ++l) {
        // Intermediate stages and residuals.  If the last update left the
        // admissible set -- an element inverted (J <= 0, no tangent exists),
        // the residual overflowed, or the residual grew catastrophically
        // (exponential fiber stiffening) -- halve the update and retry.  The
        // kinematic fold-in terms of the next right-hand side absorb the
        // resulting kinematic mismatch.
        double norm = 0.0;
        for (int halvings = 0;; ++halvings) {
            blend(yn.udot, cur.udot, ga.alpha_m, mid.udot);
            blend(yn.pdot, cur.pdot, ga.alpha_m, mid.pdot);
            blend(yn.vdot, cur.vdot, ga.alpha_m, mid.vdot);
            blend(yn.u, cur.u, ga.alpha_f, mid.u);
            blend(yn.p, cur.p, ga.alpha_f, mid.p);
            blend(yn.v, cur.v, ga.alpha_f, mid.v);

            bool admissible = true;
            const auto ta0 = std::chrono::steady_clock::now();
            try {
                assemble_residuals(mesh, dofs, mat, prob.stab, loads, mid, rm, rp);
            } catch (const ElementInversion&) {
                admissible = false;
            }
            st.t_assembly += now_seconds(ta0);

            if (admissible) {
                // Kinematic residual over free velocity rows.
                for (int r = 0; r < dofs.nv; ++r) {
                    const int idx = 3 * dofs.row_node[r] + dofs.row_comp[r];
                    rk[r] = mid.udot[idx] - mid.v[idx];
                }
                norm = std::sqrt(vec_dot(rk, rk) + vec_dot(rp, rp) + vec_dot(rm, rm));
                if (std::isfinite(norm) && norm <= kGrowthCap * norm_prev) break;
                admissible = false;
            }

            // l == 1 evaluates the converged previous step (the predictor
            // leaves displacements untouched), so nothing can be undone.
            if (l == 1 || halvings >= 30) {
                st.converged = false;
                s = cur;
                return st;
            }
            blend(prev.udot, cur.udot, 0.5, cur.udot);
            blend(prev.pdot, cur.pdot, 0.5, cur.pdot);
            blend(prev.vdot, cur.vdot, 0.5, cur.vdot);
            blend(prev.u, cur.u, 0.5, cur.u);
            blend(prev.p, cur.p, 0.5, cur.p);
            blend(prev.v, cur.v, 0.5, cur.v);
        }
        st.res_final = norm;
        st.res_history.push_back(norm);
        norm_prev = norm;
        if (l == 1) st.res0 = norm;
        if (norm <= std::max(nl.tol_R * st.res0, nl.tol_A)) {
            st.converged = true;
            s = cur;
            return st;
        }
        if (l > nl.l_max) break; // l_max corrector passes exhausted

        const auto ta1 = std::chrono::steady_clock::now();
        const TangentBlocks tb = assemble_tangent(mesh, dofs, mat, prob.stab, loads, mid, ts);
        st.t_assembly += now_seconds(ta1);

        // Right-hand side with the kinematic-residual fold-in:
        //   rhs_m = -R_m + (1/chi) (A - A_rate) rk
        //   rhs_p = -R_p + (1/chi) (C - C_rate) rk
        std::vector<double> w1(dofs.nv), w2(dofs.nv), wp1(dofs.np), wp2(dofs.np);
        tb.K.A.matvec(rk.data(), w1.data());
        tb.A_rate.matvec(rk.data(), w2.data());
        for (int i = 0; i < dofs.nv; ++i) rhs[i] = -rm[i] + (w1[i] - w2[i]) / chi;
        tb.K.C.matvec(rk.data(), wp1.data());
        tb.C_rate.matvec(rk.data(), wp2.data());
        for (int i = 0; i < dofs.np; ++i)
            rhs[dofs.nv + i] = -rp[i] + (wp1[i] - wp2[i]) / chi;

        const LinearStats lstats = solve_block_system(tb.K, rhs, x, ls);
        st.linear.add(lstats);
        st.newton_iters += 1;

        // Two-stage update: rate increments from the solve, displacement rate
        // from the kinematic relation, then the end-of-step iterate.
        prev = cur;
        for (int r = 0; r < dofs.nv; ++r) {
            const int idx = 3 * dofs.row_node[r] + dofs.row_comp[r];
            const double dvd = x[r];
            const double dud = (chi / ga.alpha_m) * dvd - rk[r] / ga.alpha_m;
            cur.vdot[idx] += dvd;
            cur.v[idx] += gdt * dvd;
            cur.udot[idx] += dud;
            cur.u[idx] += gdt * dud;
        }
        for (int n = 0; n < dofs.np; ++n) {
            const double dpd = x[dofs.nv + n];
            cur.pdot[n] += dpd;
            cur.p[n] += gdt * dpd;
        }
    }

    st.converged = false;
    s = cur;
    return st;
}

RunResult advance(const TransientProblem& prob, const GenAlphaParams& ga,
                  const NonlinearConfig& nl, const BlockSolverOptions& ls, double t0,
                  int n_steps, State& s,
                  const std::function<void(const State&, const StepStats&)>& on_step)
{
    RunResult out;
    out.steps.reserve(n_steps);
    double t = t0;
    for (int k = 0; k < n_steps; ++k) {
        StepStats st = step_generalized_alpha(prob, ga, nl, ls, t, s);
        st.step = k + 1;
        t += ga.dt;
        st.time = t;
        out.steps.push_back(st);
        if (on_step) on_step(s, out.steps.back());
        if (!out.steps.back().converged) {
            out.completed = false;
            break;
        }
    }
    return out;
}

} // namespace elastodyn
