#pragma once

#include "elastodyn/amg.hpp"
#include "elastodyn/blocksystem.hpp"
#include "elastodyn/csr.hpp"
#include "elastodyn/ilu0.hpp"
#include "elastodyn/krylov.hpp"

#include <memory>
#include <vector>

namespace elastodyn {

// Iteration counters for one (or several, when accumulated) linear solves of
// the 2x2 block system.  Averages follow the reporting convention of the
// benchmark tables: n_bar_A over momentum-block solves (steps 1 and 5 of the
// segregated procedure), n_bar_S over Schur solves (step 3), n_bar_I over the
// inner momentum solves performed inside matrix-free Schur applications.
struct LinearStats {
    long outer_iters = 0;   // iterations of the outer Krylov solve
    long a_solves = 0;      // momentum-block solve count
    long a_iters = 0;       // summed momentum-block iterations
    long s_solves = 0;      // Schur-complement solve count
    long s_iters = 0;       // summed Schur-solve iterations
    long schur_applies = 0; // matrix-free Schur-operator applications
    long inner_iters = 0;   // summed inner-solve iterations inside those
    bool converged = true;
    double t_solve = 0.0; // wall-clock seconds spent in the linear solve

    void add(const LinearStats& o)
    {
        outer_iters += o.outer_iters;
        a_solves += o.a_solves;
        a_iters += o.a_iters;
        s_solves += o.s_solves;
        s_iters += o.s_iters;
        schur_applies += o.schur_applies;
        inner_iters += o.inner_iters;
        converged = converged && o.converged;
        t_solve += o.t_solve;
    }

    double avg_a() const { return a_solves ? double(a_iters) / double(a_solves) : 0.0; }
    double avg_s() const { return s_solves ? double(s_iters) / double(s_solves) : 0.0; }
    double avg_inner() const
    {
        return schur_applies ? double(inner_iters) / double(schur_applies) : 0.0;
    }
};

// Sparse Schur-complement approximation S_hat = D - C diag(A)^{-1} B as an
// explicit CSR matrix.  Throws when A has a (near-)zero diagonal entry,
// naming the offending row.
CsrMatrix build_shat(const BlockMatrix& K, double eps_diag = 1e-300);

// Matrix-free Schur complement S = D - C A^{-1} B.  Each application performs
// exactly one inner solve with A (GMRES preconditioned by `a_precond` at the
// inner tolerances); non-convergence of the inner solve is recorded in the
// statistics and the best available iterate is used.
class SchurOperator final : public LinearOperator {
  public:
    SchurOperator(const BlockMatrix& K, Preconditioner& a_precond,
                  const KrylovConfig& inner_cfg, LinearStats& stats)
        : K_(&K), a_precond_(&a_precond), cfg_(inner_cfg), stats_(&stats)
    {
    }

    int size() const override { return K_->np; }
    void apply(const double* x, double* y) const override;

  private:
    const BlockMatrix* K_;
    Preconditioner* a_precond_;
    KrylovConfig cfg_;
    LinearStats* stats_;
};

// Per-level solver settings for the segregated (Schur-complement-reduction)
// procedure: `a` governs the two momentum solves, `s` the Schur solve, and
// `inner` the momentum solves embedded in matrix-free Schur applications.
// When inner.rel_tol >= 1 the inner solver is skipped entirely and step 3
// solves with S_hat in place of S.
struct ScrTolerances {
    KrylovConfig a{500, 500, 1e-4, 1e-50};
    KrylovConfig s{200, 200, 1e-4, 1e-50};
    KrylovConfig inner{500, 500, 1e-2, 1e-50};
};

// Segregated solver for the 2x2 block system.  Construction builds the AMG
// hierarchies for A and S_hat; solve() runs the five-step procedure:
//   1. solve A x_hat_v = r_v          (GMRES + AMG(A), tolerances `a`)
//   2. r_p <- r_p - C x_hat_v
//   3. solve S x_p = r_p              (GMRES + AMG(S_hat), tolerances `s`,
//                                      matrix-free S at tolerances `inner`)
//   4. r_v <- r_v - B x_p
//   5. solve A x_v = r_v              (GMRES + AMG(A), tolerances `a`)
class ScrSolver {
  public:
    ScrSolver(const BlockMatrix& K, const ScrTolerances& tols, const AmgOptions& amg_a,
              const AmgOptions& amg_s);

    // Solves [A B; C D][x_v; x_p] = [r_v; r_p]; accumulates into `stats`.
    void solve(const std::vector<double>& r_v, const std::vector<double>& r_p,
               std::vector<double>& x_v, std::vector<double>& x_p, LinearStats& stats);

    const CsrMatrix& shat() const { return shat_; }
    Preconditioner& a_precond() { return *amg_a_; }
    Preconditioner& s_precond() { return *amg_s_; }

  private:
    const BlockMatrix* K_;
    ScrTolerances tols_;
    CsrMatrix shat_;
    std::unique_ptr<AmgPrecond> amg_a_;
    std::unique_ptr<AmgPrecond> amg_s_;
};

// Right preconditioner executing the segregated procedure at relaxed
// tolerances.  Its action varies between calls (it runs iterative sub-solves),
// so the outer solver must be flexible.
class NestedPrecond final : public Preconditioner {
  public:
    NestedPrecond(ScrSolver& scr, int nv, int np, LinearStats& stats)
        : scr_(&scr), nv_(nv), np_(np), stats_(&stats)
    {
    }
    int size() const override { return nv_ + np_; }
    void apply(const double* r, double* z) override;

  private:
    ScrSolver* scr_;
    int nv_, np_;
    LinearStats* stats_;
};

// SIMPLE block preconditioner: the segregated skeleton with S_hat replacing S
// in the pressure solve and diag(A)^{-1} B replacing A^{-1} B in the velocity
// back-substitution.
class SimplePrecond final : public Preconditioner {
  public:
    SimplePrecond(const BlockMatrix& K, const ScrTolerances& tols, const AmgOptions& amg_a,
                  const AmgOptions& amg_s, LinearStats& stats);
    int size() const override { return K_->size(); }
    void apply(const double* r, double* z) override;

    const CsrMatrix& shat() const { return shat_; }

  private:
    const BlockMatrix* K_;
    ScrTolerances tols_;
    CsrMatrix shat_;
    std::vector<double> inv_diag_a_;
    std::unique_ptr<AmgPrecond> amg_a_;
    std::unique_ptr<AmgPrecond> amg_s_;
    LinearStats* stats_;
};

// Preconditioning strategy for the outer solve of the block system.
enum class PrecondKind {
    Nested, // FGMRES with the segregated procedure as right preconditioner
    Simple, // FGMRES with the SIMPLE preconditioner
    Ilu0,   // GMRES on the monolithic matrix with ILU(0)
    Jacobi, // GMRES on the monolithic matrix with Jacobi
    None,   // unpreconditioned GMRES on the monolithic matrix
};

struct BlockSolverOptions {
    PrecondKind precond = PrecondKind::Nested;
    KrylovConfig outer{200, 200, 1e-6, 1e-50};
    ScrTolerances scr{};
    AmgOptions amg_a{};    // velocity-block hierarchy (vector-valued nodes)
    AmgOptions amg_s{};    // S_hat hierarchy (scalar nodes)
    bool scale = true;     // symmetric diagonal scaling before the solve
    double eps_diag = 1e-15;
};

// Solves the block system K x = rhs (monolithic ordering: velocities then
// pressures) with the configured preconditioner, applying and undoing the
// diagonal scaling around the solve.  `x` is overwritten (zero initial
// guess).  Returns the iteration statistics; `converged` reflects the outer
// solve.  ILU(0) construction may throw on zero pivots.
LinearStats solve_block_system(const BlockMatrix& K, const std::vector<double>& rhs,
                               std::vector<double>& x, const BlockSolverOptions& opts);

} // namespace elastodyn
