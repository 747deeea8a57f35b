#include "elastodyn/precond.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace elastodyn {

CsrMatrix build_shat(const BlockMatrix& K, double eps_diag)
{
    const std::vector<double> da = K.A.diag();
    std::vector<double> inv_da(da.size());
    for (int i = 0; i < K.nv; ++i) {
        if (std::abs(da[i]) < eps_diag)
            throw std::runtime_error("build_shat: zero diagonal in momentum block at row " +
                                     std::to_string(i));
        inv_da[i] = 1.0 / da[i];
    }
    CsrMatrix sb = K.B; // diag(A)^{-1} B
    csr_scale_rows(sb, inv_da);
    const CsrMatrix cb = csr_matmul(K.C, sb);
    return csr_add(K.D, cb, 1.0, -1.0);
}

void SchurOperator::apply(const double* x, double* y) const
{
    const int nv = K_->nv;
    const int np = K_->np;
    std::vector<double> t(nv), z(nv, 0.0);
    K_->B.matvec(x, t.data());
    CsrOperator a_op(K_->A);
    const SolveResult res = gmres(a_op, a_precond_, t, z, cfg_);
    stats_->schur_applies += 1;
    stats_->inner_iters += res.iterations;
    // Inner non-convergence is absorbed by the outer flexible solve; the best
    // available iterate is used.
    K_->D.matvec(x, y);
    std::vector<double> cz(np);
    K_->C.matvec(z.data(), cz.data());
    for (int i = 0; i < np; ++i) y[i] -= cz[i];
}

ScrSolver::ScrSolver(const BlockMatrix& K, const ScrTolerances& tols, const AmgOptions& amg_a,
                     const AmgOptions& amg_s)
    : K_(&K), tols_(tols), shat_(build_shat(K))
{
    amg_a_ = std::make_unique<AmgPrecond>(K.A, amg_a);
    amg_s_ = std::make_unique<AmgPrecond>(shat_, amg_s);
}

void ScrSolver::solve(const std::vector<double>& r_v, const std::vector<double>& r_p,
                      std::vector<double>& x_v, std::vector<double>& x_p, LinearStats& stats)
{
    const int nv = K_->nv;
    const int np = K_->np;
    CsrOperator a_op(K_->A);

    // Step 1: intermediate velocity, A x_hat_v = r_v.
    std::vector<double> xhat(nv, 0.0);
    {
        const SolveResult res = gmres(a_op, amg_a_.get(), r_v, xhat, tols_.a);
        stats.a_solves += 1;
        stats.a_iters += res.iterations;
    }

    // Step 2: r_p <- r_p - C x_hat_v.
    std::vector<double> rp(np);
    K_->C.matvec(xhat.data(), rp.data());
    for (int i = 0; i < np; ++i) rp[i] = r_p[i] - rp[i];

    // Step 3: pressure solve.  With inner.rel_tol >= 1 the inner solver is
    // skipped and the sparse approximation S_hat stands in for S.
    x_p.assign(np, 0.0);
    if (tols_.inner.rel_tol >= 1.0) {
        CsrOperator s_op(shat_);
        const SolveResult res = gmres(s_op, amg_s_.get(), rp, x_p, tols_.s);
        stats.s_solves += 1;
        stats.s_iters += res.iterations;
    } else {
        SchurOperator s_op(*K_, *amg_a_, tols_.inner, stats);
        const SolveResult res = gmres(s_op, amg_s_.get(), rp, x_p, tols_.s);
        stats.s_solves += 1;
        stats.s_iters += res.iterations;
    }

    // Step 4: r_v <- r_v - B x_p.
    std::vector<double> rv(nv);
    K_->B.matvec(x_p.data(), rv.data());
    for (int i = 0; i < nv; ++i) rv[i] = r_v[i] - rv[i];

    // Step 5: final velocity, A x_v = r_v.
    x_v.assign(nv, 0.0);
    {
        const SolveResult res = gmres(a_op, amg_a_.get(), rv, x_v, tols_.a);
        stats.a_solves += 1;
        stats.a_iters += res.iterations;
    }
}

void NestedPrecond::apply(const double* r, double* z)
{
    const std::vector<double> rv(r, r + nv_);
    const std::vector<double> rp(r + nv_, r + nv_ + np_);
    std::vector<double> xv, xp;
    scr_->solve(rv, rp, xv, xp, *stats_);
    std::copy(xv.begin(), xv.end(), z);
    std::copy(xp.begin(), xp.end(), z + nv_);
}

SimplePrecond::SimplePrecond(const BlockMatrix& K, const ScrTolerances& tols,
                             const AmgOptions& amg_a, const AmgOptions& amg_s,
                             LinearStats& stats)
    : K_(&K), tols_(tols), shat_(build_shat(K)), stats_(&stats)
{
    const std::vector<double> da = K.A.diag();
    inv_diag_a_.resize(da.size());
    for (std::size_t i = 0; i < da.size(); ++i) inv_diag_a_[i] = 1.0 / da[i];
    amg_a_ = std::make_unique<AmgPrecond>(K.A, amg_a);
    amg_s_ = std::make_unique<AmgPrecond>(shat_, amg_s);
}

void SimplePrecond::apply(const double* r, double* z)
{
    const int nv = K_->nv;
    const int np = K_->np;
    CsrOperator a_op(K_->A);

    // Velocity predictor: A x_hat_v = r_v.
    std::vector<double> xhat(nv, 0.0);
    {
        const std::vector<double> rv(r, r + nv);
        const SolveResult res = gmres(a_op, amg_a_.get(), rv, xhat, tols_.a);
        stats_->a_solves += 1;
        stats_->a_iters += res.iterations;
    }

    // Pressure solve with the sparse Schur approximation.
    std::vector<double> rp(np);
    K_->C.matvec(xhat.data(), rp.data());
    for (int i = 0; i < np; ++i) rp[i] = r[nv + i] - rp[i];
    std::vector<double> xp(np, 0.0);
    {
        CsrOperator s_op(shat_);
        const SolveResult res = gmres(s_op, amg_s_.get(), rp, xp, tols_.s);
        stats_->s_solves += 1;
        stats_->s_iters += res.iterations;
    }

    // Velocity correction with the diagonal approximation of A^{-1}.
    std::vector<double> bp(nv);
    K_->B.matvec(xp.data(), bp.data());
    for (int i = 0; i < nv; ++i) z[i] = xhat[i] - inv_diag_a_[i] * bp[i];
    std::copy(xp.begin(), xp.end(), z + nv);
}

LinearStats solve_block_system(const BlockMatrix& K, const std::vector<double>& rhs,
                               std::vector<double>& x, const BlockSolverOptions& opts)
{
    const auto t0 = std::chrono::steady_clock::now();
    LinearStats stats;

    // Work on a scaled copy; the assembled system is left untouched.
    BlockMatrix Ks;
    Ks.nv = K.nv;
    Ks.np = K.np;
    Ks.A = K.A;
    Ks.B = K.B;
    Ks.C = K.C;
    Ks.D = K.D;
    std::vector<double> b = rhs;
    BlockScaling sc;
    if (opts.scale) {
        sc = compute_block_scaling(Ks, opts.eps_diag);
        scale_system(Ks, sc);
        scale_vector(b, sc);
    }

    x.assign(b.size(), 0.0);
    BlockOperator op(Ks);
    SolveResult res;
    switch (opts.precond) {
    case PrecondKind::Nested: {
        ScrSolver scr(Ks, opts.scr, opts.amg_a, opts.amg_s);
        NestedPrecond M(scr, Ks.nv, Ks.np, stats);
        res = fgmres(op, &M, b, x, opts.outer);
        break;
    }
    case PrecondKind::Simple: {
        SimplePrecond M(Ks, opts.scr, opts.amg_a, opts.amg_s, stats);
        res = fgmres(op, &M, b, x, opts.outer);
        break;
    }
    case PrecondKind::Ilu0: {
        const CsrMatrix mono = monolithic_csr(Ks);
        Ilu0Precond M(mono);
        res = gmres(op, &M, b, x, opts.outer);
        break;
    }
    case PrecondKind::Jacobi: {
        const CsrMatrix mono = monolithic_csr(Ks);
        JacobiPrecond M(mono);
        res = gmres(op, &M, b, x, opts.outer);
        break;
    }
    case PrecondKind::None:
        res = gmres(op, nullptr, b, x, opts.outer);
        break;
    }

    if (opts.scale) scale_vector(x, sc); // x = W x*

    stats.outer_iters = res.iterations;
    stats.converged = res.converged;
    stats.t_solve =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

} // namespace elastodyn
