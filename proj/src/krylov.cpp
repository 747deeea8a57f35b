#include "elastodyn/krylov.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace elastodyn {

JacobiPrecond::JacobiPrecond(const CsrMatrix& m)
{
    inv_diag_ = m.diag();
    for (auto& d : inv_diag_) d = (d != 0.0) ? 1.0 / d : 1.0;
}

namespace {

// Shared GMRES body.  In flexible mode the preconditioned directions are
// stored so the preconditioner may vary; otherwise a single preconditioner
// application reconstructs the update from the Krylov basis.
SolveResult run_gmres(const LinearOperator& op, Preconditioner* M,
                      const std::vector<double>& b, std::vector<double>& x,
                      const KrylovConfig& cfg, bool flexible)
{
    const int n = op.size();
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("gmres: rhs size mismatch");
    if (cfg.restart < 1) throw std::invalid_argument("gmres: restart must be >= 1");
    x.resize(static_cast<std::size_t>(n), 0.0);

    SolveResult res;
    std::vector<double> r(n);
    op.apply(x.data(), r.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double rnorm = vec_norm(r);
    res.initial_norm = rnorm;
    const double tol = std::max(cfg.rel_tol * rnorm, cfg.abs_tol);
    if (rnorm <= tol) {
        res.converged = true;
        res.final_norm = rnorm;
        return res;
    }

    const int m = cfg.restart;
    std::vector<std::vector<double>> V(static_cast<std::size_t>(m) + 1);
    std::vector<std::vector<double>> Z;
    if (flexible) Z.resize(static_cast<std::size_t>(m));
    std::vector<std::vector<double>> H(static_cast<std::size_t>(m));
    std::vector<double> cs(m), sn(m), g(static_cast<std::size_t>(m) + 1);
    std::vector<double> w(n), t(n);

    int total = 0;
    bool stagnated = false;
    while (total < cfg.max_iters && !stagnated) {
        const double beta = vec_norm(r);
        if (beta == 0.0) break;
        V[0].resize(n);
        for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        bool breakdown = false;
        while (j < m && total < cfg.max_iters) {
            if (M) {
                if (flexible) {
                    Z[j].resize(n);
                    M->apply(V[j].data(), Z[j].data());
                    op.apply(Z[j].data(), w.data());
                } else {
                    M->apply(V[j].data(), t.data());
                    op.apply(t.data(), w.data());
                }
            } else {
                op.apply(V[j].data(), w.data());
            }

            // Modified Gram-Schmidt with one selective reorthogonalization.
            auto& h = H[j];
            h.assign(static_cast<std::size_t>(j) + 2, 0.0);
            for (int i = 0; i <= j; ++i) {
                double hij = 0.0;
                for (int k = 0; k < n; ++k) hij += V[i][k] * w[k];
                h[i] = hij;
                for (int k = 0; k < n; ++k) w[k] -= hij * V[i][k];
            }
            double wnorm = 0.0;
            for (int k = 0; k < n; ++k) wnorm += w[k] * w[k];
            wnorm = std::sqrt(wnorm);
            double loss = 0.0;
            std::vector<double> corr(static_cast<std::size_t>(j) + 1);
            for (int i = 0; i <= j; ++i) {
                double c = 0.0;
                for (int k = 0; k < n; ++k) c += V[i][k] * w[k];
                corr[i] = c;
                loss = std::max(loss, std::abs(c));
            }
            if (wnorm > 0.0 && loss / wnorm > 1e-8) {
                for (int i = 0; i <= j; ++i) {
                    h[i] += corr[i];
                    for (int k = 0; k < n; ++k) w[k] -= corr[i] * V[i][k];
                }
                wnorm = vec_norm(w);
            }
            h[j + 1] = wnorm;

            if (wnorm > 1e-300) {
                V[j + 1].resize(n);
                for (int k = 0; k < n; ++k) V[j + 1][k] = w[k] / wnorm;
            } else {
                breakdown = true;
            }

            // Givens rotations keep the least-squares problem triangular.
            for (int i = 0; i < j; ++i) {
                const double hi = h[i], hi1 = h[i + 1];
                h[i] = cs[i] * hi + sn[i] * hi1;
                h[i + 1] = -sn[i] * hi + cs[i] * hi1;
            }
            const double denom = std::hypot(h[j], h[j + 1]);
            if (denom == 0.0) {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j] / denom;
                sn[j] = h[j + 1] / denom;
            }
            h[j] = denom;
            h[j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            ++total;
            ++j;
            const double est = std::abs(g[j]);
            res.history.push_back(est);
            if (est <= tol || breakdown) break;
        }

        // Back substitution for the cycle's update coefficients.
        std::vector<double> y(static_cast<std::size_t>(j), 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= H[k][i] * y[k];
            y[i] = (H[i][i] != 0.0) ? s / H[i][i] : 0.0;
        }
        if (flexible && M) {
            for (int i = 0; i < j; ++i) vec_axpy(y[i], Z[i], x);
        } else {
            std::fill(t.begin(), t.end(), 0.0);
            for (int i = 0; i < j; ++i)
                for (int k = 0; k < n; ++k) t[k] += y[i] * V[i][k];
            if (M) {
                M->apply(t.data(), w.data());
                for (int k = 0; k < n; ++k) x[k] += w[k];
            } else {
                for (int k = 0; k < n; ++k) x[k] += t[k];
            }
        }

        // True residual at the restart boundary guards against drift of the
        // least-squares estimate.
        op.apply(x.data(), r.data());
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        rnorm = vec_norm(r);
        if (rnorm <= tol) {
            res.converged = true;
            break;
        }
        if (breakdown) stagnated = true; // subspace exhausted without convergence
    }

    res.iterations = total;
    res.final_norm = rnorm;
    return res;
}

} // namespace

SolveResult gmres(const LinearOperator& op, Preconditioner* M,
                  const std::vector<double>& b, std::vector<double>& x,
                  const KrylovConfig& cfg)
{
    return run_gmres(op, M, b, x, cfg, false);
}

SolveResult fgmres(const LinearOperator& op, Preconditioner* M,
                   const std::vector<double>& b, std::vector<double>& x,
                   const KrylovConfig& cfg)
{
    return run_gmres(op, M, b, x, cfg, true);
}

} // namespace elastodyn
