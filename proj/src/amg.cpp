#include "elastodyn/amg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace elastodyn {

// Rank-revealing coarse solve.  Near-singular coarse matrices appear when a
// block is assembled in a degenerate regime (e.g. a nearly incompressible
// pressure Schur approximation at a tiny time step); a plain LU solve would
// amplify rounding noise in the null-ish directions by the full condition
// number and poison the cycle.  The minimum-norm least-squares solve caps the
// amplification by simply dropping directions below the rank threshold.
struct AmgHierarchy::CoarseSolver {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
};

AmgHierarchy::~AmgHierarchy() = default;
AmgHierarchy::AmgHierarchy(AmgHierarchy&&) noexcept = default;
AmgHierarchy& AmgHierarchy::operator=(AmgHierarchy&&) noexcept = default;

namespace {

// Node-level strength graph: rows are grouped into nodes via node_of_row; the
// connection weight is the Frobenius norm of the coupling block.  An edge is
// strong when s_IJ > theta * sqrt(s_II * s_JJ); the result is symmetrized.
std::vector<std::vector<int>> strong_neighbors(const CsrMatrix& A,
                                               const std::vector<int>& node_of_row,
                                               int n_nodes, double theta)
{
    std::vector<double> diag_w(n_nodes, 0.0);
    // First pass: diagonal block weights.
    for (int r = 0; r < A.nrows; ++r) {
        const int I = node_of_row[r];
        for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k) {
            if (node_of_row[A.col[k]] == I) diag_w[I] += A.val[k] * A.val[k];
        }
    }
    std::vector<std::vector<int>> nbr(n_nodes);
    // Second pass: off-diagonal blocks, accumulated row by row (rows of one
    // node are contiguous, so node rows are visited consecutively).
    std::vector<double> acc(n_nodes, 0.0);
    std::vector<int> touched;
    int r = 0;
    for (int I = 0; I < n_nodes; ++I) {
        touched.clear();
        for (; r < A.nrows && node_of_row[r] == I; ++r) {
            for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k) {
                const int J = node_of_row[A.col[k]];
                if (J == I) continue;
                if (acc[J] == 0.0) touched.push_back(J);
                acc[J] += A.val[k] * A.val[k];
            }
        }
        for (const int J : touched) {
            const double s2 = acc[J];
            acc[J] = 0.0;
            if (diag_w[I] <= 0.0 || diag_w[J] <= 0.0) continue;
            // diag_w holds squared Frobenius norms, hence the quarter power.
            if (std::sqrt(s2) > theta * std::pow(diag_w[I] * diag_w[J], 0.25))
                nbr[I].push_back(J);
        }
    }
    // Symmetrize.
    std::vector<std::vector<int>> sym(n_nodes);
    for (int I = 0; I < n_nodes; ++I)
        for (const int J : nbr[I]) {
            sym[I].push_back(J);
            sym[J].push_back(I);
        }
    for (auto& lst : sym) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
    return sym;
}

// Greedy aggregation; returns the aggregate id per node and the count, or 0
// aggregates when no coarsening is possible.
int aggregate(const std::vector<std::vector<int>>& nbr, std::vector<int>& agg_of)
{
    const int n = static_cast<int>(nbr.size());
    agg_of.assign(n, -1);
    int n_agg = 0;
    // Pass 1: seed aggregates from nodes whose neighborhood is untouched.
    for (int i = 0; i < n; ++i) {
        if (agg_of[i] >= 0 || nbr[i].empty()) continue;
        bool clean = true;
        for (const int j : nbr[i])
            if (agg_of[j] >= 0) {
                clean = false;
                break;
            }
        if (!clean) continue;
        agg_of[i] = n_agg;
        for (const int j : nbr[i]) agg_of[j] = n_agg;
        ++n_agg;
    }
    // Pass 2: attach stragglers to a neighboring aggregate.
    for (int i = 0; i < n; ++i) {
        if (agg_of[i] >= 0) continue;
        for (const int j : nbr[i])
            if (agg_of[j] >= 0) {
                agg_of[i] = agg_of[j];
                break;
            }
    }
    // Pass 3: isolated leftovers become singletons.
    for (int i = 0; i < n; ++i)
        if (agg_of[i] < 0) agg_of[i] = n_agg++;
    return n_agg;
}

// Tentative prolongator via per-aggregate orthonormalization of the
// near-nullspace block; B is n x k (k = nullspace dimension), and the coarse
// nullspace (n_agg*k x k) is returned through Bc.
CsrMatrix tentative_prolongator(int nrows, int k, const std::vector<int>& agg_of_row,
                                int n_agg, const std::vector<double>& B,
                                std::vector<double>& Bc)
{
    std::vector<std::vector<int>> rows_of(n_agg);
    for (int r = 0; r < nrows; ++r) rows_of[agg_of_row[r]].push_back(r);

    std::vector<int> trows, tcols;
    std::vector<double> tvals;
    Bc.assign(static_cast<std::size_t>(n_agg) * k * k, 0.0);

    std::vector<double> Q; // |rows| x k, column-major per aggregate
    for (int a = 0; a < n_agg; ++a) {
        const auto& rows = rows_of[a];
        const int nr = static_cast<int>(rows.size());
        Q.assign(static_cast<std::size_t>(nr) * k, 0.0);
        for (int c = 0; c < k; ++c)
            for (int r = 0; r < nr; ++r)
                Q[c * nr + r] = B[static_cast<std::size_t>(rows[r]) * k + c];
        // Modified Gram-Schmidt; R factor becomes the coarse nullspace block.
        for (int c = 0; c < k; ++c) {
            for (int c2 = 0; c2 < c; ++c2) {
                double d = 0.0;
                for (int r = 0; r < nr; ++r) d += Q[c2 * nr + r] * Q[c * nr + r];
                Bc[(static_cast<std::size_t>(a) * k + c2) * k + c] = d;
                for (int r = 0; r < nr; ++r) Q[c * nr + r] -= d * Q[c2 * nr + r];
            }
            double nrm = 0.0;
            for (int r = 0; r < nr; ++r) nrm += Q[c * nr + r] * Q[c * nr + r];
            nrm = std::sqrt(nrm);
            Bc[(static_cast<std::size_t>(a) * k + c) * k + c] = nrm;
            if (nrm > 1e-14) {
                for (int r = 0; r < nr; ++r) Q[c * nr + r] /= nrm;
            } else {
                for (int r = 0; r < nr; ++r) Q[c * nr + r] = 0.0;
            }
        }
        for (int c = 0; c < k; ++c)
            for (int r = 0; r < nr; ++r)
                if (Q[c * nr + r] != 0.0) {
                    trows.push_back(rows[r]);
                    tcols.push_back(a * k + c);
                    tvals.push_back(Q[c * nr + r]);
                }
    }
    return CsrMatrix::from_triplets(nrows, n_agg * k, trows, tcols, tvals);
}

double estimate_spectral_radius(const CsrMatrix& A, const std::vector<double>& inv_diag)
{
    const int n = A.nrows;
    std::vector<double> v(n, 1.0), w(n);
    double lambda = 1.0;
    for (int it = 0; it < 10; ++it) {
        A.matvec(v.data(), w.data());
        for (int i = 0; i < n; ++i) w[i] *= inv_diag[i];
        const double nrm = vec_norm(w);
        if (nrm == 0.0) return 1.0;
        lambda = nrm / vec_norm(v);
        const double inv = 1.0 / nrm;
        for (int i = 0; i < n; ++i) v[i] = w[i] * inv;
    }
    return lambda;
}

} // namespace

AmgHierarchy AmgHierarchy::build(const CsrMatrix& A0, const AmgOptions& opts)
{
    if (A0.nrows != A0.ncols) throw std::invalid_argument("amg: matrix must be square");
    const int k = opts.block_size;
    if (k < 1) throw std::invalid_argument("amg: block size must be positive");

    AmgHierarchy h;
    h.opts_ = opts;

    // Fine-level row grouping: explicit map if given, else consecutive runs
    // of block_size rows.
    std::vector<int> node_of_row;
    std::vector<int> comp_of_row;
    if (!opts.row_to_node.empty()) {
        if (static_cast<int>(opts.row_to_node.size()) != A0.nrows ||
            static_cast<int>(opts.row_component.size()) != A0.nrows)
            throw std::invalid_argument("amg: row grouping arrays must match matrix size");
        node_of_row = opts.row_to_node;
        comp_of_row = opts.row_component;
    } else {
        if (A0.nrows % k != 0)
            throw std::invalid_argument("amg: rows not divisible by block size");
        node_of_row.resize(A0.nrows);
        comp_of_row.resize(A0.nrows);
        for (int r = 0; r < A0.nrows; ++r) {
            node_of_row[r] = r / k;
            comp_of_row[r] = r % k;
        }
    }

    // Translational near-nullspace: one column per in-node component.
    std::vector<double> B(static_cast<std::size_t>(A0.nrows) * k, 0.0);
    for (int r = 0; r < A0.nrows; ++r)
        B[static_cast<std::size_t>(r) * k + comp_of_row[r]] = 1.0;

    CsrMatrix A = A0;
    while (A.nrows > opts.coarse_max_rows &&
           static_cast<int>(h.levels_.size()) + 1 < opts.max_levels) {
        const int n_nodes = node_of_row.empty() ? 0 : node_of_row.back() + 1;
        const auto nbr = strong_neighbors(A, node_of_row, n_nodes, opts.strength_theta);
        std::vector<int> agg_of_node;
        const int n_agg = aggregate(nbr, agg_of_node);
        if (n_agg <= 0 || n_agg >= n_nodes) {
            if (h.levels_.empty()) {
                if (!opts.quiet)
                    std::cerr << "amg: aggregation produced no coarsening; "
                                 "falling back to a diagonal preconditioner\n";
                h.fallback_ = true;
                h.fallback_inv_diag_ = A0.diag();
                for (auto& d : h.fallback_inv_diag_) d = (d != 0.0) ? 1.0 / d : 1.0;
                return h;
            }
            break;
        }

        std::vector<int> agg_of_row(A.nrows);
        for (int r = 0; r < A.nrows; ++r) agg_of_row[r] = agg_of_node[node_of_row[r]];
        std::vector<double> Bc;
        CsrMatrix P = tentative_prolongator(A.nrows, k, agg_of_row, n_agg, B, Bc);

        Level lv;
        lv.inv_diag = A.diag();
        for (auto& d : lv.inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
        if (opts.smooth_prolongator) {
            const double lambda = estimate_spectral_radius(A, lv.inv_diag);
            const double omega = 4.0 / (3.0 * std::max(lambda, 1e-12));
            CsrMatrix AP = csr_matmul(A, P);
            csr_scale_rows(AP, lv.inv_diag);
            P = csr_add(P, AP, 1.0, -omega);
        }
        CsrMatrix R = P.transpose();
        CsrMatrix Ac = csr_matmul(R, csr_matmul(A, P));

        lv.A = std::move(A);
        lv.P = std::move(P);
        lv.R = std::move(R);
        h.levels_.push_back(std::move(lv));

        A = std::move(Ac);
        B = std::move(Bc);
        // Coarse levels carry k rows per aggregate in fixed consecutive runs.
        node_of_row.resize(A.nrows);
        comp_of_row.resize(A.nrows);
        for (int r = 0; r < A.nrows; ++r) {
            node_of_row[r] = r / k;
            comp_of_row[r] = r % k;
        }
    }

    // Coarsest level: dense factorization.
    {
        Level lv;
        lv.A = std::move(A);
        lv.inv_diag = lv.A.diag();
        for (auto& d : lv.inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
        h.levels_.push_back(std::move(lv));
    }
    const CsrMatrix& Ac = h.levels_.back().A;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(Ac.nrows, Ac.ncols);
    for (int r = 0; r < Ac.nrows; ++r)
        for (int kk = Ac.rowptr[r]; kk < Ac.rowptr[r + 1]; ++kk)
            dense(r, Ac.col[kk]) = Ac.val[kk];
    h.coarse_ = std::make_unique<CoarseSolver>();
    h.coarse_->cod.setThreshold(1e-12);
    h.coarse_->cod.compute(dense);
    return h;
}

void AmgHierarchy::smooth(const Level& lv, const double* b, double* z,
                          std::vector<double>& scratch, int sweeps) const
{
    const int n = lv.A.nrows;
    if (opts_.smoother == AmgOptions::Smoother::Jacobi) {
        for (int s = 0; s < sweeps; ++s) {
            lv.A.matvec(z, scratch.data());
            for (int i = 0; i < n; ++i)
                z[i] += opts_.jacobi_weight * lv.inv_diag[i] * (b[i] - scratch[i]);
        }
        return;
    }
    // Symmetric Gauss-Seidel: one sweep = forward then backward.
    for (int s = 0; s < sweeps; ++s) {
        for (int i = 0; i < n; ++i) {
            double acc = b[i];
            for (int kk = lv.A.rowptr[i]; kk < lv.A.rowptr[i + 1]; ++kk)
                if (lv.A.col[kk] != i) acc -= lv.A.val[kk] * z[lv.A.col[kk]];
            z[i] = acc * lv.inv_diag[i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double acc = b[i];
            for (int kk = lv.A.rowptr[i]; kk < lv.A.rowptr[i + 1]; ++kk)
                if (lv.A.col[kk] != i) acc -= lv.A.val[kk] * z[lv.A.col[kk]];
            z[i] = acc * lv.inv_diag[i];
        }
    }
}

void AmgHierarchy::cycle(int level, const double* r, double* z) const
{
    const Level& lv = levels_[level];
    const int n = lv.A.nrows;
    if (level == static_cast<int>(levels_.size()) - 1) {
        Eigen::Map<const Eigen::VectorXd> rv(r, n);
        Eigen::VectorXd sol = coarse_->cod.solve(rv);
        for (int i = 0; i < n; ++i) z[i] = sol[i];
        return;
    }

    std::fill(z, z + n, 0.0);
    std::vector<double> scratch(n);
    smooth(lv, r, z, scratch, opts_.pre_sweeps);

    lv.A.matvec(z, scratch.data());
    for (int i = 0; i < n; ++i) scratch[i] = r[i] - scratch[i];
    const int nc = lv.R.nrows;
    std::vector<double> rc(nc), zc(nc);
    lv.R.matvec(scratch.data(), rc.data());
    cycle(level + 1, rc.data(), zc.data());
    std::vector<double> corr(n);
    lv.P.matvec(zc.data(), corr.data());
    for (int i = 0; i < n; ++i) z[i] += corr[i];

    smooth(lv, r, z, scratch, opts_.post_sweeps);
}

void AmgHierarchy::vcycle(const double* r, double* z) const
{
    if (fallback_) {
        for (std::size_t i = 0; i < fallback_inv_diag_.size(); ++i)
            z[i] = fallback_inv_diag_[i] * r[i];
        return;
    }
    cycle(0, r, z);
}

} // namespace elastodyn
