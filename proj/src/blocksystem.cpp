#include "elastodyn/blocksystem.hpp"

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace elastodyn {

CsrMatrix monolithic_csr(const BlockMatrix& K)
{
    const int nv = K.nv;
    const int np = K.np;
    const int n = nv + np;
    CsrMatrix M;
    M.nrows = n;
    M.ncols = n;
    M.rowptr.assign(n + 1, 0);
    for (int r = 0; r < nv; ++r)
        M.rowptr[r + 1] = (K.A.rowptr[r + 1] - K.A.rowptr[r]) +
                          (K.B.rowptr[r + 1] - K.B.rowptr[r]);
    for (int r = 0; r < np; ++r)
        M.rowptr[nv + r + 1] = (K.C.rowptr[r + 1] - K.C.rowptr[r]) +
                               (K.D.rowptr[r + 1] - K.D.rowptr[r]);
    for (int r = 0; r < n; ++r) M.rowptr[r + 1] += M.rowptr[r];
    M.col.resize(M.rowptr[n]);
    M.val.resize(M.rowptr[n]);
    for (int r = 0; r < nv; ++r) {
        int out = M.rowptr[r];
        for (int k = K.A.rowptr[r]; k < K.A.rowptr[r + 1]; ++k, ++out) {
            M.col[out] = K.A.col[k];
            M.val[out] = K.A.val[k];
        }
        for (int k = K.B.rowptr[r]; k < K.B.rowptr[r + 1]; ++k, ++out) {
            M.col[out] = nv + K.B.col[k];
            M.val[out] = K.B.val[k];
        }
    }
    for (int r = 0; r < np; ++r) {
        int out = M.rowptr[nv + r];
        for (int k = K.C.rowptr[r]; k < K.C.rowptr[r + 1]; ++k, ++out) {
            M.col[out] = K.C.col[k];
            M.val[out] = K.C.val[k];
        }
        for (int k = K.D.rowptr[r]; k < K.D.rowptr[r + 1]; ++k, ++out) {
            M.col[out] = nv + K.D.col[k];
            M.val[out] = K.D.val[k];
        }
    }
    return M;
}

BlockScaling compute_block_scaling(const BlockMatrix& K, double eps_diag)
{
    // The degeneracy guard must be relative to the block's own magnitude: the
    // natural scale of the pressure diagonal shrinks with the time step and
    // the compressibility, and an absolute cutoff would exempt the smallest
    // rows (e.g. corner nodes with tiny basis-function support) from
    // equilibration, leaving them orders of magnitude below the rest of the
    // scaled system and the Schur complement numerically singular.
    BlockScaling s;
    s.nv = K.nv;
    s.np = K.np;
    s.w.assign(static_cast<std::size_t>(K.nv) + K.np, 1.0);
    const std::vector<double> da = K.A.diag();
    const std::vector<double> dd = K.D.diag();
    double amax = 0.0, dmax = 0.0;
    for (double v : da) amax = std::max(amax, std::abs(v));
    for (double v : dd) dmax = std::max(dmax, std::abs(v));
    // Strict comparison: a block whose diagonal is absent altogether
    // (dmax == 0) stays unscaled instead of collapsing to 1/sqrt(0).
    for (int i = 0; i < K.nv; ++i)
        if (std::abs(da[i]) > eps_diag * amax) s.w[i] = 1.0 / std::sqrt(std::abs(da[i]));
    for (int i = 0; i < K.np; ++i)
        if (std::abs(dd[i]) > eps_diag * dmax) s.w[K.nv + i] = 1.0 / std::sqrt(std::abs(dd[i]));
    return s;
}

namespace {

void scale_block(CsrMatrix& M, const double* wrow, const double* wcol)
{
    for (int r = 0; r < M.nrows; ++r)
        for (int k = M.rowptr[r]; k < M.rowptr[r + 1]; ++k)
            M.val[k] *= wrow[r] * wcol[M.col[k]];
}

} // namespace

void scale_system(BlockMatrix& K, const BlockScaling& s)
{
    if (s.nv != K.nv || s.np != K.np)
        throw std::invalid_argument("scale_system: scaling does not match system");
    const double* wv = s.w.data();
    const double* wp = s.w.data() + s.nv;
    scale_block(K.A, wv, wv);
    scale_block(K.B, wv, wp);
    scale_block(K.C, wp, wv);
    scale_block(K.D, wp, wp);
}

void scale_vector(std::vector<double>& r, const BlockScaling& s)
{
    assert(r.size() == s.w.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= s.w[i];
}

} // namespace elastodyn
