#include "elastodyn/csr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace elastodyn {

void CsrMatrix::matvec(const double* x, double* y) const
{
    for (int r = 0; r < nrows; ++r) {
        double s = 0.0;
        for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

void CsrMatrix::matvec_add(const double* x, double* y, double s) const
{
    for (int r = 0; r < nrows; ++r) {
        double acc = 0.0;
        for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) acc += val[k] * x[col[k]];
        y[r] += s * acc;
    }
}

std::vector<double> CsrMatrix::diag() const
{
    std::vector<double> d(static_cast<std::size_t>(nrows), 0.0);
    for (int r = 0; r < nrows; ++r) {
        const int k = find(r, r);
        if (k >= 0) d[r] = val[k];
    }
    return d;
}

CsrMatrix CsrMatrix::transpose() const
{
    CsrMatrix t;
    t.nrows = ncols;
    t.ncols = nrows;
    t.rowptr.assign(static_cast<std::size_t>(ncols) + 1, 0);
    for (const int c : col) ++t.rowptr[c + 1];
    for (int r = 0; r < t.nrows; ++r) t.rowptr[r + 1] += t.rowptr[r];
    t.col.resize(col.size());
    t.val.resize(val.size());
    std::vector<int> next(t.rowptr.begin(), t.rowptr.end() - 1);
    for (int r = 0; r < nrows; ++r)
        for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) {
            const int pos = next[col[k]]++;
            t.col[pos] = r;
            t.val[pos] = val[k];
        }
    return t; // rows come out sorted because the source rows are scanned in order
}

int CsrMatrix::find(int r, int c) const
{
    const auto first = col.begin() + rowptr[r];
    const auto last = col.begin() + rowptr[r + 1];
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return -1;
    return static_cast<int>(it - col.begin());
}

void CsrMatrix::add(int r, int c, double v)
{
    const int k = find(r, c);
    assert(k >= 0 && "entry outside the assembled pattern");
    val[k] += v;
}

void CsrMatrix::set_zero() { std::fill(val.begin(), val.end(), 0.0); }

CsrMatrix CsrMatrix::from_triplets(int nrows, int ncols, const std::vector<int>& rows,
                                   const std::vector<int>& cols,
                                   const std::vector<double>& vals)
{
    assert(rows.size() == cols.size() && cols.size() == vals.size());
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a] != rows[b]) return rows[a] < rows[b];
        return cols[a] < cols[b];
    });

    CsrMatrix m;
    m.nrows = nrows;
    m.ncols = ncols;
    m.rowptr.assign(static_cast<std::size_t>(nrows) + 1, 0);
    int prev_r = -1, prev_c = -1;
    for (const std::size_t k : order) {
        const int r = rows[k], c = cols[k];
        if (r < 0 || r >= nrows || c < 0 || c >= ncols)
            throw std::out_of_range("triplet index out of range");
        if (r == prev_r && c == prev_c) {
            m.val.back() += vals[k];
        } else {
            m.col.push_back(c);
            m.val.push_back(vals[k]);
            ++m.rowptr[r + 1];
            prev_r = r;
            prev_c = c;
        }
    }
    for (int r = 0; r < nrows; ++r) m.rowptr[r + 1] += m.rowptr[r];
    return m;
}

CsrMatrix CsrMatrix::from_pattern(int nrows, int ncols,
                                  const std::vector<std::vector<int>>& pattern)
{
    assert(static_cast<int>(pattern.size()) == nrows);
    CsrMatrix m;
    m.nrows = nrows;
    m.ncols = ncols;
    m.rowptr.assign(static_cast<std::size_t>(nrows) + 1, 0);
    std::size_t nnz = 0;
    for (const auto& row : pattern) nnz += row.size();
    m.col.reserve(nnz);
    for (int r = 0; r < nrows; ++r) {
        assert(std::is_sorted(pattern[r].begin(), pattern[r].end()));
        m.col.insert(m.col.end(), pattern[r].begin(), pattern[r].end());
        m.rowptr[r + 1] = static_cast<int>(m.col.size());
    }
    m.val.assign(m.col.size(), 0.0);
    return m;
}

CsrMatrix csr_matmul(const CsrMatrix& a, const CsrMatrix& b)
{
    if (a.ncols != b.nrows) throw std::invalid_argument("csr_matmul: shape mismatch");
    CsrMatrix c;
    c.nrows = a.nrows;
    c.ncols = b.ncols;
    c.rowptr.assign(static_cast<std::size_t>(a.nrows) + 1, 0);

    std::vector<double> acc(static_cast<std::size_t>(b.ncols), 0.0);
    std::vector<int> marker(static_cast<std::size_t>(b.ncols), -1);
    std::vector<int> row_cols;
    for (int r = 0; r < a.nrows; ++r) {
        row_cols.clear();
        for (int ka = a.rowptr[r]; ka < a.rowptr[r + 1]; ++ka) {
            const int k = a.col[ka];
            const double av = a.val[ka];
            for (int kb = b.rowptr[k]; kb < b.rowptr[k + 1]; ++kb) {
                const int j = b.col[kb];
                if (marker[j] != r) {
                    marker[j] = r;
                    acc[j] = 0.0;
                    row_cols.push_back(j);
                }
                acc[j] += av * b.val[kb];
            }
        }
        std::sort(row_cols.begin(), row_cols.end());
        for (const int j : row_cols) {
            c.col.push_back(j);
            c.val.push_back(acc[j]);
        }
        c.rowptr[r + 1] = static_cast<int>(c.col.size());
    }
    return c;
}

CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta)
{
    if (a.nrows != b.nrows || a.ncols != b.ncols)
        throw std::invalid_argument("csr_add: shape mismatch");
    CsrMatrix c;
    c.nrows = a.nrows;
    c.ncols = a.ncols;
    c.rowptr.assign(static_cast<std::size_t>(a.nrows) + 1, 0);
    for (int r = 0; r < a.nrows; ++r) {
        int ka = a.rowptr[r], kb = b.rowptr[r];
        const int ea = a.rowptr[r + 1], eb = b.rowptr[r + 1];
        while (ka < ea || kb < eb) {
            int j;
            double v = 0.0;
            if (kb >= eb || (ka < ea && a.col[ka] < b.col[kb])) {
                j = a.col[ka];
                v = alpha * a.val[ka++];
            } else if (ka >= ea || b.col[kb] < a.col[ka]) {
                j = b.col[kb];
                v = beta * b.val[kb++];
            } else {
                j = a.col[ka];
                v = alpha * a.val[ka++] + beta * b.val[kb++];
            }
            c.col.push_back(j);
            c.val.push_back(v);
        }
        c.rowptr[r + 1] = static_cast<int>(c.col.size());
    }
    return c;
}

void csr_scale_rows(CsrMatrix& a, const std::vector<double>& s)
{
    assert(static_cast<int>(s.size()) == a.nrows);
    for (int r = 0; r < a.nrows; ++r)
        for (int k = a.rowptr[r]; k < a.rowptr[r + 1]; ++k) a.val[k] *= s[r];
}

void csr_scale_cols(CsrMatrix& a, const std::vector<double>& s)
{
    assert(static_cast<int>(s.size()) == a.ncols);
    for (std::size_t k = 0; k < a.col.size(); ++k) a.val[k] *= s[a.col[k]];
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b)
{
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double vec_norm(const std::vector<double>& a) { return std::sqrt(vec_dot(a, a)); }

void vec_axpy(double alpha, const std::vector<double>& x, std::vector<double>& y)
{
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

} // namespace elastodyn
