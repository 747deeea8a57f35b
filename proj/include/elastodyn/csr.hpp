#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Compressed sparse row storage with sorted, duplicate-free column indices per
// row.  Assembly happens against a fixed pattern: build the skeleton from
// adjacency lists once, then accumulate with add()/coeff().

namespace elastodyn {

struct CsrMatrix {
    int nrows = 0;
    int ncols = 0;
    std::vector<int> rowptr; // size nrows + 1
    std::vector<int> col;    // size nnz, sorted within each row
    std::vector<double> val; // size nnz

    std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }

    // y = A x
    void matvec(const double* x, double* y) const;
    // y += s * A x
    void matvec_add(const double* x, double* y, double s = 1.0) const;

    std::vector<double> diag() const;
    CsrMatrix transpose() const;

    // Index into val for entry (r, c); -1 if not in the pattern.
    int find(int r, int c) const;
    // Accumulate into an existing pattern entry; asserts the entry exists.
    void add(int r, int c, double v);

    void set_zero();

    // Builds from possibly unsorted, possibly duplicated (summed) triplets.
    static CsrMatrix from_triplets(int nrows, int ncols,
                                   const std::vector<int>& rows,
                                   const std::vector<int>& cols,
                                   const std::vector<double>& vals);

    // Skeleton with the given per-row sorted unique column lists, zero values.
    static CsrMatrix from_pattern(int nrows, int ncols,
                                  const std::vector<std::vector<int>>& pattern);
};

// C = A * B
CsrMatrix csr_matmul(const CsrMatrix& a, const CsrMatrix& b);
// C = alpha*A + beta*B (patterns merged)
CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta);
// Scales row i by s[i] (in place).
void csr_scale_rows(CsrMatrix& a, const std::vector<double>& s);
// Scales column j by s[j] (in place).
void csr_scale_cols(CsrMatrix& a, const std::vector<double>& s);

// Dense vector helpers shared by the solvers.
double vec_dot(const std::vector<double>& a, const std::vector<double>& b);
double vec_norm(const std::vector<double>& a);
void vec_axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);

} // namespace elastodyn
