#pragma once

#include "elastodyn/csr.hpp"
#include "elastodyn/krylov.hpp"

// Zero-fill incomplete LU on the original sparsity pattern.  L has unit
// diagonal and is stored strictly below it; U occupies the diagonal and above.

namespace elastodyn {

class Ilu0Precond : public Preconditioner {
public:
    // Factorization runs at construction; throws std::runtime_error naming the
    // row on a zero pivot.
    explicit Ilu0Precond(const CsrMatrix& A);

    int size() const override { return f_.nrows; }
    void apply(const double* r, double* z) override;

private:
    CsrMatrix f_;            // factors in place of A's values
    std::vector<int> dpos_;  // position of the diagonal entry per row
};

} // namespace elastodyn
