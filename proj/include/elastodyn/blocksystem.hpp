#pragma once

#include "elastodyn/csr.hpp"
#include "elastodyn/krylov.hpp"

#include <vector>

namespace elastodyn {

// Linearized saddle-point system in 2x2 block form,
//
//     [ A  B ] [ x_v ]   [ r_v ]
//     [ C  D ] [ x_p ] = [ r_p ],
//
// with A the velocity-velocity block (nv x nv), D the pressure-pressure block
// (np x np), and B/C the velocity-pressure couplings.  Rows and columns cover
// free degrees of freedom only; the monolithic ordering is velocities first,
// then pressures.
struct BlockMatrix {
    CsrMatrix A, B, C, D;
    int nv = 0;
    int np = 0;

    int size() const { return nv + np; }

    // y = [A B; C D] x with x = [x_v; x_p].
    void matvec(const double* x, double* y) const
    {
        A.matvec(x, y);
        B.matvec_add(x + nv, y, 1.0);
        C.matvec(x, y + nv);
        D.matvec_add(x + nv, y + nv, 1.0);
    }
};

// Matrix-free monolithic operator over a BlockMatrix.
class BlockOperator final : public LinearOperator {
  public:
    explicit BlockOperator(const BlockMatrix& K) : K_(&K) {}
    int size() const override { return K_->size(); }
    void apply(const double* x, double* y) const override { K_->matvec(x, y); }

  private:
    const BlockMatrix* K_;
};

// Assembles the four blocks into one (nv+np) x (nv+np) CSR matrix.
CsrMatrix monolithic_csr(const BlockMatrix& K);

// Symmetric diagonal scaling weights for the monolithic system.  Entry i is
// |K_ii|^{-1/2} when the diagonal exceeds eps_diag relative to the largest
// diagonal of its own block (velocity or pressure), and 1.0 otherwise, so
// only genuinely zero diagonals pass through unscaled.
struct BlockScaling {
    std::vector<double> w; // length nv + np
    int nv = 0;
    int np = 0;
};

BlockScaling compute_block_scaling(const BlockMatrix& K, double eps_diag = 1e-15);

// In-place two-sided scaling K <- W K W applied blockwise:
// A <- Wv A Wv, B <- Wv B Wp, C <- Wp C Wv, D <- Wp D Wp.
void scale_system(BlockMatrix& K, const BlockScaling& s);

// r <- W r (scaled right-hand side) and x <- W x* (solution recovery); both
// act on monolithic vectors of length nv + np.
void scale_vector(std::vector<double>& r, const BlockScaling& s);

} // namespace elastodyn
