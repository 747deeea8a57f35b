#pragma once

#include <memory>
#include <vector>

#include "elastodyn/csr.hpp"
#include "elastodyn/krylov.hpp"

// Smoothed-aggregation algebraic multigrid.  Vector-valued problems aggregate
// nodes (block_size consecutive rows per node) and carry the translational
// near-nullspace through the hierarchy; the coarsest level is solved densely.
// One V-cycle per preconditioner application.

namespace elastodyn {

struct AmgOptions {
    // Near-nullspace dimension (number of translational modes carried through
    // the hierarchy).  Without an explicit row grouping, rows are grouped in
    // consecutive runs of block_size.
    int block_size = 1;
    // Optional fine-level grouping for systems where nodes carry different
    // numbers of rows (e.g. after eliminating constrained components):
    // row_to_node[r] is the node of row r (nodes contiguous, ascending),
    // row_component[r] in [0, block_size) selects its translational mode.
    std::vector<int> row_to_node;
    std::vector<int> row_component;
    double strength_theta = 0.08;
    int max_levels = 12;
    int coarse_max_rows = 200;   // stop coarsening at or below this many rows
    enum class Smoother { Jacobi, SymmetricGaussSeidel };
    Smoother smoother = Smoother::SymmetricGaussSeidel;
    double jacobi_weight = 2.0 / 3.0;
    int pre_sweeps = 1;
    int post_sweeps = 1;
    bool smooth_prolongator = true;
    bool quiet = false; // suppress the aggregation-fallback warning
};

class AmgHierarchy {
public:
    AmgHierarchy() = default;
    ~AmgHierarchy();
    AmgHierarchy(AmgHierarchy&&) noexcept;
    AmgHierarchy& operator=(AmgHierarchy&&) noexcept;

    static AmgHierarchy build(const CsrMatrix& A, const AmgOptions& opts = {});

    // z = (one V-cycle applied to r), zero initial guess.
    void vcycle(const double* r, double* z) const;

    int n_levels() const { return static_cast<int>(levels_.size()); }
    // True when aggregation failed and the cycle degenerated to a diagonal solve.
    bool diagonal_fallback() const { return fallback_; }
    int level_rows(int level) const { return levels_[level].A.nrows; }

private:
    struct Level {
        CsrMatrix A;
        CsrMatrix P;  // to this level from the next coarser one
        CsrMatrix R;  // P transposed
        std::vector<double> inv_diag;
    };
    struct CoarseSolver;

    void smooth(const Level& lv, const double* b, double* z,
                std::vector<double>& scratch, int sweeps) const;
    void cycle(int level, const double* r, double* z) const;

    std::vector<Level> levels_;
    std::unique_ptr<CoarseSolver> coarse_;
    AmgOptions opts_;
    bool fallback_ = false;
    std::vector<double> fallback_inv_diag_;
};

class AmgPrecond : public Preconditioner {
public:
    AmgPrecond(const CsrMatrix& A, const AmgOptions& opts = {})
        : n_(A.nrows), h_(AmgHierarchy::build(A, opts))
    {
    }
    int size() const override { return n_; }
    void apply(const double* r, double* z) override { h_.vcycle(r, z); }
    const AmgHierarchy& hierarchy() const { return h_; }

private:
    int n_;
    AmgHierarchy h_;
};

} // namespace elastodyn
