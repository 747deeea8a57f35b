#pragma once

#include <vector>

#include "elastodyn/csr.hpp"

// Restarted GMRES / flexible GMRES with right preconditioning.  Operators may
// be matrix-free; preconditioner applications may mutate internal statistics,
// hence the non-const apply.

namespace elastodyn {

class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual int size() const = 0;
    virtual void apply(const double* x, double* y) const = 0;
};

class CsrOperator : public LinearOperator {
public:
    explicit CsrOperator(const CsrMatrix& m) : m_(&m) {}
    int size() const override { return m_->nrows; }
    void apply(const double* x, double* y) const override { m_->matvec(x, y); }

private:
    const CsrMatrix* m_;
};

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual int size() const = 0;
    // z = M^{-1} r
    virtual void apply(const double* r, double* z) = 0;
};

class IdentityPrecond : public Preconditioner {
public:
    explicit IdentityPrecond(int n) : n_(n) {}
    int size() const override { return n_; }
    void apply(const double* r, double* z) override
    {
        for (int i = 0; i < n_; ++i) z[i] = r[i];
    }

private:
    int n_;
};

class JacobiPrecond : public Preconditioner {
public:
    explicit JacobiPrecond(const CsrMatrix& m);
    int size() const override { return static_cast<int>(inv_diag_.size()); }
    void apply(const double* r, double* z) override
    {
        for (std::size_t i = 0; i < inv_diag_.size(); ++i) z[i] = inv_diag_[i] * r[i];
    }

private:
    std::vector<double> inv_diag_;
};

struct KrylovConfig {
    int restart = 50;
    int max_iters = 500;
    double rel_tol = 1e-6;
    double abs_tol = 1e-50;
};

struct SolveResult {
    bool converged = false;
    int iterations = 0;
    double initial_norm = 0.0;
    double final_norm = 0.0;
    std::vector<double> history; // residual-norm estimate per iteration
};

// Right-preconditioned restarted GMRES; x holds the initial guess on entry and
// the best iterate on exit.  Never throws on non-convergence.
SolveResult gmres(const LinearOperator& op, Preconditioner* M,
                  const std::vector<double>& b, std::vector<double>& x,
                  const KrylovConfig& cfg);

// Flexible variant: the preconditioner action may change between iterations.
SolveResult fgmres(const LinearOperator& op, Preconditioner* M,
                   const std::vector<double>& b, std::vector<double>& x,
                   const KrylovConfig& cfg);

} // namespace elastodyn
