#include "elastodyn/ilu0.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace elastodyn {

Ilu0Precond::Ilu0Precond(const CsrMatrix& A) : f_(A)
{
    if (A.nrows != A.ncols) throw std::invalid_argument("ilu0: matrix must be square");
    const int n = f_.nrows;
    dpos_.assign(n, -1);
    for (int r = 0; r < n; ++r) {
        dpos_[r] = f_.find(r, r);
        if (dpos_[r] < 0)
            throw std::runtime_error("ilu0: missing diagonal entry in row " +
                                     std::to_string(r));
    }

    for (int i = 1; i < n; ++i) {
        for (int kk = f_.rowptr[i]; kk < f_.rowptr[i + 1]; ++kk) {
            const int k = f_.col[kk];
            if (k >= i) break;
            const double piv = f_.val[dpos_[k]];
            if (piv == 0.0)
                throw std::runtime_error("ilu0: zero pivot at row " + std::to_string(k));
            const double lik = f_.val[kk] / piv;
            f_.val[kk] = lik;
            // Subtract lik * U(k, j) from row i, pattern intersection only.
            int pi = kk + 1;
            int pk = dpos_[k] + 1;
            const int ei = f_.rowptr[i + 1], ek = f_.rowptr[k + 1];
            while (pi < ei && pk < ek) {
                if (f_.col[pi] < f_.col[pk]) {
                    ++pi;
                } else if (f_.col[pi] > f_.col[pk]) {
                    ++pk;
                } else {
                    f_.val[pi] -= lik * f_.val[pk];
                    ++pi;
                    ++pk;
                }
            }
        }
        if (f_.val[dpos_[i]] == 0.0)
            throw std::runtime_error("ilu0: zero pivot at row " + std::to_string(i));
    }
}

void Ilu0Precond::apply(const double* r, double* z)
{
    const int n = f_.nrows;
    // Forward: L z = r (unit diagonal).
    for (int i = 0; i < n; ++i) {
        double acc = r[i];
        for (int kk = f_.rowptr[i]; kk < dpos_[i]; ++kk) acc -= f_.val[kk] * z[f_.col[kk]];
        z[i] = acc;
    }
    // Backward: U z = z.
    for (int i = n - 1; i >= 0; --i) {
        double acc = z[i];
        for (int kk = dpos_[i] + 1; kk < f_.rowptr[i + 1]; ++kk)
            acc -= f_.val[kk] * z[f_.col[kk]];
        z[i] = acc / f_.val[dpos_[i]];
    }
}

} // namespace elastodyn
