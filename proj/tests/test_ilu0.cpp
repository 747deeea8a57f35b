#include "elastodyn/ilu0.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

using namespace elastodyn;

namespace {

CsrMatrix csr_from_dense(const Eigen::MatrixXd& a)
{
    std::vector<int> rows, cols;
    std::vector<double> vals;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) {
                rows.push_back(i);
                cols.push_back(j);
                vals.push_back(a(i, j));
            }
    return CsrMatrix::from_triplets(static_cast<int>(a.rows()),
                                    static_cast<int>(a.cols()), rows, cols, vals);
}

CsrMatrix poisson1d(int n)
{
    std::vector<int> rows, cols;
    std::vector<double> vals;
    for (int i = 0; i < n; ++i) {
        rows.push_back(i);
        cols.push_back(i);
        vals.push_back(2.0);
        if (i > 0) {
            rows.push_back(i);
            cols.push_back(i - 1);
            vals.push_back(-1.0);
        }
        if (i + 1 < n) {
            rows.push_back(i);
            cols.push_back(i + 1);
            vals.push_back(-1.0);
        }
    }
    return CsrMatrix::from_triplets(n, n, rows, cols, vals);
}

} // namespace

TEST(Ilu0, ExactOnLowerTriangularMatrix)
{
    Eigen::MatrixXd a(4, 4);
    a << 2, 0, 0, 0, //
        -1, 3, 0, 0, //
        0.5, 0, 1.5, 0, //
        1, -2, 0.25, 4;
    const CsrMatrix A = csr_from_dense(a);
    Ilu0Precond ilu(A);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
    const Eigen::VectorXd expected = a.fullPivLu().solve(b);
    std::vector<double> z(4);
    ilu.apply(b.data(), z.data());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(z[i], expected(i), 1e-13);
}

TEST(Ilu0, ExactOnDiagonalMatrix)
{
    const int n = 6;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = 1.0 + i;
    Ilu0Precond ilu(csr_from_dense(a));
    std::vector<double> b(n, 3.0), z(n);
    ilu.apply(b.data(), z.data());
    for (int i = 0; i < n; ++i) EXPECT_NEAR(z[i], 3.0 / (1.0 + i), 1e-15);
}

// With a full pattern there is no dropped fill, so ILU(0) is a complete LU
// and the application is a direct solve.
TEST(Ilu0, FullPatternEqualsCompleteFactorization)
{
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 8;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = dist(gen);
    a += 4.0 * Eigen::MatrixXd::Identity(n, n); // keep pivots healthy
    Ilu0Precond ilu(csr_from_dense(a));
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = dist(gen);
    const Eigen::VectorXd expected = a.fullPivLu().solve(b);
    std::vector<double> z(n);
    ilu.apply(b.data(), z.data());
    for (int i = 0; i < n; ++i) EXPECT_NEAR(z[i], expected(i), 1e-10);
}

TEST(Ilu0, ReducesKrylovIterationsOnPoisson)
{
    const int n = 200;
    const CsrMatrix A = poisson1d(n);
    std::vector<double> b(n, 1.0);
    KrylovConfig cfg;
    cfg.restart = 200;
    cfg.max_iters = 400;
    cfg.rel_tol = 1e-10;

    CsrOperator op(A);
    std::vector<double> x0(n, 0.0), x1(n, 0.0);
    IdentityPrecond id(n);
    const SolveResult plain = gmres(op, &id, b, x0, cfg);
    Ilu0Precond ilu(A);
    const SolveResult prec = gmres(op, &ilu, b, x1, cfg);
    ASSERT_TRUE(prec.converged);
    // Tridiagonal pattern -> no fill dropped -> exact solve in one iteration.
    EXPECT_LE(prec.iterations, 2);
    EXPECT_GT(plain.iterations, 10 * prec.iterations);
}

TEST(Ilu0, ThrowsOnZeroPivot)
{
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, //
        1, 0;
    EXPECT_THROW(Ilu0Precond ilu(csr_from_dense(a)), std::runtime_error);
}

TEST(Ilu0, ApplyIsLinear)
{
    const CsrMatrix A = poisson1d(30);
    Ilu0Precond ilu(A);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> r1(30), r2(30), r12(30), z1(30), z2(30), z12(30);
    for (int i = 0; i < 30; ++i) {
        r1[i] = dist(gen);
        r2[i] = dist(gen);
        r12[i] = 3.0 * r1[i] - 0.5 * r2[i];
    }
    ilu.apply(r1.data(), z1.data());
    ilu.apply(r2.data(), z2.data());
    ilu.apply(r12.data(), z12.data());
    for (int i = 0; i < 30; ++i)
        EXPECT_NEAR(z12[i], 3.0 * z1[i] - 0.5 * z2[i], 1e-12);
}
