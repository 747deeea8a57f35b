#include "elastodyn/materials.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace elastodyn;

namespace {

// Random deformation gradient near the identity with a safely positive
// determinant.
Mat3 random_F(std::mt19937& gen, double amplitude = 0.3)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (;;) {
        Mat3 F = kIdentity3;
        for (int k = 0; k < 9; ++k) F[k] += amplitude * dist(gen);
        if (det3(F) > 0.3) return F;
    }
}

Mat3 random_dir(std::mt19937& gen)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat3 d{};
    for (int k = 0; k < 9; ++k) d[k] = dist(gen);
    return d;
}

// Isochoric stored energy as a function of F alone.
double energy_of_F(const IsochoricModel& iso, const Mat3& F)
{
    return iso.energy(Kinematics::from_F(F).Ctilde);
}

// Central finite difference of the stored energy along dF.
double fd_energy_dir(const IsochoricModel& iso, const Mat3& F, const Mat3& dF,
                     double h)
{
    return (energy_of_F(iso, madd3(F, dF, h)) - energy_of_F(iso, madd3(F, dF, -h))) /
           (2.0 * h);
}

DispersedFiberIsochoric make_test_fibers(double mu = 2.0, double k1 = 1.5,
                                         double k2 = 0.8, double kd = 0.1)
{
    const double phi = 40.02 * M_PI / 180.0;
    const Vec3 a1 = {std::cos(phi), std::sin(phi), 0.0};
    const Vec3 a2 = {std::cos(phi), -std::sin(phi), 0.0};
    return DispersedFiberIsochoric(mu, k1, k2, kd, a1, a2);
}

} // namespace

// ---------------------------------------------------------------------------
// Volumetric models.

TEST(Volumetric, CompressibleClosedFormsAtZeroPressure)
{
    const double rho0 = 1.1, kappa = 3.7;
    const CompressibleVolumetric vol(rho0, kappa);
    EXPECT_DOUBLE_EQ(vol.rho(0.0), rho0);
    EXPECT_DOUBLE_EQ(vol.beta(0.0), 1.0 / kappa);
    EXPECT_DOUBLE_EQ(vol.drho_dp(0.0), rho0 / kappa);
    EXPECT_DOUBLE_EQ(vol.dbeta_dp(0.0), 0.0);
}

// rho and beta must be the first and (negated, normalized) second derivative
// of the volumetric potential; the potential itself is the oracle.
TEST(Volumetric, DensityAndCompressibilityDeriveFromPotential)
{
    const double rho0 = 1.2, kappa = 2.5;
    const CompressibleVolumetric vol(rho0, kappa);
    const double h = 1e-5;
    for (double p : {0.0, 0.5, -0.5, 2.5, -2.5, 7.5, -7.5}) {
        const double g1 = (vol.gibbs(p + h) - vol.gibbs(p - h)) / (2.0 * h);
        const double g2 =
            (vol.gibbs(p + h) - 2.0 * vol.gibbs(p) + vol.gibbs(p - h)) / (h * h);
        EXPECT_NEAR(vol.rho(p), 1.0 / g1, 1e-6 * vol.rho(p)) << "p=" << p;
        EXPECT_NEAR(vol.beta(p), -g2 / g1, 1e-4 / kappa) << "p=" << p;
    }
}

TEST(Volumetric, CompressibleDerivativesMatchFiniteDifferences)
{
    const double rho0 = 0.9, kappa = 4.0;
    const CompressibleVolumetric vol(rho0, kappa);
    const double h = 1e-6;
    for (double p : {0.0, 1.0, -1.0, 12.0, -12.0}) {
        const double fd_rho = (vol.rho(p + h) - vol.rho(p - h)) / (2.0 * h);
        const double fd_beta = (vol.beta(p + h) - vol.beta(p - h)) / (2.0 * h);
        EXPECT_NEAR(vol.drho_dp(p), fd_rho, 1e-6 * std::abs(fd_rho) + 1e-12);
        EXPECT_NEAR(vol.dbeta_dp(p), fd_beta, 1e-6 * std::abs(fd_beta) + 1e-12);
    }
}

TEST(Volumetric, CompressibleIsCancellationFreeAtLargeNegativePressure)
{
    const double rho0 = 1.0, kappa = 1.0;
    const CompressibleVolumetric vol(rho0, kappa);
    // rho(p) = rho0 (s + p)/kappa = rho0 * kappa/(s - p): tiny but positive
    // and accurate for p << -kappa.
    const double p = -1e8;
    const double expected = rho0 * kappa / (std::sqrt(p * p + 1.0) - p);
    EXPECT_GT(vol.rho(p), 0.0);
    EXPECT_NEAR(vol.rho(p), expected, 1e-12 * expected);
    EXPECT_NEAR(vol.rho(p), rho0 / (2e8), 1e-3 * vol.rho(p));
}

TEST(Volumetric, IncompressibleHasConstantDensityAndZeroCompressibility)
{
    const double rho0 = 1.0;
    const IncompressibleVolumetric vol(rho0);
    for (double p : {0.0, 1e6, -1e6}) {
        EXPECT_DOUBLE_EQ(vol.rho(p), rho0);
        EXPECT_DOUBLE_EQ(vol.beta(p), 0.0);
        EXPECT_DOUBLE_EQ(vol.drho_dp(p), 0.0);
        EXPECT_DOUBLE_EQ(vol.dbeta_dp(p), 0.0);
        EXPECT_DOUBLE_EQ(vol.gibbs(p), p / rho0);
    }
}

TEST(Volumetric, RejectsNonPositiveBulkModulus)
{
    EXPECT_THROW(CompressibleVolumetric(1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(CompressibleVolumetric(1.0, -2.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Kinematics.

TEST(Kinematics, FromFSatisfiesDefinitions)
{
    std::mt19937 gen(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat3 F = random_F(gen);
        const Kinematics kin = Kinematics::from_F(F);
        EXPECT_NEAR(kin.J, det3(F), 1e-12 * std::abs(kin.J));
        EXPECT_NEAR(kin.Jm23, std::pow(kin.J, -2.0 / 3.0), 1e-12 * kin.Jm23);
        // C = F^T F, Ctilde = J^(-2/3) C, det(Ctilde) = 1.
        const Mat3 C = matTmul3(F, F);
        const Mat3 FiF = matmul3(kin.Finv, F);
        const Mat3 CiC = matmul3(kin.Cinv, kin.C);
        for (int k = 0; k < 9; ++k) {
            EXPECT_NEAR(kin.C[k], C[k], 1e-12 * frob3(C));
            EXPECT_NEAR(kin.Ctilde[k], kin.Jm23 * C[k], 1e-12 * frob3(C));
            EXPECT_NEAR(FiF[k], kIdentity3[k], 1e-10);
            EXPECT_NEAR(CiC[k], kIdentity3[k], 1e-9);
        }
        EXPECT_NEAR(det3(kin.Ctilde), 1.0, 1e-10);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_NEAR(kin.Ctilde[3 * i + j], kin.Ctilde[3 * j + i], 1e-14);
    }
}

TEST(Kinematics, ThrowsOnInvertedElement)
{
    Mat3 F = kIdentity3;
    F[0] = -1.0; // det < 0
    EXPECT_THROW(Kinematics::from_F(F), ElementInversion);
}

// ---------------------------------------------------------------------------
// Isochoric models: stress is the energy derivative, stress_dir its second.

TEST(NeoHookean, IdentityStateGivesConstantFictitiousStressAndZeroDeviator)
{
    const NeoHookeanIsochoric iso(2.0);
    const Kinematics kin = Kinematics::from_F(kIdentity3);
    const StressState st = evaluate_stress(kin, iso);
    for (int k = 0; k < 9; ++k) {
        EXPECT_DOUBLE_EQ(st.Stilde[k], 2.0 * kIdentity3[k]);
        EXPECT_NEAR(st.sigma_dev[k], 0.0, 1e-14);
        EXPECT_NEAR(st.Ptilde[k], 0.0, 1e-14);
    }
}

TEST(DispersedFiber, IdentityStateMatchesGroundMatrix)
{
    const auto iso = make_test_fibers();
    const Kinematics kin = Kinematics::from_F(kIdentity3);
    const Mat3 S = iso.stress(kin.Ctilde);
    // Fiber strain H:Ctilde - 1 vanishes at the identity, so only the
    // Neo-Hookean ground matrix contributes.
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(S[k], 2.0 * kIdentity3[k], 1e-14);
}

TEST(DispersedFiber, ZeroFiberStiffnessReducesToNeoHookean)
{
    const double mu = 3.1;
    const double phi = 0.7;
    const Vec3 a1 = {std::cos(phi), std::sin(phi), 0.0};
    const Vec3 a2 = {std::cos(phi), -std::sin(phi), 0.0};
    const DispersedFiberIsochoric fib(mu, 0.0, 10.0, 0.2, a1, a2);
    const NeoHookeanIsochoric nh(mu);
    std::mt19937 gen(7);
    for (int trial = 0; trial < 5; ++trial) {
        const Kinematics kin = Kinematics::from_F(random_F(gen));
        const Mat3 Sf = fib.stress(kin.Ctilde);
        const Mat3 Sn = nh.stress(kin.Ctilde);
        const Mat3 dC = random_dir(gen);
        const Mat3 Df = fib.stress_dir(kin.Ctilde, dC);
        for (int k = 0; k < 9; ++k) {
            EXPECT_NEAR(Sf[k], Sn[k], 1e-14 * mu);
            EXPECT_NEAR(Df[k], 0.0, 1e-14 * mu);
        }
        EXPECT_NEAR(fib.energy(kin.Ctilde), nh.energy(kin.Ctilde),
                    1e-14 * std::abs(nh.energy(kin.Ctilde)) + 1e-15);
    }
}

TEST(DispersedFiber, FiberFamilySwapIsSymmetric)
{
    const double phi = 40.02 * M_PI / 180.0;
    const Vec3 a1 = {std::cos(phi), std::sin(phi), 0.0};
    const Vec3 a2 = {std::cos(phi), -std::sin(phi), 0.0};
    const DispersedFiberIsochoric f12(2.0, 1.5, 0.8, 0.1, a1, a2);
    const DispersedFiberIsochoric f21(2.0, 1.5, 0.8, 0.1, a2, a1);
    std::mt19937 gen(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Kinematics kin = Kinematics::from_F(random_F(gen));
        const Mat3 Sa = f12.stress(kin.Ctilde);
        const Mat3 Sb = f21.stress(kin.Ctilde);
        for (int k = 0; k < 9; ++k) EXPECT_NEAR(Sa[k], Sb[k], 1e-13 * frob3(Sa));
    }
}

TEST(DispersedFiber, RejectsNonUnitFiberDirections)
{
    const Vec3 bad = {1.0, 1.0, 0.0};
    const Vec3 ok = {1.0, 0.0, 0.0};
    EXPECT_THROW(DispersedFiberIsochoric(1.0, 1.0, 1.0, 0.1, bad, ok),
                 std::invalid_argument);
}

// Fictitious stress = 2 d(energy)/dCtilde, validated per component.
TEST(IsochoricStress, StressIsEnergyDerivativeInCtilde)
{
    const NeoHookeanIsochoric nh(2.0);
    const auto fib = make_test_fibers();
    const IsochoricModel* models[2] = {&nh, &fib};
    std::mt19937 gen(3);
    const double h = 1e-6;
    for (const IsochoricModel* iso : models) {
        const Kinematics kin = Kinematics::from_F(random_F(gen));
        const Mat3 S = iso->stress(kin.Ctilde);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                // Symmetric perturbation of Ctilde in (i,j).
                Mat3 Cp = kin.Ctilde, Cm = kin.Ctilde;
                Cp[3 * i + j] += h;
                Cp[3 * j + i] += (i == j ? 0.0 : h);
                Cm[3 * i + j] -= h;
                Cm[3 * j + i] -= (i == j ? 0.0 : h);
                const double fd = (iso->energy(Cp) - iso->energy(Cm)) / (2.0 * h);
                // A diagonal step probes dE/dC_ii = S_ii/2; the symmetric
                // off-diagonal step probes both entries, totalling S_ij.
                const double expected = (i == j ? 2.0 : 1.0) * fd;
                EXPECT_NEAR(S[3 * i + j], expected,
                            1e-5 * frob3(S) + 1e-10)
                    << "i=" << i << " j=" << j;
            }
    }
}

TEST(IsochoricStress, DeviatoricCauchyStressIsTraceFree)
{
    const NeoHookeanIsochoric nh(2.0);
    const auto fib = make_test_fibers();
    const IsochoricModel* models[2] = {&nh, &fib};
    std::mt19937 gen(19);
    for (const IsochoricModel* iso : models) {
        for (int trial = 0; trial < 50; ++trial) {
            const Kinematics kin = Kinematics::from_F(random_F(gen));
            const StressState st = evaluate_stress(kin, *iso);
            EXPECT_LE(std::abs(trace3(st.sigma_dev)), 1e-10 * frob3(st.sigma_dev));
        }
    }
}

TEST(IsochoricStress, InternalIdentitiesHold)
{
    const auto fib = make_test_fibers();
    std::mt19937 gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Kinematics kin = Kinematics::from_F(random_F(gen));
        const StressState st = evaluate_stress(kin, fib);
        // Ptilde = F Siso and sigma_dev = (1/J) Ptilde F^T.
        const Mat3 FS = matmul3(kin.F, st.Siso);
        Mat3 sig = matmul3(st.Ptilde, transpose3(kin.F));
        sig = mscale3(sig, 1.0 / kin.J);
        for (int k = 0; k < 9; ++k) {
            EXPECT_NEAR(st.Ptilde[k], FS[k], 1e-12 * frob3(FS));
            EXPECT_NEAR(st.sigma_dev[k], sig[k], 1e-12 * frob3(sig));
        }
        // Siso : C = J tr(sigma_dev) = 0.
        EXPECT_LE(std::abs(ddot3(st.Siso, kin.C)), 1e-10 * frob3(st.Siso) * frob3(kin.C));
    }
}

// The two-point stress must be the F-derivative of the stored energy; this
// pins the projection term in Siso as well.
TEST(IsochoricStress, PtildeIsEnergyGradientInF)
{
    const NeoHookeanIsochoric nh(2.0);
    const auto fib = make_test_fibers();
    const IsochoricModel* models[2] = {&nh, &fib};
    std::mt19937 gen(5);
    const double h = 1e-6;
    for (const IsochoricModel* iso : models) {
        const Mat3 F = random_F(gen);
        const Kinematics kin = Kinematics::from_F(F);
        const StressState st = evaluate_stress(kin, *iso);
        for (int k = 0; k < 9; ++k) {
            Mat3 dF{};
            dF[k] = 1.0;
            const double fd = fd_energy_dir(*iso, F, dF, h);
            EXPECT_NEAR(st.Ptilde[k], fd, 1e-5 * frob3(st.Ptilde) + 1e-10) << "k=" << k;
        }
    }
}

TEST(IsochoricStress, DirectionalDerivativeMatchesFiniteDifference)
{
    const NeoHookeanIsochoric nh(2.0);
    const auto fib = make_test_fibers();
    const IsochoricModel* models[2] = {&nh, &fib};
    std::mt19937 gen(13);
    for (const IsochoricModel* iso : models) {
        const Mat3 F = random_F(gen);
        const Kinematics kin = Kinematics::from_F(F);
        const StressState st = evaluate_stress(kin, *iso);
        const Mat3 dF = random_dir(gen);
        const Mat3 dP = ptilde_dir(kin, *iso, st, dF);

        double err_prev = 0.0;
        for (int step = 0; step < 2; ++step) {
            const double h = (step == 0) ? 1e-3 : 1e-4;
            const Kinematics kp = Kinematics::from_F(madd3(F, dF, h));
            const Kinematics km = Kinematics::from_F(madd3(F, dF, -h));
            const StressState sp = evaluate_stress(kp, *iso);
            const StressState sm = evaluate_stress(km, *iso);
            double err = 0.0;
            for (int k = 0; k < 9; ++k) {
                const double fd = (sp.Ptilde[k] - sm.Ptilde[k]) / (2.0 * h);
                err = std::max(err, std::abs(fd - dP[k]));
            }
            if (step == 0) {
                err_prev = err;
            } else {
                // Central differences: error drops ~100x per decade in h.
                EXPECT_LE(err, err_prev / 30.0);
                EXPECT_LE(err, 1e-5 * frob3(dP) + 1e-10);
            }
        }
    }
}

// d2(energy)/dF2 is symmetric, so dG : dP(dF) must equal dF : dP(dG).
TEST(IsochoricStress, SecondDerivativeHasMajorSymmetry)
{
    const NeoHookeanIsochoric nh(2.0);
    const auto fib = make_test_fibers();
    const IsochoricModel* models[2] = {&nh, &fib};
    std::mt19937 gen(29);
    for (const IsochoricModel* iso : models) {
        for (int trial = 0; trial < 10; ++trial) {
            const Kinematics kin = Kinematics::from_F(random_F(gen));
            const StressState st = evaluate_stress(kin, *iso);
            const Mat3 dF = random_dir(gen);
            const Mat3 dG = random_dir(gen);
            const double lhs = ddot3(dG, ptilde_dir(kin, *iso, st, dF));
            const double rhs = ddot3(dF, ptilde_dir(kin, *iso, st, dG));
            const double scale = frob3(ptilde_dir(kin, *iso, st, dF)) * frob3(dG);
            EXPECT_NEAR(lhs, rhs, 1e-8 * scale + 1e-12);
        }
    }
}

TEST(DispersedFiber, ExponentClampKeepsExtremeStatesFinite)
{
    // Benchmark-magnitude stiffness: without clamping, exp(k2 E^2) overflows
    // at a few hundred percent fiber stretch.
    const double phi = 40.02 * M_PI / 180.0;
    const Vec3 a1 = {std::cos(phi), std::sin(phi), 0.0};
    const Vec3 a2 = {std::cos(phi), -std::sin(phi), 0.0};
    const DispersedFiberIsochoric fib(7.64e4, 9.966e6, 524.6, 0.226, a1, a2);
    const Mat3 F = {8.0, 0.0, 0.0, 0.0, 0.354, 0.0, 0.0, 0.0, 0.354};
    const Kinematics kin = Kinematics::from_F(F);
    EXPECT_TRUE(std::isfinite(fib.energy(kin.Ctilde)));
    const Mat3 S = fib.stress(kin.Ctilde);
    const Mat3 D = fib.stress_dir(kin.Ctilde, kIdentity3);
    for (int k = 0; k < 9; ++k) {
        EXPECT_TRUE(std::isfinite(S[k]));
        EXPECT_TRUE(std::isfinite(D[k]));
    }
}

// ---------------------------------------------------------------------------
// Material factories.

TEST(Material, WaveSpeedsFollowClosedForms)
{
    const double mu = 8.0194e8, kappa = 4.00889806e12, rho0 = 1.0;
    const Material nh = make_neo_hookean_material(mu, kappa, rho0);
    EXPECT_FALSE(nh.incompressible);
    EXPECT_NEAR(nh.wave_speed(), std::sqrt((kappa + 4.0 * mu / 3.0) / rho0),
                1e-12 * nh.wave_speed());

    const Material fib = make_fiber_material(7.64e4, 9.966e6, 524.6, 0.226, 40.02, 1.0);
    EXPECT_TRUE(fib.incompressible);
    EXPECT_NEAR(fib.wave_speed(), std::sqrt(7.64e4 / 1.0), 1e-12 * fib.wave_speed());

    // Doubling the density slows waves by sqrt(2).
    const Material nh2 = make_neo_hookean_material(mu, kappa, 2.0 * rho0);
    EXPECT_NEAR(nh.wave_speed() / nh2.wave_speed(), std::sqrt(2.0), 1e-12);
}

TEST(Material, FactoriesWireConsistentVolumetricModels)
{
    const Material nh = make_neo_hookean_material(2.0, 10.0, 1.5);
    EXPECT_DOUBLE_EQ(nh.vol->rho(0.0), 1.5);
    EXPECT_DOUBLE_EQ(nh.vol->beta(0.0), 0.1);
    const Material fib = make_fiber_material(2.0, 1.0, 1.0, 0.1, 45.0, 1.5);
    EXPECT_DOUBLE_EQ(fib.vol->rho(1e5), 1.5);
    EXPECT_DOUBLE_EQ(fib.vol->beta(1e5), 0.0);
}

TEST(Material, BulkModulusFromPoissonRatio)
{
    EXPECT_NEAR(kappa_from_nu(1.0, 0.25), 5.0 / 3.0, 1e-15);
    // nu = 0 keeps kappa = 2mu/3; nu -> 1/2 diverges.
    EXPECT_NEAR(kappa_from_nu(3.0, 0.0), 2.0, 1e-15);
    EXPECT_GT(kappa_from_nu(1.0, 0.4999), 1e3);
}
