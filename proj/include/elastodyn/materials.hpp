#pragma once

#include <memory>
#include <stdexcept>

#include "elastodyn/smallmat.hpp"

// Constitutive models in a pressure-primitive framework.  The free energy
// splits into an isochoric part evaluated on the distortional stretch
// Ctilde = J^(-2/3) F^T F and a volumetric part G_vol(p) that delivers the
// density rho(p) = 1/G_vol'(p) and the isothermal compressibility
// beta(p) = -G_vol''(p)/G_vol'(p).

namespace elastodyn {

class ElementInversion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Volumetric response.

class VolumetricModel {
public:
    virtual ~VolumetricModel() = default;
    virtual double rho(double p) const = 0;
    virtual double beta(double p) const = 0;
    virtual double drho_dp(double p) const = 0;
    virtual double dbeta_dp(double p) const = 0;
    // G_vol(p); exposed so the derivative relations above can be validated.
    virtual double gibbs(double p) const = 0;
};

// Bulk-modulus-regularized volumetric potential
//   G_vol(p) = [p*s - p^2] / (2*kappa*rho0) + (kappa / (2*rho0)) * ln((s+p)/kappa),
//   s = sqrt(p^2 + kappa^2),
// written in the cancellation-free form below.  Closed forms:
//   rho(p)  = rho0 * (s + p) / kappa,   beta(p)    = 1 / s,
//   rho'(p) = rho(p) / s,               beta'(p)   = -p / s^3.
class CompressibleVolumetric : public VolumetricModel {
public:
    CompressibleVolumetric(double rho0, double kappa) : rho0_(rho0), kappa_(kappa)
    {
        if (kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
    }
    double rho(double p) const override { return rho0_ * sp_ratio(p); }
    double beta(double p) const override { return 1.0 / s(p); }
    double drho_dp(double p) const override { return rho(p) / s(p); }
    double dbeta_dp(double p) const override
    {
        const double sp = s(p);
        return -p / (sp * sp * sp);
    }
    double gibbs(double p) const override
    {
        const double r = sp_ratio(p);
        // p*(s - p) = kappa^2 * p / (s + p); both terms cancellation-free.
        return p / (2.0 * rho0_ * r) + kappa_ / (2.0 * rho0_) * std::log(r);
    }

private:
    double s(double p) const { return std::sqrt(p * p + kappa_ * kappa_); }
    // (s + p)/kappa, evaluated without cancellation on either sign of p.
    double sp_ratio(double p) const
    {
        if (p >= 0.0) return (s(p) + p) / kappa_;
        return kappa_ / (s(p) - p);
    }
    double rho0_, kappa_;
};

// G_vol(p) = p / rho0: constant density, zero compressibility.
class IncompressibleVolumetric : public VolumetricModel {
public:
    explicit IncompressibleVolumetric(double rho0) : rho0_(rho0) {}
    double rho(double) const override { return rho0_; }
    double beta(double) const override { return 0.0; }
    double drho_dp(double) const override { return 0.0; }
    double dbeta_dp(double) const override { return 0.0; }
    double gibbs(double p) const override { return p / rho0_; }

private:
    double rho0_;
};

// ---------------------------------------------------------------------------
// Isochoric response, parameterized by Ctilde.

class IsochoricModel {
public:
    virtual ~IsochoricModel() = default;
    // rho0 * G_iso(Ctilde), the stored energy per reference volume.
    virtual double energy(const Mat3& Ct) const = 0;
    // Fictitious second Piola-Kirchhoff stress Stilde = 2 d(energy)/dCtilde.
    virtual Mat3 stress(const Mat3& Ct) const = 0;
    // Directional derivative of Stilde along dCt.
    virtual Mat3 stress_dir(const Mat3& Ct, const Mat3& dCt) const = 0;
};

class NeoHookeanIsochoric : public IsochoricModel {
public:
    explicit NeoHookeanIsochoric(double mu) : mu_(mu) {}
    double energy(const Mat3& Ct) const override
    {
        return 0.5 * mu_ * (trace3(Ct) - 3.0);
    }
    Mat3 stress(const Mat3&) const override { return mscale3(kIdentity3, mu_); }
    Mat3 stress_dir(const Mat3&, const Mat3&) const override { return Mat3{}; }

private:
    double mu_;
};

// Two-family dispersed-fiber model: the fiber strain of family i is
// E_i = H_i : Ctilde - 1 with structure tensor H_i = kd*I + (1-3kd) a_i(x)a_i,
// and the fiber energy is (k1/2k2)(exp(k2*E_i^2) - 1) on top of a Neo-Hookean
// ground matrix.  The exponent argument is clamped to avoid overflow in
// far-from-equilibrium Newton trial states.
class DispersedFiberIsochoric : public IsochoricModel {
public:
    DispersedFiberIsochoric(double mu, double k1, double k2, double kd,
                            const Vec3& a1, const Vec3& a2);
    double energy(const Mat3& Ct) const override;
    Mat3 stress(const Mat3& Ct) const override;
    Mat3 stress_dir(const Mat3& Ct, const Mat3& dCt) const override;

private:
    static constexpr double kExpClamp = 500.0;
    double mu_, k1_, k2_;
    Mat3 H_[2];
};

// ---------------------------------------------------------------------------
// Material = volumetric + isochoric response + wave-speed data.

struct Material {
    std::unique_ptr<VolumetricModel> vol;
    std::unique_ptr<IsochoricModel> iso;
    double rho0 = 1.0;
    double mu = 0.0;
    double kappa = 0.0;     // unused if incompressible
    bool incompressible = false;

    // Maximum elastic wave speed: bulk waves sqrt((lambda + 2mu)/rho0) with
    // lambda = kappa - 2mu/3 for the compressible model, shear waves
    // sqrt(mu/rho0) for the incompressible one.
    double wave_speed() const
    {
        if (incompressible) return std::sqrt(mu / rho0);
        return std::sqrt((kappa + 4.0 * mu / 3.0) / rho0);
    }
};

Material make_neo_hookean_material(double mu, double kappa, double rho0);
Material make_fiber_material(double mu, double k1, double k2, double kd,
                             double phi_deg, double rho0);

// Bulk modulus from shear modulus and Poisson ratio (isotropic elasticity).
inline double kappa_from_nu(double mu, double nu)
{
    return 2.0 * mu * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu));
}

// ---------------------------------------------------------------------------
// Kinematics and stress evaluation shared by assembly and tests.

struct Kinematics {
    Mat3 F, Finv, C, Cinv, Ctilde;
    double J = 1.0;
    double Jm23 = 1.0; // J^(-2/3)

    static Kinematics from_F(const Mat3& F);
};

struct StressState {
    Mat3 Stilde;    // fictitious stress
    Mat3 Siso;      // J^(-2/3) Stilde - (1/3)(Stilde : Ctilde) C^{-1}
    Mat3 Ptilde;    // F * Siso = J * sigma_dev * F^{-T}
    Mat3 sigma_dev; // deviatoric Cauchy stress
};

StressState evaluate_stress(const Kinematics& kin, const IsochoricModel& iso);

// Directional derivative of Ptilde under dF, i.e. the contraction of the
// second derivative of the isochoric energy in F with dF.
Mat3 ptilde_dir(const Kinematics& kin, const IsochoricModel& iso,
                const StressState& st, const Mat3& dF);

} // namespace elastodyn
