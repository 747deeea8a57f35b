#include "elastodyn/materials.hpp"

#include <algorithm>
#include <cmath>

namespace elastodyn {

DispersedFiberIsochoric::DispersedFiberIsochoric(double mu, double k1, double k2,
                                                 double kd, const Vec3& a1,
                                                 const Vec3& a2)
    : mu_(mu), k1_(k1), k2_(k2)
{
    if (kd < 0.0 || kd > 1.0 / 3.0) throw std::invalid_argument("kd must be in [0, 1/3]");
    if (std::abs(norm(a1) - 1.0) > 1e-12 || std::abs(norm(a2) - 1.0) > 1e-12)
        throw std::invalid_argument("fiber directions must be unit vectors");
    const Vec3 dirs[2] = {a1, a2};
    for (int i = 0; i < 2; ++i)
        H_[i] = madd3(mscale3(kIdentity3, kd), outer3(dirs[i], dirs[i]), 1.0 - 3.0 * kd);
}

double DispersedFiberIsochoric::energy(const Mat3& Ct) const
{
    double w = 0.5 * mu_ * (trace3(Ct) - 3.0);
    for (const auto& H : H_) {
        const double E = ddot3(H, Ct) - 1.0;
        const double q = std::min(k2_ * E * E, kExpClamp);
        w += k1_ / (2.0 * k2_) * (std::exp(q) - 1.0);
    }
    return w;
}

Mat3 DispersedFiberIsochoric::stress(const Mat3& Ct) const
{
    Mat3 S = mscale3(kIdentity3, mu_);
    for (const auto& H : H_) {
        const double E = ddot3(H, Ct) - 1.0;
        const double q = std::min(k2_ * E * E, kExpClamp);
        S = madd3(S, H, 2.0 * k1_ * E * std::exp(q));
    }
    return S;
}

Mat3 DispersedFiberIsochoric::stress_dir(const Mat3& Ct, const Mat3& dCt) const
{
    Mat3 dS{};
    for (const auto& H : H_) {
        const double E = ddot3(H, Ct) - 1.0;
        const double q = std::min(k2_ * E * E, kExpClamp);
        const double c = 2.0 * k1_ * (1.0 + 2.0 * k2_ * E * E) * std::exp(q);
        dS = madd3(dS, H, c * ddot3(H, dCt));
    }
    return dS;
}

Material make_neo_hookean_material(double mu, double kappa, double rho0)
{
    Material m;
    m.vol = std::make_unique<CompressibleVolumetric>(rho0, kappa);
    m.iso = std::make_unique<NeoHookeanIsochoric>(mu);
    m.rho0 = rho0;
    m.mu = mu;
    m.kappa = kappa;
    m.incompressible = false;
    return m;
}

Material make_fiber_material(double mu, double k1, double k2, double kd,
                             double phi_deg, double rho0)
{
    const double phi = phi_deg * std::acos(-1.0) / 180.0;
    const Vec3 a1 = {std::cos(phi), std::sin(phi), 0.0};
    const Vec3 a2 = {std::cos(phi), -std::sin(phi), 0.0};
    Material m;
    m.vol = std::make_unique<IncompressibleVolumetric>(rho0);
    m.iso = std::make_unique<DispersedFiberIsochoric>(mu, k1, k2, kd, a1, a2);
    m.rho0 = rho0;
    m.mu = mu;
    m.incompressible = true;
    return m;
}

Kinematics Kinematics::from_F(const Mat3& F)
{
    Kinematics k;
    k.F = F;
    k.J = det3(F);
    if (!(k.J > 0.0)) throw ElementInversion("deformation gradient has J <= 0");
    k.Finv = inv3(F);
    k.C = matTmul3(F, F);
    k.Cinv = inv3(k.C);
    k.Jm23 = std::pow(k.J, -2.0 / 3.0);
    k.Ctilde = mscale3(k.C, k.Jm23);
    return k;
}

StressState evaluate_stress(const Kinematics& kin, const IsochoricModel& iso)
{
    StressState st;
    st.Stilde = iso.stress(kin.Ctilde);
    const double sc = ddot3(st.Stilde, kin.Ctilde);
    st.Siso = madd3(mscale3(st.Stilde, kin.Jm23), kin.Cinv, -sc / 3.0);
    st.Ptilde = matmul3(kin.F, st.Siso);
    // sigma_dev = J^{-1} Ptilde F^T
    st.sigma_dev = mscale3(matmul3(st.Ptilde, transpose3(kin.F)), 1.0 / kin.J);
    return st;
}

Mat3 ptilde_dir(const Kinematics& kin, const IsochoricModel& iso,
                const StressState& st, const Mat3& dF)
{
    // t = tr(F^{-1} dF) = d(ln J)
    const double t = ddot3(transpose3(kin.Finv), dF);
    // dC = dF^T F + F^T dF
    const Mat3 dC = madd3(matTmul3(dF, kin.F), matTmul3(kin.F, dF));
    const double dJm23 = -2.0 / 3.0 * kin.Jm23 * t;
    const Mat3 dCt = madd3(mscale3(dC, kin.Jm23), kin.C, dJm23);
    const Mat3 dS = iso.stress_dir(kin.Ctilde, dCt);
    // d(C^{-1}) = -C^{-1} dC C^{-1}
    const Mat3 dCinv = mscale3(matmul3(kin.Cinv, matmul3(dC, kin.Cinv)), -1.0);

    const double sc = ddot3(st.Stilde, kin.Ctilde);
    const double dsc = ddot3(dS, kin.Ctilde) + ddot3(st.Stilde, dCt);
    Mat3 dSiso = mscale3(st.Stilde, dJm23);
    dSiso = madd3(dSiso, mscale3(dS, kin.Jm23));
    dSiso = madd3(dSiso, kin.Cinv, -dsc / 3.0);
    dSiso = madd3(dSiso, dCinv, -sc / 3.0);

    return madd3(matmul3(dF, st.Siso), matmul3(kin.F, dSiso));
}

} // namespace elastodyn
