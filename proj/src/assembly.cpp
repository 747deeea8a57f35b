#include "elastodyn/assembly.hpp"

#include "elastodyn/quadrature.hpp"

#include <cassert>
#include <stdexcept>
#include <string>

namespace elastodyn {

DofMap DofMap::build(const Mesh& mesh, const std::vector<std::array<bool, 3>>& fixed)
{
    if (static_cast<int>(fixed.size()) != mesh.n_nodes())
        throw std::invalid_argument("DofMap: constraint table size mismatch");
    DofMap d;
    d.n_nodes = mesh.n_nodes();
    d.np = d.n_nodes;
    d.vdof.assign(d.n_nodes, {-1, -1, -1});
    for (int n = 0; n < d.n_nodes; ++n)
        for (int c = 0; c < 3; ++c)
            if (!fixed[n][c]) {
                d.vdof[n][c] = d.nv++;
                d.row_node.push_back(n);
                d.row_comp.push_back(c);
            }
    return d;
}

State State::zeros(int n_nodes)
{
    State s;
    s.u.assign(3 * n_nodes, 0.0);
    s.udot.assign(3 * n_nodes, 0.0);
    s.p.assign(n_nodes, 0.0);
    s.pdot.assign(n_nodes, 0.0);
    s.v.assign(3 * n_nodes, 0.0);
    s.vdot.assign(3 * n_nodes, 0.0);
    return s;
}

StabilizationParams compute_tau(const Mesh& mesh, const Material& mat, double c_m)
{
    StabilizationParams stab;
    stab.c_m = c_m;
    const double c = mat.wave_speed();
    stab.tau.resize(mesh.n_tets());
    for (int e = 0; e < mesh.n_tets(); ++e)
        stab.tau[e] = c_m * mesh.h[e] / (c * mat.rho0);
    return stab;
}

namespace {

// Element-level quantities that are constant across quadrature points for
// linear shape functions: deformation, spatial gradients, stress, and the
// spatial gradients of the interpolated fields.
struct ElementFrame {
    Kinematics kin;
    StressState st;
    Vec3 g[4];       // spatial shape-function gradients
    double divv = 0; // spatial divergence of velocity
    Mat3 L{};        // spatial velocity gradient L_ij = v_i,j
    Vec3 gp{};       // spatial pressure gradient
    // nodal values gathered element-locally
    double pe[4], pde[4];
    Vec3 ve[4], vde[4];
};

ElementFrame make_frame(const Mesh& mesh, int e, const Material& mat, const State& s)
{
    ElementFrame f;
    const auto& tet = mesh.tets[e];
    const auto& G = mesh.grad_N[e];

    Mat3 F = kIdentity3;
    for (int a = 0; a < 4; ++a) {
        const int n = tet[a];
        for (int i = 0; i < 3; ++i)
            for (int I = 0; I < 3; ++I) F[3 * i + I] += s.u[3 * n + i] * G[a][I];
    }
    try {
        f.kin = Kinematics::from_F(F);
    } catch (const ElementInversion&) {
        throw ElementInversion("assembly: element " + std::to_string(e) +
                               " inverted (J <= 0)");
    }
    f.st = evaluate_stress(f.kin, *mat.iso);

    for (int a = 0; a < 4; ++a) f.g[a] = tmulvec3(f.kin.Finv, G[a]);

    for (int a = 0; a < 4; ++a) {
        const int n = tet[a];
        f.pe[a] = s.p[n];
        f.pde[a] = s.pdot[n];
        for (int i = 0; i < 3; ++i) {
            f.ve[a][i] = s.v[3 * n + i];
            f.vde[a][i] = s.vdot[3 * n + i];
        }
    }
    f.gp = {0.0, 0.0, 0.0};
    for (int a = 0; a < 4; ++a) {
        f.divv += dot(f.ve[a], f.g[a]);
        for (int i = 0; i < 3; ++i) {
            f.gp[i] += f.pe[a] * f.g[a][i];
            for (int j = 0; j < 3; ++j) f.L[3 * i + j] += f.ve[a][i] * f.g[a][j];
        }
    }
    return f;
}

} // namespace

void assemble_residuals(const Mesh& mesh, const DofMap& dofs, const Material& mat,
                        const StabilizationParams& stab, const Loads& loads,
                        const State& s, std::vector<double>& r_m, std::vector<double>& r_p)
{
    assert(static_cast<int>(stab.tau.size()) == mesh.n_tets());
    r_m.assign(dofs.nv, 0.0);
    r_p.assign(dofs.np, 0.0);
    const TetRule& rule = tet_rule();
    const Vec3 b = loads.body_force;

    for (int e = 0; e < mesh.n_tets(); ++e) {
        const ElementFrame f = make_frame(mesh, e, mat, s);
        const auto& tet = mesh.tets[e];
        const auto& G = mesh.grad_N[e];
        const double vol = mesh.volume[e];
        const double tau = stab.tau[e];
        const double J = f.kin.J;

        double pbar = 0.0; // quadrature average of p (for the J p N_A,i term)
        for (int q = 0; q < TetRule::n; ++q) {
            const auto& N = rule.bary[q];
            const double wq = rule.w[q] * vol;
            double pq = 0.0, pdq = 0.0;
            Vec3 vdq{0.0, 0.0, 0.0};
            for (int a = 0; a < 4; ++a) {
                pq += N[a] * f.pe[a];
                pdq += N[a] * f.pde[a];
                for (int i = 0; i < 3; ++i) vdq[i] += N[a] * f.vde[a][i];
            }
            pbar += rule.w[q] * pq;
            const double rho = mat.vol->rho(pq);
            const double beta = mat.vol->beta(pq);

            // Strong-form momentum residual (the divergence of Ptilde vanishes
            // inside linear elements).
            Vec3 res;
            for (int i = 0; i < 3; ++i)
                res[i] = rho * J * (vdq[i] - b[i]) + J * f.gp[i];

            const double cont = J * (beta * pdq + f.divv);
            for (int a = 0; a < 4; ++a) {
                r_p[tet[a]] += wq * (N[a] * cont + tau * dot(f.g[a], res));
                for (int i = 0; i < 3; ++i) {
                    const int row = dofs.vdof[tet[a]][i];
                    if (row >= 0) r_m[row] += wq * N[a] * rho * J * (vdq[i] - b[i]);
                }
            }
        }

        // Constant-integrand terms: internal stress and pressure coupling.
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i) {
                const int row = dofs.vdof[tet[a]][i];
                if (row < 0) continue;
                double PG = 0.0;
                for (int I = 0; I < 3; ++I) PG += G[a][I] * f.st.Ptilde[3 * i + I];
                r_m[row] += vol * (PG - f.g[a][i] * J * pbar);
            }
    }

    // Dead surface tractions on the referential boundary.
    for (const TractionLoad& t : loads.tractions) {
        for (const int fi : mesh.facets_with_tag(t.tag)) {
            const BoundaryFacet& fac = mesh.facets[fi];
            const double third = mesh.facet_area(fac) / 3.0;
            for (const int n : fac.nodes)
                for (int i = 0; i < 3; ++i) {
                    const int row = dofs.vdof[n][i];
                    if (row >= 0) r_m[row] -= third * t.h[i];
                }
        }
    }
}

TangentBlocks assemble_tangent(const Mesh& mesh, const DofMap& dofs, const Material& mat,
                               const StabilizationParams& stab, const Loads& loads,
                               const State& s, const TimeScalars& ts)
{
    assert(static_cast<int>(stab.tau.size()) == mesh.n_tets());
    const TetRule& rule = tet_rule();
    const Vec3 b = loads.body_force;
    const double am = ts.alpha_m;
    const double chi = ts.chi();
    const double fac2 = chi * chi / am;

    // Triplet accumulation keeps the code close to the formulas; the CSR
    // builder merges duplicates in deterministic (row, col) order.
    std::vector<int> ar, ac, mr, mc, br, bc, cr, cc, kr, kc, dr, dc;
    std::vector<double> av, mv, bv, cv, kv, dv;
    const std::size_t nel = mesh.n_tets();
    ar.reserve(nel * 144);
    ac.reserve(nel * 144);
    av.reserve(nel * 144);

    for (int e = 0; e < mesh.n_tets(); ++e) {
        const ElementFrame f = make_frame(mesh, e, mat, s);
        const auto& tet = mesh.tets[e];
        const auto& G = mesh.grad_N[e];
        const double vol = mesh.volume[e];
        const double tau = stab.tau[e];
        const double J = f.kin.J;

        double eA[12][12] = {};
        double eM[12][12] = {};
        double eB[12][4] = {};
        double eC[4][12] = {};
        double eK[4][12] = {};
        double eD[4][4] = {};

        // --- quadrature-dependent terms -----------------------------------
        double pbar = 0.0;
        for (int q = 0; q < TetRule::n; ++q) {
            const auto& N = rule.bary[q];
            const double wq = rule.w[q] * vol;
            double pq = 0.0, pdq = 0.0;
            Vec3 vdq{0.0, 0.0, 0.0};
            for (int a = 0; a < 4; ++a) {
                pq += N[a] * f.pe[a];
                pdq += N[a] * f.pde[a];
                for (int i = 0; i < 3; ++i) vdq[i] += N[a] * f.vde[a][i];
            }
            pbar += rule.w[q] * pq;
            const double rho = mat.vol->rho(pq);
            const double beta = mat.vol->beta(pq);
            const double drho = mat.vol->drho_dp(pq);
            const double dbeta = mat.vol->dbeta_dp(pq);

            Vec3 vmb, res;
            for (int i = 0; i < 3; ++i) {
                vmb[i] = vdq[i] - b[i];
                res[i] = rho * J * vmb[i] + J * f.gp[i];
            }
            const double cont = J * (beta * pdq + f.divv);

            for (int a = 0; a < 4; ++a) {
                const double Na = N[a];
                // momentum rows
                for (int bn = 0; bn < 4; ++bn) {
                    const double Nb = N[bn];
                    const double mass = wq * rho * J * Na * Nb;
                    for (int i = 0; i < 3; ++i) {
                        eM[3 * a + i][3 * bn + i] += am * mass;
                        eA[3 * a + i][3 * bn + i] += am * mass;
                        // d(J)/du contribution to the inertia term
                        for (int j = 0; j < 3; ++j)
                            eA[3 * a + i][3 * bn + j] +=
                                fac2 * wq * Na * rho * J * vmb[i] * f.g[bn][j];
                        // B: density sensitivity and pressure coupling
                        eB[3 * a + i][bn] +=
                            chi * wq * (drho * J * vmb[i] * Na * Nb - J * f.g[a][i] * Nb);
                    }
                    // pressure rows
                    const double gab = dot(f.g[a], f.g[bn]);
                    const double gavmb = dot(f.g[a], vmb);
                    const double gbres = dot(f.g[bn], res);
                    for (int j = 0; j < 3; ++j) {
                        // rate part of C: tau rho J N_A,j N_B + J N_A N_B,j
                        const double crate =
                            am * wq * tau * rho * J * f.g[a][j] * Nb +
                            chi * wq * J * Na * f.g[bn][j];
                        eK[a][3 * bn + j] += crate;
                        eC[a][3 * bn + j] += crate;
                        // deformation-dependent part of C
                        double cu = Na * cont * f.g[bn][j]; // d(J)/du on the first term
                        double Lg = 0.0;                    // -v_{i,j} N_{B,i} circulation
                        for (int i = 0; i < 3; ++i) Lg += f.L[3 * i + j] * f.g[bn][i];
                        cu -= J * Na * Lg;
                        // variation of the stabilization term: test-function
                        // gradient (note the sign) plus strong-residual parts
                        cu -= tau * f.g[a][j] * gbres;
                        cu += tau * (rho * J * gavmb * f.g[bn][j] +
                                     J * dot(f.g[a], f.gp) * f.g[bn][j] -
                                     J * f.gp[j] * gab);
                        eC[a][3 * bn + j] += fac2 * wq * cu;
                    }
                    // D block
                    eD[a][bn] += wq * (am * J * beta * Na * Nb +
                                       chi * J * dbeta * pdq * Na * Nb +
                                       chi * tau * J * (gab + drho * gavmb * Nb));
                }
            }
        }

        // --- constant-integrand terms of A --------------------------------
        for (int bn = 0; bn < 4; ++bn)
            for (int j = 0; j < 3; ++j) {
                // Full directional derivative of Ptilde in the (node, comp)
                // displacement direction.
                Mat3 dF{};
                for (int J2 = 0; J2 < 3; ++J2) dF[3 * j + J2] = G[bn][J2];
                const Mat3 dP = ptilde_dir(f.kin, *mat.iso, f.st, dF);
                for (int a = 0; a < 4; ++a)
                    for (int i = 0; i < 3; ++i) {
                        double acc = 0.0;
                        for (int I = 0; I < 3; ++I) acc += G[a][I] * dP[3 * i + I];
                        // geometric pressure term: -J p (N_A,i N_B,j - N_A,j N_B,i)
                        acc -= J * pbar *
                               (f.g[a][i] * f.g[bn][j] - f.g[a][j] * f.g[bn][i]);
                        eA[3 * a + i][3 * bn + j] += fac2 * vol * acc;
                    }
            }

        // --- scatter -------------------------------------------------------
        for (int a = 0; a < 4; ++a) {
            for (int i = 0; i < 3; ++i) {
                const int row = dofs.vdof[tet[a]][i];
                if (row < 0) continue;
                for (int bn = 0; bn < 4; ++bn) {
                    for (int j = 0; j < 3; ++j) {
                        const int col = dofs.vdof[tet[bn]][j];
                        if (col < 0) continue;
                        ar.push_back(row);
                        ac.push_back(col);
                        av.push_back(eA[3 * a + i][3 * bn + j]);
                        mr.push_back(row);
                        mc.push_back(col);
                        mv.push_back(eM[3 * a + i][3 * bn + j]);
                    }
                    br.push_back(row);
                    bc.push_back(tet[bn]);
                    bv.push_back(eB[3 * a + i][bn]);
                }
            }
            for (int bn = 0; bn < 4; ++bn) {
                for (int j = 0; j < 3; ++j) {
                    const int col = dofs.vdof[tet[bn]][j];
                    if (col < 0) continue;
                    cr.push_back(tet[a]);
                    cc.push_back(col);
                    cv.push_back(eC[a][3 * bn + j]);
                    kr.push_back(tet[a]);
                    kc.push_back(col);
                    kv.push_back(eK[a][3 * bn + j]);
                }
                dr.push_back(tet[a]);
                dc.push_back(tet[bn]);
                dv.push_back(eD[a][bn]);
            }
        }
    }

    TangentBlocks t;
    t.K.nv = dofs.nv;
    t.K.np = dofs.np;
    t.K.A = CsrMatrix::from_triplets(dofs.nv, dofs.nv, ar, ac, av);
    t.K.B = CsrMatrix::from_triplets(dofs.nv, dofs.np, br, bc, bv);
    t.K.C = CsrMatrix::from_triplets(dofs.np, dofs.nv, cr, cc, cv);
    t.K.D = CsrMatrix::from_triplets(dofs.np, dofs.np, dr, dc, dv);
    t.A_rate = CsrMatrix::from_triplets(dofs.nv, dofs.nv, mr, mc, mv);
    t.C_rate = CsrMatrix::from_triplets(dofs.np, dofs.nv, kr, kc, kv);
    return t;
}

} // namespace elastodyn
