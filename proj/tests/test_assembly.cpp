#include "elastodyn/assembly.hpp"

#include "elastodyn/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace elastodyn;

namespace {

DofMap free_dofs(const Mesh& mesh)
{
    return DofMap::build(mesh,
                         std::vector<std::array<bool, 3>>(mesh.n_nodes(),
                                                          {false, false, false}));
}

DofMap bottom_clamped_dofs(const Mesh& mesh)
{
    std::vector<std::array<bool, 3>> fixed(mesh.n_nodes(), {false, false, false});
    for (int n = 0; n < mesh.n_nodes(); ++n)
        if (mesh.nodes[n][2] < 1e-12) fixed[n] = {true, true, true};
    return DofMap::build(mesh, fixed);
}

Material neo_hookean_test_material()
{
    return make_neo_hookean_material(2.0, 10.0, 1.2);
}

Material fiber_test_material()
{
    return make_fiber_material(2.0, 1.5, 0.8, 0.1, 40.0, 1.0);
}

// Smooth, deterministic nodal state with small amplitudes (far from element
// inversion on meshes with h >= 0.025).
State smooth_state(const Mesh& mesh, double amp_u = 5e-3, double amp_p = 0.5)
{
    State s = State::zeros(mesh.n_nodes());
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        const Vec3& x = mesh.nodes[n];
        for (int i = 0; i < 3; ++i) {
            const double phase = 2.0 * x[0] + 3.0 * x[1] - x[2] + 0.7 * i;
            s.u[3 * n + i] = amp_u * std::sin(40.0 * phase);
            s.v[3 * n + i] = 0.3 * amp_u * std::cos(30.0 * phase);
            s.udot[3 * n + i] = 0.2 * amp_u * std::sin(25.0 * phase + 0.3);
            s.vdot[3 * n + i] = 0.1 * amp_u * std::cos(20.0 * phase + 1.1);
        }
        s.p[n] = amp_p * std::sin(15.0 * (x[0] + x[1] + x[2]) + 0.2);
        s.pdot[n] = 0.5 * amp_p * std::cos(10.0 * (x[0] - x[1]) + 0.5);
    }
    return s;
}

std::vector<double> random_unit(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    double nrm = 0.0;
    for (auto& x : v) {
        x = dist(gen);
        nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    for (auto& x : v) x /= nrm;
    return v;
}

// Applies the coupled increment of the two-field Newton update to the stage
// state: a rate direction (dv, dp) moves the end-of-step rates by eps*(dv, dp)
// and drags values and displacement rates along through the integrator
// relations, so the tangent blocks must reproduce the residual change.
State perturbed_stage_state(const State& base, const DofMap& dofs,
                            const std::vector<double>& dv,
                            const std::vector<double>& dp, double eps,
                            const TimeScalars& ts)
{
    State s = base;
    const double chi = ts.chi();
    for (int r = 0; r < dofs.nv; ++r) {
        const int idx = 3 * dofs.row_node[r] + dofs.row_comp[r];
        s.vdot[idx] += ts.alpha_m * eps * dv[r];
        s.v[idx] += chi * eps * dv[r];
        s.udot[idx] += chi * eps * dv[r];
        s.u[idx] += (chi * chi / ts.alpha_m) * eps * dv[r];
    }
    for (int n = 0; n < dofs.np; ++n) {
        s.pdot[n] += ts.alpha_m * eps * dp[n];
        s.p[n] += chi * eps * dp[n];
    }
    return s;
}

double inf_norm(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST(DofMap, NumbersFreeComponentsNodeMajor)
{
    const Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    EXPECT_EQ(dofs.n_nodes, 27);
    EXPECT_EQ(dofs.np, 27);
    EXPECT_EQ(dofs.nv, 3 * (27 - 9)); // 9 clamped bottom nodes

    int row = 0;
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        const bool clamped = mesh.nodes[n][2] < 1e-12;
        for (int c = 0; c < 3; ++c) {
            if (clamped) {
                EXPECT_EQ(dofs.vdof[n][c], -1);
            } else {
                EXPECT_EQ(dofs.vdof[n][c], row);
                EXPECT_EQ(dofs.row_node[row], n);
                EXPECT_EQ(dofs.row_comp[row], c);
                ++row;
            }
        }
    }
    EXPECT_EQ(row, dofs.nv);
}

TEST(DofMap, RejectsMismatchedConstraintTable)
{
    const Mesh mesh = generate_cube_mesh(1, 1.0);
    EXPECT_THROW(DofMap::build(mesh, {}), std::invalid_argument);
}

TEST(Assembly, ZeroStateWithoutLoadsGivesZeroResiduals)
{
    const Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const Material mats[2] = {neo_hookean_test_material(), fiber_test_material()};
    for (const Material& mat : mats) {
        const StabilizationParams stab = compute_tau(mesh, mat);
        std::vector<double> rm, rp;
        assemble_residuals(mesh, dofs, mat, stab, {}, State::zeros(mesh.n_nodes()), rm,
                           rp);
        // The deviatoric projection leaves cancellation dust of order
        // machine-epsilon * mu * volume; anything above that is a real
        // nonequilibrium contribution.
        EXPECT_LE(inf_norm(rm), 1e-15);
        EXPECT_LE(inf_norm(rp), 1e-15);
    }
}

TEST(Assembly, RigidTranslationGivesZeroResiduals)
{
    const Mesh mesh = generate_box_mesh(2, 2, 1, 0.2, 0.1, 0.1);
    const DofMap dofs = free_dofs(mesh);
    const Material mat = neo_hookean_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);
    State s = State::zeros(mesh.n_nodes());
    for (int n = 0; n < mesh.n_nodes(); ++n) {
        s.u[3 * n + 0] = 0.04;
        s.u[3 * n + 1] = -0.02;
        s.u[3 * n + 2] = 0.01;
    }
    std::vector<double> rm, rp;
    assemble_residuals(mesh, dofs, mat, stab, {}, s, rm, rp);
    EXPECT_LE(inf_norm(rm), 1e-14);
    EXPECT_LE(inf_norm(rp), 1e-14);
}

// Uniform hydrostatic pressure on an unconstrained body must load each node
// with the discrete boundary-normal integral; interior momentum rows see
// gradients of a constant and stay zero.  This pins the pressure-gradient
// coupling in both the residual and the B block.
TEST(Assembly, ConstantPressureActsThroughBoundaryNormals)
{
    const Mesh mesh = generate_box_mesh(2, 2, 2, 0.2, 0.15, 0.1);
    const DofMap dofs = free_dofs(mesh);
    const Material mat = neo_hookean_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);

    // Outward area-weighted normals: integral of N_a * n over the boundary.
    std::vector<Vec3> bnd(mesh.n_nodes(), Vec3{0.0, 0.0, 0.0});
    for (const BoundaryFacet& f : mesh.facets) {
        const Vec3& p0 = mesh.nodes[f.nodes[0]];
        const Vec3 e1 = sub(mesh.nodes[f.nodes[1]], p0);
        const Vec3 e2 = sub(mesh.nodes[f.nodes[2]], p0);
        Vec3 an = cross(e1, e2); // |an| = 2 * area
        // Orient outward: away from the owning element's centroid.
        Vec3 cen_tet{0.0, 0.0, 0.0};
        for (int a = 0; a < 4; ++a)
            cen_tet = add(cen_tet, scaled(mesh.nodes[mesh.tets[f.tet][a]], 0.25));
        if (dot(an, sub(mesh.facet_centroid(f), cen_tet)) < 0.0) an = scaled(an, -1.0);
        for (const int n : f.nodes)
            bnd[n] = add(bnd[n], scaled(an, 0.5 / 3.0)); // area/3 per node
    }

    const double p0 = 3.5;
    State s = State::zeros(mesh.n_nodes());
    for (int n = 0; n < mesh.n_nodes(); ++n) s.p[n] = p0;

    std::vector<double> rm, rp;
    assemble_residuals(mesh, dofs, mat, stab, {}, s, rm, rp);
    double scale = inf_norm(rm);
    ASSERT_GT(scale, 0.0);
    for (int r = 0; r < dofs.nv; ++r) {
        const double expected = -p0 * bnd[dofs.row_node[r]][dofs.row_comp[r]];
        EXPECT_NEAR(rm[r], expected, 1e-12 * scale) << "row " << r;
    }

    // Row sums of B give the same boundary integral scaled by -chi.
    const TimeScalars ts{0.05, 5.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0};
    const TangentBlocks t =
        assemble_tangent(mesh, dofs, mat, stab, {}, State::zeros(mesh.n_nodes()), ts);
    std::vector<double> ones(dofs.np, 1.0), bsum(dofs.nv, 0.0);
    t.K.B.matvec(ones.data(), bsum.data());
    const double bscale = inf_norm(bsum);
    ASSERT_GT(bscale, 0.0);
    for (int r = 0; r < dofs.nv; ++r) {
        const double expected = -ts.chi() * bnd[dofs.row_node[r]][dofs.row_comp[r]];
        EXPECT_NEAR(bsum[r], expected, 1e-12 * bscale) << "row " << r;
    }
}

TEST(Assembly, TractionLoadsEnterAsThirdOfFacetArea)
{
    Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const Material mat = neo_hookean_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);

    Loads loads;
    loads.tractions.push_back({mesh.tag_id("zmax"), {0.0, 0.0, -7.0}});
    std::vector<double> rm, rp;
    assemble_residuals(mesh, dofs, mat, stab, loads, State::zeros(mesh.n_nodes()), rm,
                       rp);
    EXPECT_DOUBLE_EQ(inf_norm(rp), 0.0);

    std::vector<double> expected(dofs.nv, 0.0);
    for (const int fi : mesh.facets_with_tag(mesh.tag_id("zmax"))) {
        const BoundaryFacet& f = mesh.facets[fi];
        for (const int n : f.nodes) {
            const int row = dofs.vdof[n][2];
            ASSERT_GE(row, 0);
            expected[row] -= mesh.facet_area(f) / 3.0 * (-7.0);
        }
    }
    for (int r = 0; r < dofs.nv; ++r) EXPECT_NEAR(rm[r], expected[r], 1e-15);
}

TEST(Assembly, StabilizationParameterFollowsElementSize)
{
    const Material mat = neo_hookean_test_material();
    const Mesh coarse = generate_cube_mesh(2, 0.1);
    const Mesh fine = generate_cube_mesh(4, 0.1);
    const double c_m = 1e-3;
    const StabilizationParams sc = compute_tau(coarse, mat, c_m);
    const StabilizationParams sf = compute_tau(fine, mat, c_m);
    ASSERT_EQ(sc.tau.size(), static_cast<std::size_t>(coarse.n_tets()));
    const double expected = c_m * coarse.h[0] / (mat.wave_speed() * mat.rho0);
    for (double t : sc.tau) EXPECT_NEAR(t, expected, 1e-18);
    // Halving h halves tau; scaling c_m is linear.
    EXPECT_NEAR(sf.tau[0], 0.5 * sc.tau[0], 1e-18);
    EXPECT_NEAR(compute_tau(coarse, mat, 2.0 * c_m).tau[0], 2.0 * sc.tau[0], 1e-18);
}

TEST(Assembly, ThrowsOnElementInversion)
{
    const Mesh mesh = generate_cube_mesh(1, 1.0);
    const DofMap dofs = free_dofs(mesh);
    const Material mat = neo_hookean_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);
    State s = State::zeros(mesh.n_nodes());
    // Collapse the x = 1 face through the x = 0 face.
    for (int n = 0; n < mesh.n_nodes(); ++n)
        if (mesh.nodes[n][0] > 0.5) s.u[3 * n + 0] = -2.0;
    std::vector<double> rm, rp;
    EXPECT_THROW(assemble_residuals(mesh, dofs, mat, stab, {}, s, rm, rp),
                 ElementInversion);
    const TimeScalars ts{0.1, 5.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0};
    EXPECT_THROW(assemble_tangent(mesh, dofs, mat, stab, {}, s, ts), ElementInversion);
}

TEST(Assembly, AssemblyIsDeterministic)
{
    const Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const Material mat = fiber_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);
    const State s = smooth_state(mesh);
    const TimeScalars ts{0.05, 5.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0};

    std::vector<double> rm1, rp1, rm2, rp2;
    assemble_residuals(mesh, dofs, mat, stab, {}, s, rm1, rp1);
    assemble_residuals(mesh, dofs, mat, stab, {}, s, rm2, rp2);
    EXPECT_EQ(rm1, rm2);
    EXPECT_EQ(rp1, rp2);

    const TangentBlocks t1 = assemble_tangent(mesh, dofs, mat, stab, {}, s, ts);
    const TangentBlocks t2 = assemble_tangent(mesh, dofs, mat, stab, {}, s, ts);
    EXPECT_EQ(t1.K.A.val, t2.K.A.val);
    EXPECT_EQ(t1.K.B.val, t2.K.B.val);
    EXPECT_EQ(t1.K.C.val, t2.K.C.val);
    EXPECT_EQ(t1.K.D.val, t2.K.D.val);
    EXPECT_EQ(t1.A_rate.val, t2.A_rate.val);
    EXPECT_EQ(t1.C_rate.val, t2.C_rate.val);
}

// In the vanishing-time-step limit the velocity block reduces to the scaled
// mass matrix, whose entries on linear tets are known in closed form:
// integral of N_a N_b over an element is V/10 (a == b) or V/20.
TEST(Assembly, VelocityBlockApproachesMassMatrixForSmallTimeStep)
{
    const Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const Material mat = neo_hookean_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);
    const double alpha_m = 5.0 / 6.0;
    const TimeScalars ts{1e-12, alpha_m, 2.0 / 3.0, 2.0 / 3.0};
    const TangentBlocks t =
        assemble_tangent(mesh, dofs, mat, stab, {}, State::zeros(mesh.n_nodes()), ts);

    // Independent mass matrix assembled from the closed-form integrals.
    std::vector<std::vector<double>> mass(dofs.nv, std::vector<double>(dofs.nv, 0.0));
    const double rho0 = mat.vol->rho(0.0);
    for (int e = 0; e < mesh.n_tets(); ++e)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const double m =
                    rho0 * mesh.volume[e] * (a == b ? 1.0 / 10.0 : 1.0 / 20.0);
                for (int i = 0; i < 3; ++i) {
                    const int row = dofs.vdof[mesh.tets[e][a]][i];
                    const int col = dofs.vdof[mesh.tets[e][b]][i];
                    if (row >= 0 && col >= 0) mass[row][col] += alpha_m * m;
                }
            }

    double max_entry = 0.0;
    for (const auto& row : mass)
        for (double v : row) max_entry = std::max(max_entry, std::abs(v));
    for (int r = 0; r < dofs.nv; ++r)
        for (int k = t.K.A.rowptr[r]; k < t.K.A.rowptr[r + 1]; ++k)
            EXPECT_NEAR(t.K.A.val[k], mass[r][t.K.A.col[k]], 1e-8 * max_entry);

    // The pressure coupling scales with chi and must vanish along with it.
    double bmax = 0.0;
    for (double v : t.K.B.val) bmax = std::max(bmax, std::abs(v));
    EXPECT_LE(bmax, 1e-9 * max_entry);

    // A_rate equals the mass-like part of A exactly in this limit.
    for (int r = 0; r < dofs.nv; ++r)
        for (int k = t.A_rate.rowptr[r]; k < t.A_rate.rowptr[r + 1]; ++k)
            EXPECT_NEAR(t.A_rate.val[k], mass[r][t.A_rate.col[k]], 1e-8 * max_entry);
}

TEST(Assembly, IncompressibleStabilizationControlsPressureBlock)
{
    const Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const Material mat = fiber_test_material();
    ASSERT_TRUE(mat.incompressible);
    const TimeScalars ts{0.1, 5.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0};

    // Without stabilization the D block of an incompressible material is
    // identically zero at the reference state; with it, D carries the
    // pressure Laplacian.
    StabilizationParams none = compute_tau(mesh, mat, 0.0);
    const TangentBlocks t0 =
        assemble_tangent(mesh, dofs, mat, none, {}, State::zeros(mesh.n_nodes()), ts);
    for (double v : t0.K.D.val) EXPECT_DOUBLE_EQ(v, 0.0);

    StabilizationParams stab = compute_tau(mesh, mat, 1e-3);
    const TangentBlocks t1 =
        assemble_tangent(mesh, dofs, mat, stab, {}, State::zeros(mesh.n_nodes()), ts);
    double dmax = 0.0;
    for (double v : t1.K.D.val) dmax = std::max(dmax, std::abs(v));
    EXPECT_GT(dmax, 0.0);
}

// The consistent-tangent check: moving the stage state along the coupled
// update direction must change the residuals by eps * [A B; C D] [dv; dp]
// up to O(eps^2).
TEST(Assembly, TangentIsConsistentWithResiduals)
{
    const Mesh mesh = generate_cube_mesh(2, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const TimeScalars ts{0.02, 5.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0};
    const Material mats[2] = {neo_hookean_test_material(), fiber_test_material()};

    Loads loads;
    loads.body_force = {0.0, 0.0, -10.0};
    loads.tractions.push_back({mesh.tag_id("zmax"), {0.0, 0.0, -0.4}});

    for (const Material& mat : mats) {
        const StabilizationParams stab = compute_tau(mesh, mat);
        const State bases[2] = {State::zeros(mesh.n_nodes()), smooth_state(mesh)};
        for (const State& base : bases) {
            std::vector<double> rm0, rp0;
            assemble_residuals(mesh, dofs, mat, stab, loads, base, rm0, rp0);
            const TangentBlocks t =
                assemble_tangent(mesh, dofs, mat, stab, loads, base, ts);

            const std::vector<double> dv = random_unit(dofs.nv, 101);
            const std::vector<double> dp = random_unit(dofs.np, 202);
            std::vector<double> kd(dofs.nv + dofs.np, 0.0);
            std::vector<double> dir(dofs.nv + dofs.np);
            std::copy(dv.begin(), dv.end(), dir.begin());
            std::copy(dp.begin(), dp.end(), dir.begin() + dofs.nv);
            t.K.matvec(dir.data(), kd.data());

            const double norm_kd = std::sqrt(vec_dot(kd, kd));
            ASSERT_GT(norm_kd, 0.0);
            double prev_err = -1.0;
            for (const double eps : {1e-3, 1e-4, 1e-5}) {
                const State pert = perturbed_stage_state(base, dofs, dv, dp, eps, ts);
                std::vector<double> rm1, rp1;
                assemble_residuals(mesh, dofs, mat, stab, loads, pert, rm1, rp1);
                double err2 = 0.0;
                for (int i = 0; i < dofs.nv; ++i) {
                    const double d = rm1[i] - rm0[i] - eps * kd[i];
                    err2 += d * d;
                }
                for (int i = 0; i < dofs.np; ++i) {
                    const double d = rp1[i] - rp0[i] - eps * kd[dofs.nv + i];
                    err2 += d * d;
                }
                const double err = std::sqrt(err2);
                // An identity mismatch of less than 1e-7 of the linear term is
                // agreement beyond finite-difference resolution: the smallest
                // steps bottom out on roundoff instead of decaying further.
                const double exact_floor = 1e-7 * eps * norm_kd;
                if (prev_err >= 0.0 && err > exact_floor) {
                    // One decade in eps must buy ~two decades of error.
                    EXPECT_LE(err, prev_err / 30.0)
                        << "eps=" << eps << " base residual " << vec_norm(rm0);
                }
                // The identity itself: error stays far below the linear term.
                EXPECT_LE(err, 1e-4 * eps * norm_kd) << "eps=" << eps;
                prev_err = err;
            }
        }
    }
}

// Full re-derivation of the residual integrands on a coarse mesh, written as
// an independent pass over elements and checked entry for entry.
TEST(Assembly, ResidualsMatchHandQuadrature)
{
    Mesh mesh = generate_cube_mesh(1, 0.1);
    const DofMap dofs = bottom_clamped_dofs(mesh);
    const Material mat = fiber_test_material();
    const StabilizationParams stab = compute_tau(mesh, mat);
    const State s = smooth_state(mesh);
    Loads loads;
    loads.body_force = {2.0, -1.0, 4.0};
    loads.tractions.push_back({mesh.tag_id("xmax"), {1.5, 0.0, -0.5}});

    std::vector<double> rm, rp;
    assemble_residuals(mesh, dofs, mat, stab, loads, s, rm, rp);

    const TetRule& rule = tet_rule();
    std::vector<double> hm(dofs.nv, 0.0), hp(dofs.np, 0.0);
    for (int e = 0; e < mesh.n_tets(); ++e) {
        const auto& tet = mesh.tets[e];
        const auto& G = mesh.grad_N[e];
        Mat3 F = kIdentity3;
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i)
                for (int I = 0; I < 3; ++I)
                    F[3 * i + I] += s.u[3 * tet[a] + i] * G[a][I];
        const Kinematics kin = Kinematics::from_F(F);
        const StressState st = evaluate_stress(kin, *mat.iso);
        Vec3 g[4];
        for (int a = 0; a < 4; ++a) g[a] = tmulvec3(kin.Finv, G[a]);

        Vec3 gradp{0.0, 0.0, 0.0};
        double divv = 0.0;
        for (int a = 0; a < 4; ++a) {
            for (int i = 0; i < 3; ++i) {
                gradp[i] += s.p[tet[a]] * g[a][i];
                divv += s.v[3 * tet[a] + i] * g[a][i];
            }
        }

        double pbar = 0.0;
        for (int q = 0; q < TetRule::n; ++q) {
            const double wq = rule.w[q] * mesh.volume[e];
            double pq = 0.0, pdq = 0.0;
            Vec3 aq{0.0, 0.0, 0.0};
            for (int a = 0; a < 4; ++a) {
                pq += rule.bary[q][a] * s.p[tet[a]];
                pdq += rule.bary[q][a] * s.pdot[tet[a]];
                for (int i = 0; i < 3; ++i)
                    aq[i] += rule.bary[q][a] * s.vdot[3 * tet[a] + i];
            }
            pbar += rule.w[q] * pq;
            const double rho = mat.vol->rho(pq);
            const double beta = mat.vol->beta(pq);
            for (int a = 0; a < 4; ++a) {
                // Pressure equation: continuity plus the stabilizing
                // projection of the strong momentum residual.
                double strong = 0.0;
                for (int i = 0; i < 3; ++i)
                    strong += g[a][i] * (rho * kin.J * (aq[i] - loads.body_force[i]) +
                                         kin.J * gradp[i]);
                hp[tet[a]] += wq * (rule.bary[q][a] * kin.J * (beta * pdq + divv) +
                                    stab.tau[e] * strong);
                // Momentum equation: inertia minus body force.
                for (int i = 0; i < 3; ++i) {
                    const int row = dofs.vdof[tet[a]][i];
                    if (row >= 0)
                        hm[row] += wq * rule.bary[q][a] * rho * kin.J *
                                   (aq[i] - loads.body_force[i]);
                }
            }
        }
        // Internal stress work and the pressure term, constant over the
        // element for linear shape functions.
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i) {
                const int row = dofs.vdof[tet[a]][i];
                if (row < 0) continue;
                double w = 0.0;
                for (int I = 0; I < 3; ++I) w += G[a][I] * st.Ptilde[3 * i + I];
                hm[row] += mesh.volume[e] * (w - g[a][i] * kin.J * pbar);
            }
    }
    for (const int fi : mesh.facets_with_tag(mesh.tag_id("xmax"))) {
        const BoundaryFacet& f = mesh.facets[fi];
        for (const int n : f.nodes)
            for (int i = 0; i < 3; ++i) {
                const int row = dofs.vdof[n][i];
                if (row >= 0)
                    hm[row] -= mesh.facet_area(f) / 3.0 * loads.tractions[0].h[i];
            }
    }

    const double mscale = inf_norm(hm), pscale = inf_norm(hp);
    ASSERT_GT(mscale, 0.0);
    ASSERT_GT(pscale, 0.0);
    for (int r = 0; r < dofs.nv; ++r) EXPECT_NEAR(rm[r], hm[r], 1e-12 * mscale);
    for (int n = 0; n < dofs.np; ++n) EXPECT_NEAR(rp[n], hp[n], 1e-12 * pscale);
}
