#include "elastodyn/driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace elastodyn {

namespace {

double ramp_value(double t, double peak, double ramp)
{
    if (ramp <= 0.0) return peak;
    return peak * std::min(t / ramp, 1.0);
}

std::pair<Vec3, Vec3> fiber_directions(double phi_deg)
{
    const double phi = phi_deg * std::acos(-1.0) / 180.0;
    return {Vec3{std::cos(phi), std::sin(phi), 0.0},
            Vec3{std::cos(phi), -std::sin(phi), 0.0}};
}

// Velocity-block multigrid grouping from the constraint map.  Nodes with all
// components eliminated disappear, so surviving node ids are compressed to a
// contiguous range.
void set_amg_maps(const DofMap& d, BlockSolverOptions& ls)
{
    ls.amg_a.block_size = 3;
    ls.amg_a.row_component = d.row_comp;
    ls.amg_a.row_to_node.resize(d.nv);
    int cur = -1, prev = -1;
    for (int r = 0; r < d.nv; ++r) {
        if (d.row_node[r] != prev) {
            prev = d.row_node[r];
            ++cur;
        }
        ls.amg_a.row_to_node[r] = cur;
    }
    ls.amg_s.block_size = 1;
    ls.amg_s.row_to_node.clear();
    ls.amg_s.row_component.clear();
}

// Resolves (mu, kappa, incompressible) from the config: eta scales the
// stiffness, and a requested Poisson ratio overrides kappa (nu >= 0.5 selects
// the incompressible model).
struct ResolvedElasticity {
    double mu = 0.0;
    double kappa = 0.0;
    bool incompressible = false;
};

ResolvedElasticity resolve_elasticity(const BenchmarkConfig& cfg)
{
    ResolvedElasticity r;
    r.mu = cfg.effective_mu();
    r.incompressible = cfg.incompressible;
    r.kappa = cfg.kappa * cfg.eta; // keep the kappa/mu ratio under eta scaling
    if (cfg.has_nu) {
        if (cfg.nu < 0.0 || cfg.nu > 0.5)
            throw std::runtime_error("driver: nu must lie in [0, 0.5]");
        if (cfg.nu >= 0.5 - 1e-12) {
            r.incompressible = true;
        } else {
            r.incompressible = false;
            r.kappa = kappa_from_nu(r.mu, cfg.nu);
        }
    }
    return r;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// Numeric cell, or NC when the run did not converge, or - when the counter
// has no meaning for the configuration (e.g. no inner solves happened).
std::string cell(double v, bool ok, bool applicable = true)
{
    if (!ok) return "NC";
    if (!applicable) return "-";
    return fmt(v);
}

void write_snapshot(const BenchmarkProblem& prob, const State& s, int step)
{
    std::ostringstream name;
    name << prob.cfg.out_dir << "/step_" << std::setw(4) << std::setfill('0') << step
         << ".vtk";
    std::vector<NodalField> fields = {{"displacement", 3, &s.u},
                                      {"velocity", 3, &s.v},
                                      {"pressure", 1, &s.p}};
    std::vector<double> align;
    if (prob.cfg.kind == BenchmarkKind::TensileTest) {
        const auto [a1, a2] = fiber_directions(prob.cfg.phi_deg);
        align = fiber_alignment_field(prob.mesh, s.u, a1, a2);
        fields.push_back({"fiber_alignment", 1, &align});
    }
    write_vtk(name.str(), prob.mesh, fields);
}

// Aggregated per-run statistics for the sweep tables.
struct RunAverages {
    int l_hat = 0;        // nonlinear iterations over the whole run
    LinearStats linear;   // accumulated counters
    bool ok = false;      // every step and every linear solve converged
    double n_avg() const
    {
        return l_hat ? double(linear.outer_iters) / double(l_hat) : 0.0;
    }
    double t_avg() const { return l_hat ? linear.t_solve / double(l_hat) : 0.0; }
};

RunAverages aggregate(const BenchmarkResult& res)
{
    RunAverages a;
    a.ok = res.completed && !res.steps.empty();
    for (const StepStats& st : res.steps) {
        a.l_hat += st.newton_iters;
        a.linear.add(st.linear);
        a.ok = a.ok && st.converged;
    }
    a.ok = a.ok && a.linear.converged;
    return a;
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

PrecondKind precond_from_name(const std::string& name)
{
    if (name == "nested") return PrecondKind::Nested;
    if (name == "simple") return PrecondKind::Simple;
    if (name == "ilu0") return PrecondKind::Ilu0;
    if (name == "jacobi") return PrecondKind::Jacobi;
    if (name == "none") return PrecondKind::None;
    throw std::runtime_error("driver: unknown preconditioner '" + name + "'");
}

std::string precond_name(PrecondKind kind)
{
    switch (kind) {
    case PrecondKind::Nested: return "nested";
    case PrecondKind::Simple: return "simple";
    case PrecondKind::Ilu0: return "ilu0";
    case PrecondKind::Jacobi: return "jacobi";
    case PrecondKind::None: return "none";
    }
    return "?";
}

BenchmarkConfig BenchmarkConfig::block_compression_defaults()
{
    BenchmarkConfig c;
    c.kind = BenchmarkKind::BlockCompression;
    c.nx = c.ny = c.nz = 8;
    c.lx = c.ly = c.lz = 0.1;
    c.dt = 0.1;
    c.n_steps = 10;
    c.mu = 8.0194e8;          // 80.194 MPa
    c.kappa = 4.00889806e12;  // 400889.806 MPa
    c.incompressible = false;
    c.load = 3.2e9;           // 320 MPa peak compressive traction
    c.ramp_time = -1.0;       // default: full load reached at t = 1
    c.linear.outer = KrylovConfig{200, 200, 1e-8, 1e-50};
    c.linear.scr.a = KrylovConfig{500, 500, 1e-6, 1e-50};
    c.linear.scr.s = KrylovConfig{200, 200, 1e-6, 1e-50};
    c.linear.scr.inner = KrylovConfig{500, 500, 1e-4, 1e-50};
    return c;
}

BenchmarkConfig BenchmarkConfig::tensile_test_defaults()
{
    BenchmarkConfig c = block_compression_defaults();
    c.kind = BenchmarkKind::TensileTest;
    c.nx = 20;
    c.ny = 6;
    c.nz = 1;
    c.lx = 0.5;
    c.ly = 0.15;
    c.lz = 0.025;
    c.dt = 1.0;
    c.n_steps = 100;
    c.mu = 7.64e4; // 7.64 kPa
    c.incompressible = true;
    c.k1 = 9.966e6; // 996.6 kPa
    c.k2 = 524.6;
    c.kd = 0.226;
    c.phi_deg = 40.02; // axial specimen; 49.98 for the circumferential one
    c.load = 2e5;      // 2 N total force on the full specimen
    c.ramp_time = 100.0;
    return c;
}

double BenchmarkConfig::ramp_duration() const
{
    // The applied load grows linearly in absolute time and reaches its peak
    // at a fixed instant (t = 1 for the compression block, t = 100 for the
    // tensile strip) regardless of the step size, so shrinking dt only
    // shrinks the per-step load increment.
    if (ramp_time >= 0.0) return ramp_time;
    return kind == BenchmarkKind::BlockCompression ? 1.0 : 100.0;
}

void BenchmarkConfig::apply(const Config& c)
{
    if (c.has("mesh.n")) nx = ny = nz = c.get_int("mesh.n", nx);
    nx = c.get_int("mesh.nx", nx);
    ny = c.get_int("mesh.ny", ny);
    nz = c.get_int("mesh.nz", nz);
    lx = c.get_double("mesh.lx", lx);
    ly = c.get_double("mesh.ly", ly);
    lz = c.get_double("mesh.lz", lz);

    dt = c.get_double("time.dt", dt);
    n_steps = c.get_int("time.n_steps", n_steps);
    rho_inf = c.get_double("time.rho_inf", rho_inf);

    rho0 = c.get_double("material.rho0", rho0);
    mu = c.get_double("material.mu", mu);
    kappa = c.get_double("material.kappa", kappa);
    eta = c.get_double("material.eta", eta);
    if (c.has("material.nu")) {
        has_nu = true;
        nu = c.get_double("material.nu", nu);
    }
    incompressible = c.get_bool("material.incompressible", incompressible);
    k1 = c.get_double("material.k1", k1);
    k2 = c.get_double("material.k2", k2);
    kd = c.get_double("material.kd", kd);
    phi_deg = c.get_double("material.phi_deg", phi_deg);

    load = c.get_double("load.magnitude", load);
    ramp_time = c.get_double("load.ramp_time", ramp_time);

    c_m = c.get_double("stabilization.c_m", c_m);

    newton.tol_R = c.get_double("newton.tol_rel", newton.tol_R);
    newton.tol_A = c.get_double("newton.tol_abs", newton.tol_A);
    newton.l_max = c.get_int("newton.max_iters", newton.l_max);

    if (c.has("solver.precond"))
        linear.precond = precond_from_name(c.get_string("solver.precond", ""));
    linear.outer.rel_tol = c.get_double("solver.outer_rtol", linear.outer.rel_tol);
    linear.outer.restart = c.get_int("solver.outer_restart", linear.outer.restart);
    linear.outer.max_iters = c.get_int("solver.outer_max", linear.outer.max_iters);
    linear.scr.a.rel_tol = c.get_double("solver.tol_a", linear.scr.a.rel_tol);
    linear.scr.a.max_iters = c.get_int("solver.a_max", linear.scr.a.max_iters);
    linear.scr.s.rel_tol = c.get_double("solver.tol_s", linear.scr.s.rel_tol);
    linear.scr.s.max_iters = c.get_int("solver.s_max", linear.scr.s.max_iters);
    linear.scr.inner.rel_tol = c.get_double("solver.tol_i", linear.scr.inner.rel_tol);
    linear.scr.inner.max_iters = c.get_int("solver.i_max", linear.scr.inner.max_iters);
    linear.scale = c.get_bool("solver.scale", linear.scale);

    out_dir = c.get_string("output.dir", out_dir);
    write_vtk_files = c.get_bool("output.vtk", write_vtk_files);
    vtk_every = c.get_int("output.vtk_every", vtk_every);
    quiet = c.get_bool("output.quiet", quiet);
}

BenchmarkConfig BenchmarkConfig::from_config(const Config& c)
{
    const std::string which = c.get_string("benchmark", "block-compression");
    BenchmarkConfig cfg;
    if (which == "block-compression") {
        cfg = block_compression_defaults();
    } else if (which == "tensile-test") {
        cfg = tensile_test_defaults();
    } else {
        throw std::runtime_error("driver: unknown benchmark '" + which + "'");
    }
    cfg.apply(c);
    return cfg;
}

// ---------------------------------------------------------------------------
// Benchmark setup

TransientProblem BenchmarkProblem::transient() const
{
    TransientProblem tp;
    tp.mesh = &mesh;
    tp.dofs = &dofs;
    tp.mat = &mat;
    tp.stab = stab;
    tp.loads_at = loads_at;
    return tp;
}

double BenchmarkProblem::mean_loaded_displacement(const State& s) const
{
    if (loaded_nodes.empty()) return 0.0;
    double sum = 0.0;
    for (int n : loaded_nodes) sum += s.u[3 * n + measure_comp];
    return sum / double(loaded_nodes.size());
}

BenchmarkProblem make_block_compression(const BenchmarkConfig& cfg)
{
    BenchmarkProblem P;
    P.cfg = cfg;
    P.mesh = generate_box_mesh(cfg.nx, cfg.ny, cfg.nz, cfg.lx, cfg.ly, cfg.lz);
    const double tol = 1e-9 * std::max({cfg.lx, cfg.ly, cfg.lz});

    // Symmetry planes at x = 0 and y = 0, vertical roller on the bottom, and
    // a laterally constrained top face.
    std::vector<std::array<bool, 3>> fixed(P.mesh.n_nodes(), {false, false, false});
    for (int n = 0; n < P.mesh.n_nodes(); ++n) {
        const Vec3& x = P.mesh.nodes[n];
        if (x[0] < tol) fixed[n][0] = true;
        if (x[1] < tol) fixed[n][1] = true;
        if (x[2] < tol) fixed[n][2] = true;
        if (x[2] > cfg.lz - tol) {
            fixed[n][0] = true;
            fixed[n][1] = true;
        }
    }
    P.dofs = DofMap::build(P.mesh, fixed);

    const ResolvedElasticity el = resolve_elasticity(cfg);
    if (el.incompressible) {
        Material m;
        m.vol = std::make_unique<IncompressibleVolumetric>(cfg.rho0);
        m.iso = std::make_unique<NeoHookeanIsochoric>(el.mu);
        m.rho0 = cfg.rho0;
        m.mu = el.mu;
        m.incompressible = true;
        P.mat = std::move(m);
    } else {
        P.mat = make_neo_hookean_material(el.mu, el.kappa, cfg.rho0);
    }
    P.stab = compute_tau(P.mesh, P.mat, cfg.c_m);

    // Compressive traction on the quarter of the top face adjacent to the
    // symmetry corner.
    const int zmax = P.mesh.tag_id("zmax");
    P.mesh.retag_facets(
        zmax,
        [&](const Vec3& c) {
            return c[0] <= 0.5 * cfg.lx + tol && c[1] <= 0.5 * cfg.ly + tol;
        },
        "top_load");
    const int load_tag = P.mesh.tag_id("top_load");
    double area = 0.0;
    std::set<int> nodes;
    for (int f : P.mesh.facets_with_tag(load_tag)) {
        area += P.mesh.facet_area(P.mesh.facets[f]);
        for (int n : P.mesh.facets[f].nodes) nodes.insert(n);
    }
    P.loaded_nodes.assign(nodes.begin(), nodes.end());
    P.measure_comp = 2;

    const double peak = cfg.effective_load();
    const double ramp = cfg.ramp_duration();
    P.force_at = [=](double t) { return ramp_value(t, peak, ramp) * area; };
    P.loads_at = [=](double t) {
        Loads L;
        L.tractions.push_back({load_tag, {0.0, 0.0, -ramp_value(t, peak, ramp)}});
        return L;
    };

    P.ga = gen_alpha_params(cfg.rho_inf, cfg.dt);
    set_amg_maps(P.dofs, P.cfg.linear);
    P.cfg.linear.amg_a.quiet = P.cfg.linear.amg_s.quiet = cfg.quiet;
    return P;
}

BenchmarkProblem make_tensile_test(const BenchmarkConfig& cfg)
{
    BenchmarkProblem P;
    P.cfg = cfg;
    P.mesh = generate_slab_mesh(cfg.nx, cfg.ny, cfg.nz, cfg.lx, cfg.ly, cfg.lz);
    const double tol = 1e-9 * std::max({cfg.lx, cfg.ly, cfg.lz});

    // One-eighth model: symmetry planes at x = 0, y = 0, z = 0; the loaded
    // cross-section at x = lx stays planar (clamped laterally).
    std::vector<std::array<bool, 3>> fixed(P.mesh.n_nodes(), {false, false, false});
    for (int n = 0; n < P.mesh.n_nodes(); ++n) {
        const Vec3& x = P.mesh.nodes[n];
        if (x[0] < tol) fixed[n][0] = true;
        if (x[1] < tol) fixed[n][1] = true;
        if (x[2] < tol) fixed[n][2] = true;
        if (x[0] > cfg.lx - tol) {
            fixed[n][1] = true;
            fixed[n][2] = true;
        }
    }
    P.dofs = DofMap::build(P.mesh, fixed);

    const ResolvedElasticity el = resolve_elasticity(cfg);
    P.mat = make_fiber_material(el.mu, cfg.k1, cfg.k2, cfg.kd, cfg.phi_deg, cfg.rho0);
    if (!el.incompressible) {
        P.mat.vol = std::make_unique<CompressibleVolumetric>(cfg.rho0, el.kappa);
        P.mat.kappa = el.kappa;
        P.mat.incompressible = false;
    }
    P.stab = compute_tau(P.mesh, P.mat, cfg.c_m);

    const int load_tag = P.mesh.tag_id("xmax");
    double area = 0.0;
    std::set<int> nodes;
    for (int f : P.mesh.facets_with_tag(load_tag)) {
        area += P.mesh.facet_area(P.mesh.facets[f]);
        for (int n : P.mesh.facets[f].nodes) nodes.insert(n);
    }
    P.loaded_nodes.assign(nodes.begin(), nodes.end());
    P.measure_comp = 0;

    // `load` is the total force on the full specimen; the one-eighth model
    // carries a quarter of it over the referential cross-section area.
    const double peak = cfg.effective_load();
    const double ramp = cfg.ramp_duration();
    const double quarter_area = cfg.ly * cfg.lz;
    P.force_at = [=](double t) { return ramp_value(t, peak, ramp); };
    P.loads_at = [=](double t) {
        Loads L;
        const double h = 0.25 * ramp_value(t, peak, ramp) / quarter_area;
        L.tractions.push_back({load_tag, {h, 0.0, 0.0}});
        return L;
    };

    P.ga = gen_alpha_params(cfg.rho_inf, cfg.dt);
    set_amg_maps(P.dofs, P.cfg.linear);
    P.cfg.linear.amg_a.quiet = P.cfg.linear.amg_s.quiet = cfg.quiet;
    return P;
}

BenchmarkProblem make_benchmark(const BenchmarkConfig& cfg)
{
    return cfg.kind == BenchmarkKind::BlockCompression ? make_block_compression(cfg)
                                                       : make_tensile_test(cfg);
}

// ---------------------------------------------------------------------------
// Runs

BenchmarkResult run_benchmark(const BenchmarkProblem& prob, bool write_outputs)
{
    const BenchmarkConfig& cfg = prob.cfg;
    if (write_outputs && !cfg.out_dir.empty())
        std::filesystem::create_directories(cfg.out_dir);

    BenchmarkResult res;
    res.state = State::zeros(prob.mesh.n_nodes());
    const TransientProblem tp = prob.transient();

    const auto on_step = [&](const State& s, const StepStats& st) {
        if (st.converged) {
            LoadDisplacementRow row;
            row.t = st.time;
            row.load = prob.force_at ? prob.force_at(st.time) : 0.0;
            row.displacement = prob.mean_loaded_displacement(s);
            res.load_disp.push_back(row);
            if (write_outputs && cfg.write_vtk_files &&
                (st.step % std::max(1, cfg.vtk_every) == 0 || st.step == cfg.n_steps))
                write_snapshot(prob, s, st.step);
        }
        if (!cfg.quiet) {
            std::cout << "step " << st.step << "/" << cfg.n_steps << "  t=" << st.time
                      << "  newton=" << st.newton_iters
                      << "  outer/solve=" << fmt(st.newton_iters
                                                     ? double(st.linear.outer_iters) /
                                                           st.newton_iters
                                                     : 0.0)
                      << "  A=" << fmt(st.linear.avg_a())
                      << "  S=" << fmt(st.linear.avg_s())
                      << "  I=" << fmt(st.linear.avg_inner())
                      << (st.converged ? "" : "  [no convergence]") << "\n";
        }
    };

    const RunResult rr = advance(tp, prob.ga, cfg.newton, cfg.linear, 0.0, cfg.n_steps,
                                 res.state, on_step);
    res.steps = rr.steps;
    res.completed = rr.completed;

    if (write_outputs && !cfg.out_dir.empty()) {
        write_stats_csv(cfg.out_dir + "/stats.csv", res.steps);
        write_load_displacement_csv(cfg.out_dir + "/load_displacement.csv", res.load_disp);
    }
    return res;
}

FirstStepSystem make_first_step_system(const BenchmarkProblem& prob)
{
    // From the zero initial state the same-displacement predictor and the
    // intermediate-stage blend are both identically zero, so the first
    // corrector pass assembles at the reference configuration with the loads
    // evaluated at t = alpha_f * dt.
    const State s = State::zeros(prob.mesh.n_nodes());
    const TimeScalars ts = prob.ga.scalars();
    const Loads loads = prob.loads_at(prob.ga.alpha_f * prob.ga.dt);

    FirstStepSystem sys;
    std::vector<double> rm, rp;
    assemble_residuals(prob.mesh, prob.dofs, prob.mat, prob.stab, loads, s, rm, rp);
    sys.tangent = assemble_tangent(prob.mesh, prob.dofs, prob.mat, prob.stab, loads, s, ts);
    sys.rhs.resize(prob.dofs.nv + prob.dofs.np);
    for (int i = 0; i < prob.dofs.nv; ++i) sys.rhs[i] = -rm[i];
    for (int i = 0; i < prob.dofs.np; ++i) sys.rhs[prob.dofs.nv + i] = -rp[i];
    return sys;
}

// ---------------------------------------------------------------------------
// Sweeps

int sweep_inner_tolerance(const BenchmarkConfig& base, const std::vector<double>& tols_inner,
                          std::ostream& out)
{
    out << "tol_I,T_L,l_hat,n,n_bar_A,n_bar_S,n_bar_I,converged\n";
    int nc = 0;
    for (double ti : tols_inner) {
        BenchmarkConfig cfg = base;
        cfg.n_steps = 1; // the study runs on the first time step
        cfg.linear.scr.inner.rel_tol = ti;
        cfg.quiet = true;
        cfg.write_vtk_files = false;
        const BenchmarkProblem prob = make_benchmark(cfg);
        const BenchmarkResult res = run_benchmark(prob, false);
        StepStats st;
        if (!res.steps.empty()) st = res.steps.front();
        const bool ok = res.completed && st.converged && st.linear.converged;
        if (!ok) ++nc;
        const bool inner_used = st.linear.schur_applies > 0;
        out << fmt(ti) << "," << cell(st.linear.t_solve, ok) << "," << st.newton_iters
            << "," << cell(double(st.linear.outer_iters), ok) << ","
            << cell(st.linear.avg_a(), ok) << "," << cell(st.linear.avg_s(), ok) << ","
            << cell(st.linear.avg_inner(), ok, inner_used) << "," << (ok ? 1 : 0) << "\n";
    }
    return nc;
}

int sweep_material(const BenchmarkConfig& base, const std::vector<double>& etas,
                   const std::vector<double>& nus, std::ostream& out)
{
    out << "eta,nu,l_hat,n,n_bar_A,n_bar_S,n_bar_I,T_L_bar,converged\n";
    int nc = 0;
    for (double eta : etas) {
        for (double nu : nus) {
            BenchmarkConfig cfg = base;
            cfg.eta = eta;
            cfg.has_nu = true;
            cfg.nu = nu;
            cfg.quiet = true;
            cfg.write_vtk_files = false;
            const BenchmarkProblem prob = make_benchmark(cfg);
            const BenchmarkResult res = run_benchmark(prob, false);
            const RunAverages a = aggregate(res);
            if (!a.ok) ++nc;
            const bool inner_used = a.linear.schur_applies > 0;
            out << fmt(eta) << "," << fmt(nu) << "," << a.l_hat << ","
                << cell(a.n_avg(), a.ok) << "," << cell(a.linear.avg_a(), a.ok) << ","
                << cell(a.linear.avg_s(), a.ok) << ","
                << cell(a.linear.avg_inner(), a.ok, inner_used) << ","
                << cell(a.t_avg(), a.ok) << "," << (a.ok ? 1 : 0) << "\n";
        }
    }
    return nc;
}

int sweep_preconditioner(const BenchmarkConfig& base, const std::vector<PrecondKind>& kinds,
                         std::ostream& out)
{
    out << "precond,l_hat,n,n_bar_A,n_bar_S,n_bar_I,T_L,converged\n";
    int nc = 0;
    for (PrecondKind kind : kinds) {
        BenchmarkConfig cfg = base;
        cfg.linear.precond = kind;
        cfg.quiet = true;
        cfg.write_vtk_files = false;
        // Single-level preconditioners need far more outer iterations to have
        // a chance of converging at all.
        if (kind == PrecondKind::Ilu0 || kind == PrecondKind::Jacobi ||
            kind == PrecondKind::None)
            cfg.linear.outer.max_iters = std::max(cfg.linear.outer.max_iters, 2000);
        const BenchmarkProblem prob = make_benchmark(cfg);
        const BenchmarkResult res = run_benchmark(prob, false);
        const RunAverages a = aggregate(res);
        if (!a.ok) ++nc;
        const bool blockwise = a.linear.a_solves > 0;
        const bool inner_used = a.linear.schur_applies > 0;
        out << precond_name(kind) << "," << a.l_hat << "," << cell(a.n_avg(), a.ok) << ","
            << cell(a.linear.avg_a(), a.ok, blockwise) << ","
            << cell(a.linear.avg_s(), a.ok, blockwise) << ","
            << cell(a.linear.avg_inner(), a.ok, inner_used) << ","
            << cell(a.linear.t_solve, a.ok) << "," << (a.ok ? 1 : 0) << "\n";
    }
    return nc;
}

LinearStats run_linear_bench(const BenchmarkConfig& cfg, std::ostream& out,
                             const std::string& export_basename)
{
    const BenchmarkProblem prob = make_benchmark(cfg);
    const FirstStepSystem sys = make_first_step_system(prob);
    std::vector<double> x;
    const LinearStats st = solve_block_system(sys.tangent.K, sys.rhs, x, prob.cfg.linear);

    const bool ok = st.converged;
    const bool blockwise = st.a_solves > 0;
    const bool inner_used = st.schur_applies > 0;
    out << "precond,rows,T_L,n,n_bar_A,n_bar_S,n_bar_I,converged\n";
    out << precond_name(prob.cfg.linear.precond) << "," << sys.tangent.K.size() << ","
        << cell(st.t_solve, ok) << "," << cell(double(st.outer_iters), ok) << ","
        << cell(st.avg_a(), ok, blockwise) << "," << cell(st.avg_s(), ok, blockwise) << ","
        << cell(st.avg_inner(), ok, inner_used) << "," << (ok ? 1 : 0) << "\n";

    if (!export_basename.empty()) {
        write_matrix_market(export_basename + "_K.mtx", monolithic_csr(sys.tangent.K));
        write_matrix_market_vector(export_basename + "_rhs.mtx", sys.rhs);
    }
    return st;
}

} // namespace elastodyn
