#pragma once

#include "elastodyn/blocksystem.hpp"
#include "elastodyn/materials.hpp"
#include "elastodyn/mesh.hpp"

#include <array>
#include <vector>

namespace elastodyn {

// Maps mesh nodes to rows of the reduced block system.  Velocity components
// with a homogeneous essential constraint are eliminated; the remaining
// components are numbered node-major so that rows of one node stay contiguous
// (the multigrid hierarchy aggregates nodes, not scalar rows).  Every nodal
// pressure is an unknown; pressure row == node index.
struct DofMap {
    int n_nodes = 0;
    int nv = 0; // free velocity components
    int np = 0; // pressure unknowns (== n_nodes)
    std::vector<std::array<int, 3>> vdof; // per node: row index or -1 if fixed
    std::vector<int> row_node;            // per velocity row: mesh node
    std::vector<int> row_comp;            // per velocity row: component 0..2

    static DofMap build(const Mesh& mesh, const std::vector<std::array<bool, 3>>& fixed);
};

// Nodal fields of the mixed problem and their time derivatives, stored as
// full-length arrays (3*n_nodes / n_nodes).  Constrained entries hold their
// prescribed values (zero for the supported homogeneous constraints).
struct State {
    std::vector<double> u, udot;   // displacement and its rate, 3*n_nodes
    std::vector<double> p, pdot;   // pressure and its rate, n_nodes
    std::vector<double> v, vdot;   // velocity and its rate, 3*n_nodes

    static State zeros(int n_nodes);
};

// Dead surface tractions (first Piola type, applied on the referential
// boundary) plus a constant body force.  Traction values are the currently
// active ones; time ramping happens in the driver before assembly.
struct TractionLoad {
    int tag = -1;
    Vec3 h{0.0, 0.0, 0.0}; // dyn/cm^2
};

struct Loads {
    Vec3 body_force{0.0, 0.0, 0.0}; // cm/s^2
    std::vector<TractionLoad> tractions;
};

// Element-wise stabilization parameter tau^e = c_m h^e / (c rho0), with c the
// maximum wave speed of the (simplified) material model.
struct StabilizationParams {
    double c_m = 1e-3;
    std::vector<double> tau; // per element
};

StabilizationParams compute_tau(const Mesh& mesh, const Material& mat, double c_m = 1e-3);

// Time-integrator constants entering the consistent tangent.
struct TimeScalars {
    double dt = 1.0;
    double alpha_m = 1.0;
    double alpha_f = 1.0;
    double gamma = 1.0;

    // d(value)/d(rate unknown): y_{n+alpha_f} depends on the end-of-step rate
    // through alpha_f * gamma * dt.
    double chi() const { return alpha_f * gamma * dt; }
};

// Consistent tangent of the reduced two-field Newton update.  K holds the
// blocks A, B, C, D; A_rate and C_rate are the parts of A and C that multiply
// the acceleration increment directly (the mass-like terms), needed to fold
// the kinematic residual into the right-hand side during the first corrector
// pass.
struct TangentBlocks {
    BlockMatrix K;
    CsrMatrix A_rate;
    CsrMatrix C_rate;
};

// Residuals of the stabilized mixed formulation, reduced to free rows.  The
// state must already be evaluated at the intermediate stages (rates at
// n+alpha_m, values at n+alpha_f).  Throws ElementInversion when an element
// reaches J <= 0.
void assemble_residuals(const Mesh& mesh, const DofMap& dofs, const Material& mat,
                        const StabilizationParams& stab, const Loads& loads,
                        const State& s, std::vector<double>& r_m, std::vector<double>& r_p);

TangentBlocks assemble_tangent(const Mesh& mesh, const DofMap& dofs, const Material& mat,
                               const StabilizationParams& stab, const Loads& loads,
                               const State& s, const TimeScalars& ts);

} // namespace elastodyn
