#pragma once

#include "elastodyn/csr.hpp"
#include "elastodyn/mesh.hpp"
#include "elastodyn/timeint.hpp"

#include <string>
#include <vector>

namespace elastodyn {

// A named nodal field for VTK output.  `components` is 1 (scalar) or 3
// (vector); `data` holds components * n_nodes entries, node-major.
struct NodalField {
    std::string name;
    int components = 1;
    const std::vector<double>* data = nullptr;
};

// Legacy ASCII VTK unstructured-grid file (tet cells) with point data.
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<NodalField>& fields);

// Per-step solver statistics:
//   step,t,l_hat,n,n_bar_A,n_bar_S,n_bar_I,T_A,T_L,converged
// l_hat   corrector passes that solved a linear system
// n       average outer Krylov iterations per linear solve
// n_bar_A average momentum-block iterations per momentum solve
// n_bar_S average Schur iterations per Schur solve
// n_bar_I average inner iterations per Schur-complement application
// T_A     assembly seconds, T_L linear-solve seconds (per step totals)
void write_stats_csv(const std::string& path, const std::vector<StepStats>& steps);

struct LoadDisplacementRow {
    double t = 0.0;
    double load = 0.0;         // applied total force (dyn)
    double displacement = 0.0; // mean displacement of the loaded face (cm)
};

void write_load_displacement_csv(const std::string& path,
                                 const std::vector<LoadDisplacementRow>& rows);

// Alignment of the two deformed fiber families, per node: the element value
// a1 . C a2 / (|F a1| |F a2|) is averaged to nodes with volume weights.
// `u` is the full nodal displacement array (3 * n_nodes).
std::vector<double> fiber_alignment_field(const Mesh& mesh, const std::vector<double>& u,
                                          const Vec3& a1, const Vec3& a2);

// Matrix Market exchange files (1-based coordinate / dense array format).
void write_matrix_market(const std::string& path, const CsrMatrix& A);
void write_matrix_market_vector(const std::string& path, const std::vector<double>& v);

} // namespace elastodyn
