#include "elastodyn/output.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace elastodyn {

namespace {

std::ofstream open_or_throw(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("output: cannot open " + path + " for writing");
    out << std::setprecision(17);
    return out;
}

} // namespace

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<NodalField>& fields)
{
    std::ofstream out = open_or_throw(path);
    const int nn = mesh.n_nodes();
    const int ne = mesh.n_tets();

    out << "# vtk DataFile Version 3.0\n";
    out << "elastodyn result\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nn << " double\n";
    for (const Vec3& x : mesh.nodes) out << x[0] << " " << x[1] << " " << x[2] << "\n";

    out << "CELLS " << ne << " " << 5 * ne << "\n";
    for (const auto& t : mesh.tets)
        out << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
    out << "CELL_TYPES " << ne << "\n";
    for (int e = 0; e < ne; ++e) out << "10\n";

    if (fields.empty()) return;
    out << "POINT_DATA " << nn << "\n";
    for (const NodalField& f : fields) {
        if (!f.data || static_cast<int>(f.data->size()) != f.components * nn)
            throw std::runtime_error("output: field " + f.name + " has wrong size");
        const std::vector<double>& d = *f.data;
        if (f.components == 3) {
            out << "VECTORS " << f.name << " double\n";
            for (int a = 0; a < nn; ++a)
                out << d[3 * a] << " " << d[3 * a + 1] << " " << d[3 * a + 2] << "\n";
        } else if (f.components == 1) {
            out << "SCALARS " << f.name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (int a = 0; a < nn; ++a) out << d[a] << "\n";
        } else {
            throw std::runtime_error("output: field " + f.name +
                                     " must have 1 or 3 components");
        }
    }
}

void write_stats_csv(const std::string& path, const std::vector<StepStats>& steps)
{
    std::ofstream out = open_or_throw(path);
    out << "step,t,l_hat,n,n_bar_A,n_bar_S,n_bar_I,T_A,T_L,converged\n";
    for (const StepStats& s : steps) {
        const double solves = s.newton_iters > 0 ? double(s.newton_iters) : 1.0;
        out << s.step << "," << s.time << "," << s.newton_iters << ","
            << double(s.linear.outer_iters) / solves << "," << s.linear.avg_a() << ","
            << s.linear.avg_s() << "," << s.linear.avg_inner() << "," << s.t_assembly
            << "," << s.linear.t_solve << "," << (s.converged ? 1 : 0) << "\n";
    }
}

void write_load_displacement_csv(const std::string& path,
                                 const std::vector<LoadDisplacementRow>& rows)
{
    std::ofstream out = open_or_throw(path);
    out << "t,load,displacement\n";
    for (const LoadDisplacementRow& r : rows)
        out << r.t << "," << r.load << "," << r.displacement << "\n";
}

std::vector<double> fiber_alignment_field(const Mesh& mesh, const std::vector<double>& u,
                                          const Vec3& a1, const Vec3& a2)
{
    const int nn = mesh.n_nodes();
    if (static_cast<int>(u.size()) != 3 * nn)
        throw std::runtime_error("output: displacement array has wrong size");

    std::vector<double> num(nn, 0.0), den(nn, 0.0);
    for (int e = 0; e < mesh.n_tets(); ++e) {
        Mat3 F = kIdentity3;
        for (int a = 0; a < 4; ++a) {
            const int node = mesh.tets[e][a];
            const Vec3& G = mesh.grad_N[e][a];
            for (int i = 0; i < 3; ++i)
                for (int I = 0; I < 3; ++I) F[3 * i + I] += u[3 * node + i] * G[I];
        }
        const Vec3 f1 = mulvec3(F, a1);
        const Vec3 f2 = mulvec3(F, a2);
        const double n1 = norm(f1), n2 = norm(f2);
        const double align = (n1 > 0.0 && n2 > 0.0) ? dot(f1, f2) / (n1 * n2) : 0.0;
        for (int a = 0; a < 4; ++a) {
            const int node = mesh.tets[e][a];
            num[node] += mesh.volume[e] * align;
            den[node] += mesh.volume[e];
        }
    }
    std::vector<double> field(nn, 0.0);
    for (int a = 0; a < nn; ++a)
        if (den[a] > 0.0) field[a] = num[a] / den[a];
    return field;
}

void write_matrix_market(const std::string& path, const CsrMatrix& A)
{
    std::ofstream out = open_or_throw(path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
    for (int i = 0; i < A.nrows; ++i)
        for (int k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k)
            out << i + 1 << " " << A.col[k] + 1 << " " << A.val[k] << "\n";
}

void write_matrix_market_vector(const std::string& path, const std::vector<double>& v)
{
    std::ofstream out = open_or_throw(path);
    out << "%%MatrixMarket matrix array real general\n";
    out << v.size() << " 1\n";
    for (double x : v) out << x << "\n";
}

} // namespace elastodyn
