#include "elastodyn/mesh.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <utility>

namespace elastodyn {

int Mesh::tag_id(const std::string& name) const
{
    for (std::size_t i = 0; i < tag_names.size(); ++i)
        if (tag_names[i] == name) return static_cast<int>(i);
    return -1;
}

int Mesh::add_tag(const std::string& name)
{
    const int existing = tag_id(name);
    if (existing >= 0) return existing;
    tag_names.push_back(name);
    return static_cast<int>(tag_names.size()) - 1;
}

int Mesh::retag_facets(int from_tag, const std::function<bool(const Vec3&)>& pred,
                       const std::string& name)
{
    const int to_tag = add_tag(name);
    int moved = 0;
    for (auto& f : facets) {
        if (f.tag != from_tag) continue;
        if (pred(facet_centroid(f))) {
            f.tag = to_tag;
            ++moved;
        }
    }
    return moved;
}

std::vector<int> Mesh::facets_with_tag(int tag) const
{
    std::vector<int> out;
    for (std::size_t i = 0; i < facets.size(); ++i)
        if (facets[i].tag == tag) out.push_back(static_cast<int>(i));
    return out;
}

double Mesh::facet_area(const BoundaryFacet& f) const
{
    const Vec3 e1 = sub(nodes[f.nodes[1]], nodes[f.nodes[0]]);
    const Vec3 e2 = sub(nodes[f.nodes[2]], nodes[f.nodes[0]]);
    return 0.5 * norm(cross(e1, e2));
}

Vec3 Mesh::facet_centroid(const BoundaryFacet& f) const
{
    const Vec3& a = nodes[f.nodes[0]];
    const Vec3& b = nodes[f.nodes[1]];
    const Vec3& c = nodes[f.nodes[2]];
    return {(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0};
}

namespace {

// Six tets per cell, every one containing the cell diagonal 000-111.  Corner
// labels are bitmasks b = bx + 2*by + 4*bz.
constexpr int kCellTets[6][4] = {
    {0, 1, 3, 7}, // 000 100 110 111
    {0, 1, 5, 7}, // 000 100 101 111
    {0, 2, 3, 7}, // 000 010 110 111
    {0, 2, 6, 7}, // 000 010 011 111
    {0, 4, 5, 7}, // 000 001 101 111
    {0, 4, 6, 7}, // 000 001 011 111
};

void finalize_geometry(Mesh& m)
{
    const int nel = m.n_tets();
    m.volume.resize(nel);
    m.h.resize(nel);
    m.grad_N.resize(nel);
    for (int e = 0; e < nel; ++e) {
        auto& t = m.tets[e];
        const Vec3& x0 = m.nodes[t[0]];
        Mat3 dm; // columns are edge vectors x_a - x_0
        for (int a = 0; a < 3; ++a) {
            const Vec3 d = sub(m.nodes[t[a + 1]], x0);
            dm[a] = d[0];
            dm[3 + a] = d[1];
            dm[6 + a] = d[2];
        }
        double det = det3(dm);
        if (det < 0.0) { // enforce positive orientation
            std::swap(t[2], t[3]);
            for (int a = 0; a < 3; ++a) {
                const Vec3 d = sub(m.nodes[t[a + 1]], x0);
                dm[a] = d[0];
                dm[3 + a] = d[1];
                dm[6 + a] = d[2];
            }
            det = det3(dm);
        }
        if (det <= 0.0) throw std::runtime_error("degenerate tetrahedron in mesh");
        m.volume[e] = det / 6.0;

        // Barycentric gradients: rows of dm^{-1} for vertices 1..3.
        const Mat3 inv = inv3(dm);
        Vec3 g0 = {0.0, 0.0, 0.0};
        for (int a = 1; a < 4; ++a) {
            const Vec3 g = {inv[3 * (a - 1)], inv[3 * (a - 1) + 1], inv[3 * (a - 1) + 2]};
            m.grad_N[e][a] = g;
            g0 = sub(g0, g);
        }
        m.grad_N[e][0] = g0;

        double hmax = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                hmax = std::max(hmax, norm(sub(m.nodes[t[a]], m.nodes[t[b]])));
        m.h[e] = hmax;
    }
}

void collect_boundary_facets(Mesh& m, double lx, double ly, double lz)
{
    const int tags[6] = {m.add_tag("xmin"), m.add_tag("xmax"), m.add_tag("ymin"),
                         m.add_tag("ymax"), m.add_tag("zmin"), m.add_tag("zmax")};
    const double tol = 1e-12 * std::max({lx, ly, lz, 1.0});
    auto plane_of = [&](const std::array<int, 3>& tri) -> int {
        const Vec3& a = m.nodes[tri[0]];
        const Vec3& b = m.nodes[tri[1]];
        const Vec3& c = m.nodes[tri[2]];
        const double lims[3] = {lx, ly, lz};
        for (int d = 0; d < 3; ++d) {
            if (std::abs(a[d]) < tol && std::abs(b[d]) < tol && std::abs(c[d]) < tol)
                return 2 * d;
            if (std::abs(a[d] - lims[d]) < tol && std::abs(b[d] - lims[d]) < tol &&
                std::abs(c[d] - lims[d]) < tol)
                return 2 * d + 1;
        }
        return -1;
    };

    constexpr int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (int e = 0; e < m.n_tets(); ++e) {
        for (const auto& fv : kFace) {
            const std::array<int, 3> tri = {m.tets[e][fv[0]], m.tets[e][fv[1]],
                                            m.tets[e][fv[2]]};
            const int plane = plane_of(tri);
            if (plane >= 0) m.facets.push_back({tri, e, tags[plane]});
        }
    }
}

} // namespace

Mesh generate_box_mesh(int nx, int ny, int nz, double lx, double ly, double lz)
{
    if (nx < 1 || ny < 1 || nz < 1) throw std::invalid_argument("divisions must be >= 1");
    if (lx <= 0.0 || ly <= 0.0 || lz <= 0.0)
        throw std::invalid_argument("edge lengths must be positive");

    Mesh m;
    const int mx = nx + 1, my = ny + 1, mz = nz + 1;
    m.nodes.reserve(static_cast<std::size_t>(mx) * my * mz);
    for (int k = 0; k < mz; ++k)
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i)
                m.nodes.push_back({lx * i / nx, ly * j / ny, lz * k / nz});

    auto nid = [&](int i, int j, int k) { return i + mx * (j + my * k); };
    m.tets.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                int corner[8];
                for (int b = 0; b < 8; ++b)
                    corner[b] = nid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
                for (const auto& t : kCellTets)
                    m.tets.push_back({corner[t[0]], corner[t[1]], corner[t[2]],
                                      corner[t[3]]});
            }

    finalize_geometry(m);
    collect_boundary_facets(m, lx, ly, lz);
    return m;
}

Mesh generate_cube_mesh(int n, double edge_length)
{
    return generate_box_mesh(n, n, n, edge_length, edge_length, edge_length);
}

Mesh generate_slab_mesh(int nx, int ny, int nz, double lx, double ly, double lz)
{
    return generate_box_mesh(nx, ny, nz, lx, ly, lz);
}

} // namespace elastodyn
