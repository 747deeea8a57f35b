#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "elastodyn/smallmat.hpp"

// Structured linear-tetrahedral meshes for box-shaped domains.  Each grid cell
// is split into six tets sharing the cell's main diagonal, which yields a
// conforming triangulation.  A Mesh is immutable after construction except for
// boundary-facet retagging, which the benchmark setup uses to name face
// subsets (e.g. a loaded quarter of one face).

namespace elastodyn {

struct BoundaryFacet {
    std::array<int, 3> nodes; // corner node indices
    int tet;                  // owning element
    int tag;                  // index into Mesh::tag_names
};

struct Mesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 4>> tets;
    std::vector<BoundaryFacet> facets;
    std::vector<std::string> tag_names;

    // Per-element reference geometry, precomputed at build time.
    std::vector<double> volume;                 // signed volume, positive
    std::vector<double> h;                      // element diameter (longest edge)
    std::vector<std::array<Vec3, 4>> grad_N;    // shape-function gradients

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_tets() const { return static_cast<int>(tets.size()); }

    int tag_id(const std::string& name) const; // -1 if absent
    int add_tag(const std::string& name);

    // Reassigns facets whose centroid satisfies the predicate to `name`.
    // Returns the number of facets moved.
    int retag_facets(int from_tag, const std::function<bool(const Vec3&)>& pred,
                     const std::string& name);

    std::vector<int> facets_with_tag(int tag) const;

    double facet_area(const BoundaryFacet& f) const;
    Vec3 facet_centroid(const BoundaryFacet& f) const;
};

// Box meshed with nx*ny*nz cells, six tets per cell.  Boundary facets are
// tagged xmin/xmax/ymin/ymax/zmin/zmax.
Mesh generate_box_mesh(int nx, int ny, int nz, double lx, double ly, double lz);

// Cube of the given edge length with n divisions per edge.
Mesh generate_cube_mesh(int n, double edge_length);

// Slab with independent divisions and edge lengths per direction.
Mesh generate_slab_mesh(int nx, int ny, int nz, double lx, double ly, double lz);

} // namespace elastodyn
