#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "toposdf/cubical.hpp"
#include "toposdf/sdf_model.hpp"
#include "toposdf/tensor.hpp"

namespace toposdf {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<std::size_t> component_labels;  // per triangle, set by mesh_components

  bool empty() const { return triangles.empty(); }
  // Throws IndexError / ConsistencyError on bad indices or degenerate triangles.
  void validate() const;
};

/// Table-driven marching cubes over a raw signed grid. Vertices on shared
/// edges are welded, so neighbouring cubes reference the same vertex.
TriangleMesh marching_cubes(const ScalarGrid& grid, double iso = 0.0);

/// Samples the raw network output on a resolution^3 grid and extracts the
/// iso-surface.
TriangleMesh marching_cubes(const SdfModel& model, std::size_t resolution = 256,
                            const GridDomain& domain = {}, double iso = 0.0);

struct ComponentInfo {
  std::size_t count = 0;
  std::vector<std::size_t> sizes;  // triangles per component, by label
};

/// Triangles sharing a vertex belong to the same component. Labels follow the
/// order in which components first appear in the triangle list.
ComponentInfo mesh_components(TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double mesh_area(const TriangleMesh& mesh);

/// Area-weighted uniform samples on the mesh surface.
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace toposdf
