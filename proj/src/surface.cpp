#include "toposdf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "toposdf/errors.hpp"
#include "toposdf/mc_tables.hpp"

namespace toposdf {

void TriangleMesh::validate() const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (std::size_t v : tri) {
      if (v >= vertices.size()) {
        throw IndexError("triangle " + std::to_string(t) + " references vertex " +
                         std::to_string(v) + " of " + std::to_string(vertices.size()));
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw ConsistencyError("triangle " + std::to_string(t) + " repeats a vertex index");
    }
  }
}

TriangleMesh marching_cubes(const ScalarGrid& grid, double iso) {
  grid.validate();
  const std::size_t nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  if (nx < 2 || ny < 2 || nz < 2) throw ParameterError("marching cubes needs at least 2 samples per axis");
  const auto& val = grid.values;

  TriangleMesh mesh;
  std::unordered_map<std::size_t, std::size_t> welded;  // 3 * vertex + axis -> mesh vertex

  auto edge_vertex = [&](std::size_t v0, std::size_t v1) {
    const std::size_t lo = std::min(v0, v1);
    const std::size_t diff = std::max(v0, v1) - lo;
    const std::size_t axis = diff == 1 ? 0 : (diff == nx ? 1 : 2);
    const std::size_t key = 3 * lo + axis;
    auto [it, inserted] = welded.try_emplace(key, mesh.vertices.size());
    if (inserted) {
      const double a = val[v0], b = val[v1];
      const double t = (iso - a) / (b - a);
      const Vec3 p0 = grid.position(v0), p1 = grid.position(v1);
      mesh.vertices.push_back({p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]),
                               p0[2] + t * (p1[2] - p0[2])});
    }
    return it->second;
  };

  std::array<std::size_t, 8> corner{};
  std::array<std::size_t, 12> ev{};
  for (std::size_t z = 0; z + 1 < nz; ++z) {
    for (std::size_t y = 0; y + 1 < ny; ++y) {
      for (std::size_t x = 0; x + 1 < nx; ++x) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          corner[c] = grid.index(x + mc::kCorner[c][0], y + mc::kCorner[c][1], z + mc::kCorner[c][2]);
          if (val[corner[c]] < iso) cube |= 1 << c;
        }
        const std::uint16_t edges = mc::kEdgeTable[cube];
        if (edges == 0) continue;
        for (int e = 0; e < 12; ++e)
          if (edges & (1u << e)) ev[e] = edge_vertex(corner[mc::kEdgeCorners[e][0]], corner[mc::kEdgeCorners[e][1]]);
        const auto& tri = mc::kTriTable[cube];
        for (int i = 0; tri[i] != -1; i += 3) {
          mesh.triangles.push_back({ev[tri[i]], ev[tri[i + 1]], ev[tri[i + 2]]});
        }
      }
    }
  }

  if (mesh.triangles.empty()) {
    const auto [mn, mx] = std::minmax_element(val.begin(), val.end());
    std::ostringstream msg;
    msg << "no iso-surface at level " << iso << ": field ranges over [" << *mn << ", " << *mx
        << "]";
    throw EmptyMeshError(msg.str());
  }
  return mesh;
}

TriangleMesh marching_cubes(const SdfModel& model, std::size_t resolution, const GridDomain& domain,
                            double iso) {
  if (resolution < 8) throw ParameterError("mesh resolution must be at least 8");
  return marching_cubes(sample_grid(model, resolution, domain, false), iso);
}

ComponentInfo mesh_components(TriangleMesh& mesh) {
  mesh.validate();
  std::vector<std::size_t> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& t : mesh.triangles) {
    const std::size_t r = find(t[0]);
    for (int i = 1; i < 3; ++i) {
      const std::size_t s = find(t[i]);
      if (s != r) parent[s] = r;
    }
  }

  ComponentInfo info;
  std::unordered_map<std::size_t, std::size_t> label_of_root;
  mesh.component_labels.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    auto [it, inserted] = label_of_root.try_emplace(find(mesh.triangles[t][0]), info.count);
    if (inserted) {
      ++info.count;
      info.sizes.push_back(0);
    }
    mesh.component_labels[t] = it->second;
    ++info.sizes[it->second];
  }
  return info;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Vec3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const Vec3 n{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
}

double mesh_area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (const auto& t : mesh.triangles)
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return total;
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw DegenerateInputError("cannot sample an empty mesh");
  mesh.validate();
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    total += triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    cumulative[t] = total;
  }
  if (!(total > 0.0)) throw DegenerateInputError("mesh has zero total area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> out(n);
  for (auto& p : out) {
    const double pick = unit(rng) * total;
    std::size_t t = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    t = std::min(t, cumulative.size() - 1);
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double s = std::sqrt(unit(rng));
    const double r = unit(rng);
    const double wa = 1.0 - s, wb = s * (1.0 - r), wc = s * r;
    for (int k = 0; k < 3; ++k) p[k] = wa * a[k] + wb * b[k] + wc * c[k];
  }
  return out;
}

}  // namespace toposdf
