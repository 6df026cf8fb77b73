#include "toposdf/cubical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "toposdf/errors.hpp"

namespace toposdf {

std::string_view to_string(Filtration f) { return f == Filtration::raw ? "raw" : "absolute"; }

Filtration filtration_from_string(std::string_view s) {
  if (s == "raw") return Filtration::raw;
  if (s == "absolute") return Filtration::absolute;
  throw ParameterError("unknown filtration '" + std::string(s) + "'");
}

ScalarGrid ScalarGrid::cubic(std::size_t resolution, GridDomain domain) {
  if (resolution < 2) throw ParameterError("grid resolution must be at least 2");
  ScalarGrid g;
  g.dims = {resolution, resolution, resolution};
  g.domain = domain;
  g.values.assign(g.vertex_count(), 0.0);
  return g;
}

ScalarGrid ScalarGrid::with_dims(std::array<std::size_t, 3> dims, std::vector<double> values) {
  ScalarGrid g;
  g.dims = dims;
  g.values = std::move(values);
  g.validate();
  return g;
}

std::array<std::size_t, 3> ScalarGrid::coords(std::size_t idx) const {
  return {idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])};
}

Vec3 ScalarGrid::spacing() const {
  Vec3 s{};
  for (int c = 0; c < 3; ++c) {
    s[c] = dims[c] > 1 ? (domain.hi[c] - domain.lo[c]) / static_cast<double>(dims[c] - 1) : 0.0;
  }
  return s;
}

Vec3 ScalarGrid::position(std::size_t idx) const {
  const auto ijk = coords(idx);
  const Vec3 s = spacing();
  return {domain.lo[0] + static_cast<double>(ijk[0]) * s[0],
          domain.lo[1] + static_cast<double>(ijk[1]) * s[1],
          domain.lo[2] + static_cast<double>(ijk[2]) * s[2]};
}

std::vector<Vec3> ScalarGrid::positions() const {
  std::vector<Vec3> out(vertex_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = position(i);
  return out;
}

void ScalarGrid::validate() const {
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw ParameterError("grid has an empty axis");
  if (values.size() != vertex_count()) {
    throw DimensionError("grid holds " + std::to_string(values.size()) + " values, expected " +
                         std::to_string(vertex_count()));
  }
  for (double v : values)
    if (!std::isfinite(v)) throw NumericalError("grid contains non-finite values");
}

std::size_t PersistenceDiagram::essential_count() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.essential; }));
}

GridEvaluation eval_grid(const SdfModel& model, const BoundModel& params, std::size_t resolution,
                         const GridDomain& domain, ad::Tape& tape, bool use_absolute) {
  GridEvaluation ev;
  ev.grid = ScalarGrid::cubic(resolution, domain);
  ev.grid.filtration = use_absolute ? Filtration::absolute : Filtration::raw;
  const auto pos = ev.grid.positions();
  ad::Var x = tape.constant(Tensor::from_points(pos));
  ev.raw_node = sdf_forward(model, params, x);
  const Tensor& f = ev.raw_node.value();
  ev.signs.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    ev.signs[i] = use_absolute ? (f[i] > 0.0 ? 1.0 : (f[i] < 0.0 ? -1.0 : 0.0)) : 1.0;
    ev.grid.values[i] = use_absolute ? std::fabs(f[i]) : f[i];
  }
  return ev;
}

ScalarGrid sample_grid(const SdfModel& model, std::size_t resolution, const GridDomain& domain,
                       bool use_absolute) {
  ScalarGrid g = ScalarGrid::cubic(resolution, domain);
  g.filtration = use_absolute ? Filtration::absolute : Filtration::raw;
  g.values = evaluate(model, g.positions());
  if (use_absolute)
    for (double& v : g.values) v = std::fabs(v);
  return g;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t v) {
    std::size_t root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) {
      const std::size_t next = parent_[v];
      parent_[v] = root;
      v = next;
    }
    return root;
  }
  // Links two roots, returns the new root.
  std::size_t link(std::size_t a, std::size_t b) {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

PersistenceDiagram persistence0(const ScalarGrid& grid) {
  grid.validate();
  const std::size_t n = grid.vertex_count();
  const auto& val = grid.values;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return val[a] < val[b] || (val[a] == val[b] && a < b);
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  UnionFind uf(n);
  std::vector<std::size_t> elder(n);  // birth vertex of the component, per root
  std::vector<char> swept(n, 0);

  PersistenceDiagram pd;
  pd.grid_dims = grid.dims;
  pd.filtration = grid.filtration;

  const std::size_t nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  std::array<std::size_t, 6> roots{};
  for (std::size_t v : order) {
    const auto [x, y, z] = grid.coords(v);
    std::size_t root_count = 0;
    auto consider = [&](std::size_t u) {
      if (!swept[u]) return;
      const std::size_t r = uf.find(u);
      for (std::size_t i = 0; i < root_count; ++i)
        if (roots[i] == r) return;
      roots[root_count++] = r;
    };
    if (x > 0) consider(v - 1);
    if (x + 1 < nx) consider(v + 1);
    if (y > 0) consider(v - nx);
    if (y + 1 < ny) consider(v + nx);
    if (z > 0) consider(v - nx * ny);
    if (z + 1 < nz) consider(v + nx * ny);
    swept[v] = 1;

    if (root_count == 0) {
      elder[v] = v;
      continue;
    }
    // the component born first survives every merge at v
    std::size_t survivor = roots[0];
    for (std::size_t i = 1; i < root_count; ++i)
      if (rank[elder[roots[i]]] < rank[elder[survivor]]) survivor = roots[i];
    const std::size_t oldest = elder[survivor];

    std::array<std::size_t, 6> dying{};
    std::size_t dying_count = 0;
    for (std::size_t i = 0; i < root_count; ++i)
      if (roots[i] != survivor) dying[dying_count++] = roots[i];
    // emit younger components in birth order for a stable pair listing
    std::sort(dying.begin(), dying.begin() + dying_count,
              [&](std::size_t a, std::size_t b) { return rank[elder[a]] < rank[elder[b]]; });

    std::size_t root = survivor;
    for (std::size_t i = 0; i < dying_count; ++i) {
      const std::size_t b = elder[dying[i]];
      pd.pairs.push_back({val[b], val[v], b, v, false});
      root = uf.link(root, dying[i]);
    }
    root = uf.link(root, v);
    elder[root] = oldest;
  }

  const std::size_t last = order.back();
  const std::size_t essential_birth = elder[uf.find(order.front())];
  pd.pairs.push_back({val[essential_birth], val[last], essential_birth, last, true});
  return pd;
}

double diagram_total_persistence(const PersistenceDiagram& diagram) {
  double total = 0.0;
  for (const auto& p : diagram.pairs)
    if (!p.essential) total += p.death - p.birth;
  return total;
}

}  // namespace toposdf
