#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "toposdf/autodiff.hpp"
#include "toposdf/sdf_model.hpp"
#include "toposdf/tensor.hpp"

namespace toposdf {

enum class Filtration { raw, absolute };

std::string_view to_string(Filtration f);
Filtration filtration_from_string(std::string_view s);

struct GridDomain {
  Vec3 lo{-1.0, -1.0, -1.0};
  Vec3 hi{1.0, 1.0, 1.0};
};

/// Scalar values on the vertices of a regular grid. Linear order is
/// x + nx * (y + ny * z), x fastest. Vertices are 6-connected; an edge enters
/// the filtration at the larger of its endpoint values.
struct ScalarGrid {
  std::array<std::size_t, 3> dims{0, 0, 0};
  GridDomain domain;
  std::vector<double> values;
  Filtration filtration = Filtration::raw;

  static ScalarGrid cubic(std::size_t resolution, GridDomain domain = {});
  static ScalarGrid with_dims(std::array<std::size_t, 3> dims, std::vector<double> values);

  std::size_t vertex_count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims[0] * (y + dims[1] * z);
  }
  std::array<std::size_t, 3> coords(std::size_t idx) const;
  Vec3 spacing() const;
  Vec3 position(std::size_t idx) const;
  std::vector<Vec3> positions() const;
  void validate() const;
};

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;
  std::size_t birth_vertex = 0;
  std::size_t death_vertex = 0;
  bool essential = false;

  double persistence() const { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  std::array<std::size_t, 3> grid_dims{0, 0, 0};
  Filtration filtration = Filtration::raw;

  std::size_t essential_count() const;
  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

/// Result of evaluating the network on grid vertices on a tape. `raw_node`
/// holds f at every vertex; `signs` records sign(f) (0 at exact zeros) so that
/// gradients with respect to |f| can be routed into it.
struct GridEvaluation {
  ScalarGrid grid;
  ad::Var raw_node;
  std::vector<double> signs;
};

GridEvaluation eval_grid(const SdfModel& model, const BoundModel& params, std::size_t resolution,
                         const GridDomain& domain, ad::Tape& tape, bool use_absolute = true);

/// Tape-free variant used by evaluation code.
ScalarGrid sample_grid(const SdfModel& model, std::size_t resolution, const GridDomain& domain,
                       bool use_absolute = true);

/// 0-dimensional sublevel persistence by a union-find sweep with the elder
/// rule. Vertices are processed in ascending (value, index) order; the
/// surviving component yields one essential pair whose death is capped at
/// the grid maximum.
PersistenceDiagram persistence0(const ScalarGrid& grid);

/// Sum of death - birth over non-essential pairs.
double diagram_total_persistence(const PersistenceDiagram& diagram);

}  // namespace toposdf
