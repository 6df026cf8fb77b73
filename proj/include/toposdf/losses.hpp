#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "toposdf/autodiff.hpp"
#include "toposdf/cubical.hpp"
#include "toposdf/pointcloud.hpp"
#include "toposdf/sdf_model.hpp"

namespace toposdf {

// ---------------------------------------------------------------- pulling

struct PullResult {
  ad::Var pulled;                 // kept x 3
  std::vector<std::size_t> kept;  // rows of the input batch that were used
  std::size_t dropped = 0;        // queries whose spatial gradient vanished
};

/// c' = q - f(q) * grad f(q) / |grad f(q)|, entirely on the tape. Queries with
/// |grad f| < 1e-12 are dropped; an all-dropped batch is an error.
PullResult pulled_location(const SdfModel& model, const BoundModel& params, const Tensor& queries,
                           ad::Tape& tape);

/// Mean over rows of |pulled - target|^2.
ad::Var pull_loss(ad::Var pulled, const Tensor& targets);

// ---------------------------------------------------------------- topology

enum class PartitionRule { top_k, threshold };
enum class BirthTermSet { noise, significant };

std::string_view to_string(PartitionRule r);
std::string_view to_string(BirthTermSet b);
PartitionRule partition_rule_from_string(std::string_view s);
BirthTermSet birth_term_set_from_string(std::string_view s);

struct PartitionConfig {
  PartitionRule rule = PartitionRule::top_k;
  std::size_t k = 1;
  double threshold = 0.0;
  // false: the essential pair takes part in neither set
  bool include_essential = true;
};

struct FeaturePartition {
  std::vector<std::size_t> significant;  // indices into diagram.pairs
  std::vector<std::size_t> noise;
  PartitionConfig config;
};

struct LossWeights {
  double lambda1 = 0.5;  // significant-feature term
  double lambda2 = 5.0;  // noise term
  std::size_t curriculum_start_iter = 0;
};

struct TopoConfig {
  std::size_t grid_resolution = 16;
  GridDomain domain;
  Filtration filtration = Filtration::absolute;
  PartitionConfig partition;
  BirthTermSet birth_term_set = BirthTermSet::noise;
};

FeaturePartition partition_features(const PersistenceDiagram& diagram,
                                    const PartitionConfig& config = {});

/// -sum of (death - birth) over the significant pairs.
double loss_significant(const PersistenceDiagram& diagram, const FeaturePartition& partition);

struct NoiseLossTerms {
  double birth_term = 0.0;        // sum of births over the birth-term set
  double persistence_term = 0.0;  // sum of (death - birth) over noise pairs
  double total() const { return birth_term + persistence_term; }
};

NoiseLossTerms loss_noise_terms(const PersistenceDiagram& diagram, const FeaturePartition& partition,
                                BirthTermSet birth_set = BirthTermSet::noise);
double loss_noise(const PersistenceDiagram& diagram, const FeaturePartition& partition,
                  BirthTermSet birth_set = BirthTermSet::noise);

/// Gradient of lambda1 * L_S + lambda2 * L_N with respect to the filtration
/// values, as unmerged sparse contributions at the critical vertices.
std::vector<ad::SparseEntry> topo_value_gradient(const PersistenceDiagram& diagram,
                                                 const FeaturePartition& partition,
                                                 const LossWeights& weights,
                                                 BirthTermSet birth_set = BirthTermSet::noise);

/// Routes the topological gradient through |f| (via the recorded signs) into
/// the grid's raw network output on the tape.
void topo_backward(const PersistenceDiagram& diagram, const FeaturePartition& partition,
                   const LossWeights& weights, BirthTermSet birth_set,
                   const GridEvaluation& evaluation, ad::Tape& tape);

// ---------------------------------------------------------------- unified

struct UnifiedLoss {
  ad::Var pull_node;  // scalar L_g on the tape
  double pull = 0.0;
  double significant = 0.0;  // unweighted L_S
  double noise = 0.0;        // unweighted L_N
  double total = 0.0;        // L_g + lambda1 L_S + lambda2 L_N
  bool topo_active = false;
  std::optional<PersistenceDiagram> diagram;
  std::size_t dropped = 0;
};

/// L_g always; the topological terms once iter reaches the curriculum start,
/// in which case their gradient is queued on the tape for the next backward.
UnifiedLoss unified_loss(const SdfModel& model, const BoundModel& params, const PointCloud& cloud,
                         const KnnIndex& index, const QueryBatch& queries,
                         const TopoConfig& topo, const LossWeights& weights, std::size_t iter,
                         ad::Tape& tape);

}  // namespace toposdf
