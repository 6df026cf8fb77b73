#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "toposdf/cubical.hpp"
#include "toposdf/losses.hpp"
#include "toposdf/sdf_model.hpp"
#include "toposdf/surface.hpp"
#include "toposdf/tensor.hpp"

namespace toposdf {

/// Distance from every point of P to its nearest point of Q.
std::vector<double> nearest_distances(std::span<const Vec3> P, std::span<const Vec3> Q);

/// (1/|P|) sum_i min_j |P_i - Q_j|
double chamfer_one_sided(std::span<const Vec3> P, std::span<const Vec3> Q);
double chamfer_two_sided(std::span<const Vec3> P, std::span<const Vec3> Q);
/// Directed: max_i min_j |P_i - Q_j|; two-sided: max of both directions.
double hausdorff(std::span<const Vec3> P, std::span<const Vec3> Q, bool two_sided = true);

/// |L_S| of the model's |f| grid, unweighted, with top-k partitioning.
double significant_feature_loss(const SdfModel& model, std::size_t grid_resolution = 16,
                                std::size_t k = 1, const GridDomain& domain = {});

inline constexpr std::size_t kDefaultMetricSamples = 30000;

struct MetricsReport {
  double cd_one_sided_pred_to_gt = 0.0;
  double cd_one_sided_gt_to_pred = 0.0;
  double cd_two_sided = 0.0;
  double hd_one_sided_pred_to_gt = 0.0;
  double hd_one_sided_gt_to_pred = 0.0;
  double hd_two_sided = 0.0;
  double significant_feature_loss = 0.0;  // |L_S|, unweighted
  std::size_t component_count = 0;
  std::size_t pred_samples = 0;
  std::size_t gt_samples = 0;
  std::size_t sfl_grid_resolution = 0;
  std::uint64_t sample_seed = 0;
};

struct MetricsOptions {
  std::size_t samples = kDefaultMetricSamples;
  std::uint64_t seed = 0;
  std::size_t sfl_grid_resolution = 16;
  std::size_t sfl_k = 1;
};

/// Compares a mesh against ground-truth points. The significant-feature loss
/// needs the model; pass nullptr to leave it at zero.
MetricsReport evaluate_reconstruction(TriangleMesh& mesh, std::span<const Vec3> gt,
                                      const SdfModel* model, const MetricsOptions& options = {});

}  // namespace toposdf
