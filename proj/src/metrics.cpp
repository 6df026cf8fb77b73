#include "toposdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "toposdf/errors.hpp"
#include "toposdf/pointcloud.hpp"

namespace toposdf {

std::vector<double> nearest_distances(std::span<const Vec3> P, std::span<const Vec3> Q) {
  if (P.empty() || Q.empty()) throw DegenerateInputError("distance between empty point sets");
  const KnnIndex index(std::vector<Vec3>(Q.begin(), Q.end()));
  std::vector<double> d(P.size());
  const auto n = static_cast<std::ptrdiff_t>(P.size());
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::ptrdiff_t i = 0; i < n; ++i) d[i] = index.nearest(P[i]).distance;
  return d;
}

double chamfer_one_sided(std::span<const Vec3> P, std::span<const Vec3> Q) {
  const auto d = nearest_distances(P, Q);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

double chamfer_two_sided(std::span<const Vec3> P, std::span<const Vec3> Q) {
  return 0.5 * (chamfer_one_sided(P, Q) + chamfer_one_sided(Q, P));
}

double hausdorff(std::span<const Vec3> P, std::span<const Vec3> Q, bool two_sided) {
  const auto d = nearest_distances(P, Q);
  double h = *std::max_element(d.begin(), d.end());
  if (two_sided) {
    const auto back = nearest_distances(Q, P);
    h = std::max(h, *std::max_element(back.begin(), back.end()));
  }
  return h;
}

double significant_feature_loss(const SdfModel& model, std::size_t grid_resolution, std::size_t k,
                                const GridDomain& domain) {
  const ScalarGrid grid = sample_grid(model, grid_resolution, domain, true);
  const PersistenceDiagram pd = persistence0(grid);
  PartitionConfig cfg;
  cfg.k = k;
  return std::fabs(loss_significant(pd, partition_features(pd, cfg)));
}

MetricsReport evaluate_reconstruction(TriangleMesh& mesh, std::span<const Vec3> gt,
                                      const SdfModel* model, const MetricsOptions& options) {
  if (gt.empty()) throw DegenerateInputError("ground truth point set is empty");
  MetricsReport r;
  r.component_count = mesh_components(mesh).count;
  const std::vector<Vec3> pred = sample_surface(mesh, options.samples, options.seed);
  r.pred_samples = pred.size();
  r.gt_samples = gt.size();
  r.sample_seed = options.seed;

  const auto p2g = nearest_distances(pred, gt);
  const auto g2p = nearest_distances(gt, pred);
  double s = 0.0;
  for (double v : p2g) s += v;
  r.cd_one_sided_pred_to_gt = s / static_cast<double>(p2g.size());
  s = 0.0;
  for (double v : g2p) s += v;
  r.cd_one_sided_gt_to_pred = s / static_cast<double>(g2p.size());
  r.cd_two_sided = 0.5 * (r.cd_one_sided_pred_to_gt + r.cd_one_sided_gt_to_pred);
  r.hd_one_sided_pred_to_gt = *std::max_element(p2g.begin(), p2g.end());
  r.hd_one_sided_gt_to_pred = *std::max_element(g2p.begin(), g2p.end());
  r.hd_two_sided = std::max(r.hd_one_sided_pred_to_gt, r.hd_one_sided_gt_to_pred);

  if (model != nullptr) {
    r.sfl_grid_resolution = options.sfl_grid_resolution;
    r.significant_feature_loss =
        significant_feature_loss(*model, options.sfl_grid_resolution, options.sfl_k);
  }
  return r;
}

}  // namespace toposdf
