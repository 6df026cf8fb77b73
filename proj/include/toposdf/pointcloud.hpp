#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "toposdf/tensor.hpp"

namespace toposdf {

/// Maps normalized coordinates back to source units: raw = p * scale + translation.
struct SourceTransform {
  double scale = 1.0;
  Vec3 translation{0.0, 0.0, 0.0};

  Vec3 to_source(const Vec3& p) const;
  Vec3 to_normalized(const Vec3& p) const;
};

struct PointCloud {
  std::vector<Vec3> points;
  SourceTransform source_transform;

  std::size_t size() const { return points.size(); }
  std::vector<Vec3> denormalized() const;
};

/// Centers the bounding box at the origin and scales uniformly so that the
/// largest half-extent becomes `target_half_extent`.
PointCloud normalize(std::span<const Vec3> raw, double target_half_extent = 0.9);

struct Neighbor {
  std::size_t index;
  double distance;
};

/// Exact kd-tree over a fixed point set. Ties in distance resolve to the
/// lowest point index, matching a front-to-back brute-force scan.
class KnnIndex {
 public:
  KnnIndex() = default;
  explicit KnnIndex(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  Neighbor nearest(const Vec3& q) const;
  // k nearest in ascending (distance, index) order.
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_ (leaves only)
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end, int depth);
  template <class Visit>
  void search(int node, const Vec3& q, double& bound, Visit&& visit) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

KnnIndex build_index(const PointCloud& cloud);

/// Distance from each point to its k-th nearest neighbor, excluding itself.
std::vector<double> per_point_sigma(const KnnIndex& index, const PointCloud& cloud,
                                    std::size_t k = 50);

struct QueryBatch {
  std::vector<Vec3> queries;
  std::vector<std::size_t> anchors;
  std::vector<double> sigma_used;

  std::size_t size() const { return queries.size(); }
};

/// q = P_a + N(0, sigma_a^2 I) with anchors drawn uniformly from `anchor_pool`
/// (all points when the pool is empty).
QueryBatch sample_queries(const PointCloud& cloud, std::span<const double> sigmas,
                          std::size_t count, std::mt19937_64& rng,
                          std::span<const std::size_t> anchor_pool = {});
QueryBatch sample_queries(const PointCloud& cloud, std::span<const double> sigmas,
                          std::size_t count, std::uint64_t seed);

struct SurfacePoint {
  Vec3 point;
  std::size_t index;
};

SurfacePoint nearest_surface_point(const KnnIndex& index, const PointCloud& cloud, const Vec3& q);

}  // namespace toposdf
