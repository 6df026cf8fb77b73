#include "toposdf/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "toposdf/errors.hpp"
#include "toposdf/kernels.hpp"

namespace toposdf {

Vec3 SourceTransform::to_source(const Vec3& p) const {
  return {p[0] * scale + translation[0], p[1] * scale + translation[1],
          p[2] * scale + translation[2]};
}

Vec3 SourceTransform::to_normalized(const Vec3& p) const {
  return {(p[0] - translation[0]) / scale, (p[1] - translation[1]) / scale,
          (p[2] - translation[2]) / scale};
}

std::vector<Vec3> PointCloud::denormalized() const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(source_transform.to_source(p));
  return out;
}

PointCloud normalize(std::span<const Vec3> raw, double target_half_extent) {
  if (raw.size() < 2) throw DegenerateInputError("point cloud needs at least 2 points");
  if (!(target_half_extent > 0.0)) throw ParameterError("target half extent must be positive");
  Vec3 lo = raw[0], hi = raw[0];
  for (const auto& p : raw) {
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(p[c])) throw DegenerateInputError("point cloud has non-finite coordinates");
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  double half = 0.0;
  Vec3 center{};
  for (int c = 0; c < 3; ++c) {
    center[c] = 0.5 * (lo[c] + hi[c]);
    half = std::max(half, 0.5 * (hi[c] - lo[c]));
  }
  if (!(half > 0.0)) throw DegenerateInputError("point cloud has zero extent");

  PointCloud cloud;
  cloud.source_transform.scale = half / target_half_extent;
  cloud.source_transform.translation = center;
  cloud.points.reserve(raw.size());
  for (const auto& p : raw) cloud.points.push_back(cloud.source_transform.to_normalized(p));
  return cloud;
}

// ---------------------------------------------------------------- kd-tree

namespace {
constexpr std::uint32_t kLeafSize = 8;

// Lexicographic (squared distance, index) order.
bool closer(double da, std::size_t ia, double db, std::size_t ib) {
  return da < db || (da == db && ia < ib);
}
}  // namespace

KnnIndex::KnnIndex(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

int KnnIndex::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize || depth > 64) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto& p = points_[order_[i]];
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  int axis = 0;
  for (int c = 1; c < 3; ++c)
    if (hi[c] - lo[c] > hi[axis] - lo[axis]) axis = c;
  if (hi[axis] == lo[axis]) {  // all points identical
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <class Visit>
void KnnIndex::search(int node, const Vec3& q, double& bound, Visit&& visit) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t idx = order_[i];
      visit(kernels::squared_distance(q, points_[idx]), idx);
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, q, bound, visit);
  // equal distance must still be explored: it may hold a lower index
  if (diff * diff <= bound) search(far, q, bound, visit);
}

Neighbor KnnIndex::nearest(const Vec3& q) const {
  if (points_.empty()) throw LookupError("nearest neighbor query on an empty index");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  search(0, q, best, [&](double d, std::size_t idx) {
    if (closer(d, idx, best, best_idx)) {
      best = d;
      best_idx = idx;
    }
  });
  return {best_idx, std::sqrt(best)};
}

std::vector<Neighbor> KnnIndex::knn(const Vec3& q, std::size_t k) const {
  k = std::min(k, points_.size());
  if (k == 0) return {};
  struct Item {
    double d;
    std::size_t idx;
    bool operator<(const Item& o) const { return closer(d, idx, o.d, o.idx); }
  };
  std::priority_queue<Item> heap;  // worst candidate on top
  double bound = std::numeric_limits<double>::infinity();
  search(0, q, bound, [&](double d, std::size_t idx) {
    if (heap.size() < k) {
      heap.push({d, idx});
    } else if (closer(d, idx, heap.top().d, heap.top().idx)) {
      heap.pop();
      heap.push({d, idx});
    } else {
      return;
    }
    if (heap.size() == k) bound = heap.top().d;
  });
  std::vector<Neighbor> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {heap.top().idx, std::sqrt(heap.top().d)};
    heap.pop();
  }
  return out;
}

KnnIndex build_index(const PointCloud& cloud) { return KnnIndex(cloud.points); }

std::vector<double> per_point_sigma(const KnnIndex& index, const PointCloud& cloud,
                                    std::size_t k) {
  if (k == 0 || k >= cloud.size()) {
    throw ParameterError("sigma neighbor rank k=" + std::to_string(k) +
                         " must satisfy 0 < k < " + std::to_string(cloud.size()));
  }
  std::vector<double> sigma(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nn = index.knn(cloud.points[i], k + 1);
    std::size_t rank = 0;
    for (const auto& n : nn) {
      if (n.index == i) continue;
      if (++rank == k) {
        sigma[i] = n.distance;
        break;
      }
    }
  }
  return sigma;
}

QueryBatch sample_queries(const PointCloud& cloud, std::span<const double> sigmas,
                          std::size_t count, std::mt19937_64& rng,
                          std::span<const std::size_t> anchor_pool) {
  if (count == 0) throw ParameterError("query count must be at least 1");
  if (sigmas.size() != cloud.size()) throw DimensionError("one sigma per cloud point required");
  const std::size_t pool = anchor_pool.empty() ? cloud.size() : anchor_pool.size();
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  QueryBatch batch;
  batch.queries.reserve(count);
  batch.anchors.reserve(count);
  batch.sigma_used.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t slot = pick(rng);
    const std::size_t a = anchor_pool.empty() ? slot : anchor_pool[slot];
    const double s = sigmas[a];
    const Vec3& p = cloud.points[a];
    Vec3 q;
    for (int c = 0; c < 3; ++c) q[c] = p[c] + s * gauss(rng);
    batch.queries.push_back(q);
    batch.anchors.push_back(a);
    batch.sigma_used.push_back(s);
  }
  return batch;
}

QueryBatch sample_queries(const PointCloud& cloud, std::span<const double> sigmas,
                          std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_queries(cloud, sigmas, count, rng);
}

SurfacePoint nearest_surface_point(const KnnIndex& index, const PointCloud& cloud, const Vec3& q) {
  const Neighbor n = index.nearest(q);
  return {cloud.points[n.index], n.index};
}

}  // namespace toposdf
