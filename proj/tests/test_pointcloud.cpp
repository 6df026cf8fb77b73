#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "toposdf/errors.hpp"
#include "toposdf/pointcloud.hpp"

using namespace toposdf;

TEST_CASE("normalize maps cube corners into the target box") {
  std::vector<Vec3> raw;
  for (int i = 0; i < 8; ++i)
    raw.push_back({i & 1 ? 5.0 : -5.0, i & 2 ? 5.0 : -5.0, i & 4 ? 5.0 : -5.0});
  const PointCloud pc = normalize(raw, 0.9);
  for (const auto& p : pc.points)
    for (double c : p) CHECK(std::fabs(c) == doctest::Approx(0.9));
  CHECK(1.0 / pc.source_transform.scale == doctest::Approx(0.18));
}

TEST_CASE("normalize of an already normalized cloud is close to identity") {
  const std::vector<Vec3> raw{{-0.9, -0.9, -0.9}, {0.9, 0.9, 0.9}, {0.1, -0.3, 0.2}};
  const PointCloud pc = normalize(raw);
  CHECK(pc.source_transform.scale == doctest::Approx(1.0));
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int k = 0; k < 3; ++k) CHECK(pc.points[i][k] == doctest::Approx(raw[i][k]));
}

TEST_CASE("normalize round trip and degenerate input") {
  std::mt19937_64 rng(3);
  auto raw = oracle::random_points(300, rng, -40.0, 17.0);
  for (auto& p : raw) p[2] *= 0.1;
  const PointCloud pc = normalize(raw, 0.9);
  double max_abs = 0.0;
  for (const auto& p : pc.points)
    for (double c : p) max_abs = std::max(max_abs, std::fabs(c));
  CHECK(max_abs == doctest::Approx(0.9));
  const auto back = pc.denormalized();
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int k = 0; k < 3; ++k) CHECK(std::fabs(back[i][k] - raw[i][k]) < 1e-12 * 40.0);
  const std::vector<Vec3> same(5, Vec3{1, 2, 3});
  CHECK_THROWS_AS(normalize(same), DegenerateInputError);
}

TEST_CASE("kd-tree queries equal a brute-force scan") {
  std::mt19937_64 rng(11);
  const auto pts = oracle::random_points(500, rng);
  PointCloud pc;
  pc.points = pts;
  const KnnIndex idx = build_index(pc);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto nn = idx.nearest(pts[i]);
    CHECK(nn.index == i);
    CHECK(nn.distance == 0.0);
  }
  const auto queries = oracle::random_points(100, rng, -1.2, 1.2);
  for (const auto& q : queries) {
    const auto [bi, bd] = oracle::brute_nearest(q, pts);
    const auto nn = idx.nearest(q);
    CHECK(nn.index == bi);
    CHECK(nn.distance == bd);
    const auto kn = idx.knn(q, 20);
    REQUIRE(kn.size() == 20);
    for (std::size_t j = 1; j < kn.size(); ++j) CHECK(kn[j - 1].distance <= kn[j].distance);
    std::vector<double> all;
    for (const auto& p : pts) all.push_back(oracle::dist(q, p));
    std::sort(all.begin(), all.end());
    for (std::size_t j = 0; j < kn.size(); ++j) CHECK(kn[j].distance == all[j]);
  }
}

TEST_CASE("per-point sigma on a unit chain") {
  PointCloud pc;
  for (int i = 0; i < 10; ++i) pc.points.push_back({static_cast<double>(i), 0.0, 0.0});
  const KnnIndex idx = build_index(pc);
  const auto s1 = per_point_sigma(idx, pc, 1);
  for (std::size_t i = 1; i + 1 < 10; ++i) CHECK(s1[i] == 1.0);
  const auto s2 = per_point_sigma(idx, pc, 2);
  CHECK(s2[0] == 2.0);
  CHECK(s2[5] == 1.0);
  CHECK_THROWS_AS(per_point_sigma(idx, pc, 10), ParameterError);
}

TEST_CASE("query sampling is seeded and has the requested spread") {
  PointCloud pc;
  pc.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const std::vector<double> sig(3, 0.05);
  const auto a = sample_queries(pc, sig, 64, 17);
  const auto b = sample_queries(pc, sig, 64, 17);
  CHECK(a.queries == b.queries);
  CHECK(a.anchors == b.anchors);

  const std::size_t n = 100000;
  const auto batch = sample_queries(pc, sig, n, 5);
  REQUIRE(batch.size() == n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(batch.sigma_used[i] == 0.05);
    for (int k = 0; k < 3; ++k) {
      const double d = batch.queries[i][k] - pc.points[batch.anchors[i]][k];
      sq += d * d;
    }
  }
  const double std_emp = std::sqrt(sq / (3.0 * static_cast<double>(n)));
  CHECK(std::fabs(std_emp - 0.05) / 0.05 < 0.02);
}

TEST_CASE("nearest surface point and the tie rule") {
  PointCloud pc;
  for (int i = 0; i < 10; ++i) pc.points.push_back({static_cast<double>(i) * 0.1, 5.0, 0.0});
  pc.points[3] = {-1.0, 0.0, 0.0};
  pc.points[7] = {1.0, 0.0, 0.0};
  const KnnIndex idx = build_index(pc);
  const auto hit = nearest_surface_point(idx, pc, pc.points[4]);
  CHECK(hit.index == 4);
  CHECK(hit.point == pc.points[4]);
  const auto tie = nearest_surface_point(idx, pc, Vec3{0.0, 0.0, 0.0});
  CHECK(tie.index == 3);
  CHECK(tie.point == pc.points[3]);
}
