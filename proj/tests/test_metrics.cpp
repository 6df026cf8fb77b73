#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "toposdf/errors.hpp"
#include "toposdf/metrics.hpp"
#include "toposdf/surface.hpp"

using namespace toposdf;

TEST_CASE("chamfer and hausdorff examples") {
  const std::vector<Vec3> P{{0, 0, 0}};
  const std::vector<Vec3> Q{{1, 0, 0}, {5, 0, 0}};
  CHECK(chamfer_one_sided(P, Q) == 1.0);
  CHECK(chamfer_one_sided(Q, P) == 3.0);
  CHECK(chamfer_two_sided(P, Q) == 2.0);
  CHECK(chamfer_two_sided(Q, Q) == 0.0);

  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}};
  const std::vector<Vec3> origin{{0, 0, 0}};
  CHECK(hausdorff(line, origin, false) == 1.0);
  CHECK(hausdorff(origin, line, false) == 0.0);
  CHECK(hausdorff(line, origin) == 1.0);
  CHECK(hausdorff(line, line) == 0.0);

  const std::vector<Vec3> none;
  CHECK_THROWS_AS(chamfer_one_sided(none, Q), DegenerateInputError);
  CHECK_THROWS_AS(hausdorff(P, none), DegenerateInputError);
}

TEST_CASE("metrics equal brute-force double loops") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<std::size_t> size(1, 500);
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = oracle::random_points(size(rng), rng);
    const auto Q = oracle::random_points(size(rng), rng, -0.5, 1.5);
    const double pq = oracle::brute_chamfer_one_sided(P, Q);
    const double qp = oracle::brute_chamfer_one_sided(Q, P);
    CHECK(chamfer_one_sided(P, Q) == pq);
    CHECK(chamfer_one_sided(Q, P) == qp);
    CHECK(chamfer_two_sided(P, Q) == 0.5 * (pq + qp));
    CHECK(chamfer_two_sided(P, Q) == chamfer_two_sided(Q, P));
    const double hpq = oracle::brute_hausdorff_directed(P, Q);
    const double hqp = oracle::brute_hausdorff_directed(Q, P);
    CHECK(hausdorff(P, Q, false) == hpq);
    CHECK(hausdorff(Q, P, false) == hqp);
    CHECK(hausdorff(P, Q) == std::max(hpq, hqp));
    CHECK(chamfer_two_sided(P, P) == 0.0);
    CHECK(hausdorff(P, P) == 0.0);
  }
}

TEST_CASE("significant feature loss") {
  SdfModel flat = init_standard(Architecture{2, 4, 1}, 0);
  for (auto& l : flat.layers) {
    std::fill(l.weight.storage().begin(), l.weight.storage().end(), 0.0);
    std::fill(l.bias.storage().begin(), l.bias.storage().end(), 0.0);
  }
  flat.layers[1].bias[0] = 0.4;
  CHECK(significant_feature_loss(flat, 8) == 0.0);
  const SdfModel m = init_geometric(Architecture{3, 16, 1}, 0.5, 1);
  const ScalarGrid g = sample_grid(m, 16, GridDomain{}, true);
  const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
  CHECK(significant_feature_loss(m) == doctest::Approx(*hi - *lo).epsilon(1e-14));
  CHECK(significant_feature_loss(m) >= 0.0);
}

TEST_CASE("reconstruction report invariants") {
  const SdfModel m = init_geometric(Architecture{3, 16, 1}, 0.5, 2);
  TriangleMesh mesh = marching_cubes(m, 20);
  std::mt19937_64 rng(4);
  std::vector<Vec3> gt;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    Vec3 d{g(rng), g(rng), g(rng)};
    const double n = oracle::dist(d, {0, 0, 0});
    gt.push_back({0.5 * d[0] / n, 0.5 * d[1] / n, 0.5 * d[2] / n});
  }
  MetricsOptions opt;
  opt.samples = 2000;
  opt.seed = 5;
  const auto r = evaluate_reconstruction(mesh, gt, &m, opt);
  CHECK(r.cd_two_sided == doctest::Approx(0.5 * (r.cd_one_sided_pred_to_gt + r.cd_one_sided_gt_to_pred)).epsilon(1e-12));
  CHECK(r.hd_two_sided == std::max(r.hd_one_sided_pred_to_gt, r.hd_one_sided_gt_to_pred));
  CHECK(r.component_count == 1);
  CHECK(r.pred_samples == 2000);
  CHECK(r.gt_samples == 3000);
  CHECK(r.sfl_grid_resolution == 16);
  CHECK(r.sample_seed == 5);
  CHECK(r.significant_feature_loss == significant_feature_loss(m));
  const auto again = evaluate_reconstruction(mesh, gt, &m, opt);
  CHECK(again.cd_two_sided == r.cd_two_sided);
  const auto no_model = evaluate_reconstruction(mesh, gt, nullptr, opt);
  CHECK(no_model.significant_feature_loss == 0.0);
}
