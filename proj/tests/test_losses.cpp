#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "toposdf/errors.hpp"
#include "toposdf/losses.hpp"
#include "toposdf/trainer.hpp"

using namespace toposdf;

namespace {

// f(x) = a.x + c on [-1, 1]^3, realized by a 2-layer net whose hidden units
// stay positive there.
SdfModel affine_model(Vec3 a, double c) {
  SdfModel m = init_standard(Architecture{2, 3, 1}, 0);
  for (auto& l : m.layers) {
    std::fill(l.weight.storage().begin(), l.weight.storage().end(), 0.0);
    std::fill(l.bias.storage().begin(), l.bias.storage().end(), 0.0);
  }
  for (int k = 0; k < 3; ++k) {
    m.layers[0].weight.at(k, k) = 1.0;
    m.layers[0].bias[k] = 10.0;
    m.layers[1].weight.at(k, 0) = a[k] / kSkipScale;
  }
  m.layers[1].bias[0] = c - 10.0 * (a[0] + a[1] + a[2]);
  return m;
}

Vec3 pulled_one(const SdfModel& m, Vec3 q) {
  ad::Tape t;
  const auto pr = pulled_location(m, bind_parameters(m, t), Tensor::from_points(std::vector<Vec3>{q}), t);
  REQUIRE(pr.kept.size() == 1);
  return {pr.pulled.value().at(0, 0), pr.pulled.value().at(0, 1), pr.pulled.value().at(0, 2)};
}

PersistenceDiagram random_diagram(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PersistenceDiagram d;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = u(rng);
    d.pairs.push_back({b, b + u(rng), i, n + i, false});
  }
  return d;
}

// Dense gradient of lambda1 L_S + lambda2 L_N over grid values.
std::vector<double> densify(const std::vector<ad::SparseEntry>& e, std::size_t n) {
  std::vector<double> g(n, 0.0);
  for (const auto& s : e) g[s.index] += s.value;
  return g;
}

double topo_objective(const ScalarGrid& g, const PartitionConfig& pc, const LossWeights& w) {
  const auto d = persistence0(g);
  const auto part = partition_features(d, pc);
  return w.lambda1 * loss_significant(d, part) + w.lambda2 * loss_noise(d, part);
}

}  // namespace

TEST_CASE("pulled location examples") {
  const SdfModel plane = affine_model({1, 0, 0}, 0.0);
  const Vec3 c = pulled_one(plane, {0.3, 0, 0});
  for (double v : c) CHECK(std::fabs(v) < 1e-12);
  const Vec3 fixed = pulled_one(plane, {0.0, 0.4, -0.2});
  CHECK(fixed[0] == doctest::Approx(0.0));
  CHECK(fixed[1] == doctest::Approx(0.4));
  CHECK(fixed[2] == doctest::Approx(-0.2));
  // near (1, 0, 0) the sphere SDF |x| - 0.5 is x0 - 0.5 to first order
  const SdfModel sphere_local = affine_model({1, 0, 0}, -0.5);
  const Vec3 r = pulled_one(sphere_local, {1, 0, 0});
  CHECK(r[0] == doctest::Approx(0.5));
  CHECK(std::fabs(r[1]) < 1e-12);
}

TEST_CASE("queries with a vanishing gradient are dropped") {
  SdfModel flat = affine_model({0, 0, 0}, 0.3);
  ad::Tape t;
  CHECK_THROWS_AS(pulled_location(flat, bind_parameters(flat, t),
                                  Tensor::from_points(std::vector<Vec3>{{0, 0, 0}, {0.1, 0, 0}}), t),
                  DegenerateDirectionError);
  // relu cut: hidden unit 0 is dead for x0 < -0.5, the others carry no weight
  SdfModel cut = affine_model({1, 0, 0}, 0.0);
  cut.layers[0].bias[0] = 0.5;
  cut.layers[1].bias[0] = -0.5;
  ad::Tape t2;
  const auto pr = pulled_location(cut, bind_parameters(cut, t2),
                                  Tensor::from_points(std::vector<Vec3>{{-0.9, 0, 0}, {0.2, 0, 0}}), t2);
  CHECK(pr.dropped == 1);
  REQUIRE(pr.kept.size() == 1);
  CHECK(pr.kept[0] == 1);
}

TEST_CASE("pull loss values and errors") {
  ad::Tape t;
  const Tensor p = Tensor::matrix({{0, 0, 0}, {1, 2, 3}});
  CHECK(pull_loss(t.constant(p), p).value().item() == 0.0);
  const Tensor one = Tensor::matrix({{1, 0, 0}});
  CHECK(pull_loss(t.constant(one), Tensor::matrix({{0, 0, 0}})).value().item() == 1.0);
  CHECK_THROWS_AS(pull_loss(t.constant(Tensor({0, 3})), Tensor({0, 3})), DegenerateInputError);
  CHECK_THROWS_AS(pull_loss(t.constant(one), p), DimensionError);
}

TEST_CASE("pull loss parameter gradient matches finite differences") {
  SdfModel m = init_geometric(Architecture{3, 8, 1}, 0.5, 2);
  std::mt19937_64 rng(5);
  const auto q = oracle::random_points(16, rng, -0.8, 0.8);
  const auto tgt = oracle::random_points(16, rng, -0.5, 0.5);
  const Tensor Q = Tensor::from_points(q);
  auto loss_at = [&](const std::vector<double>& theta) {
    SdfModel mm = m;
    mm.unflatten(theta);
    ad::Tape t;
    const auto pr = pulled_location(mm, bind_parameters(mm, t), Q, t);
    REQUIRE(pr.dropped == 0);
    return pull_loss(pr.pulled, Tensor::from_points(tgt)).value().item();
  };
  ad::Tape t;
  const auto params = bind_parameters(m, t);
  const auto pr = pulled_location(m, params, Q, t);
  const ad::Var L = pull_loss(pr.pulled, Tensor::from_points(tgt));
  const auto g = flatten_gradients(t.backward(L, Tensor::scalar(1.0)), params);
  const auto num = oracle::fd_gradient(loss_at, m.flatten(), 1e-6);
  CHECK(oracle::max_rel_err(g, num, 1e-4) < 1e-5);
}

TEST_CASE("partition examples") {
  PersistenceDiagram d;
  d.pairs.push_back({0.0, 1.0, 0, 9, true});
  d.pairs.push_back({0.1, 0.15, 3, 4, false});
  auto part = partition_features(d);
  CHECK(part.significant == std::vector<std::size_t>{0});
  CHECK(part.noise == std::vector<std::size_t>{1});

  PersistenceDiagram eq;
  eq.pairs.push_back({0.5, 1.0, 7, 1, false});
  eq.pairs.push_back({0.25, 0.75, 2, 3, false});
  eq.pairs.push_back({0.125, 0.625, 5, 4, false});
  CHECK(partition_features(eq).significant == std::vector<std::size_t>{1});

  PartitionConfig big;
  big.k = 10;
  const auto all = partition_features(eq, big);
  CHECK(all.significant.size() == 3);
  CHECK(all.noise.empty());

  PartitionConfig no_ess;
  no_ess.include_essential = false;
  const auto ne = partition_features(d, no_ess);
  CHECK(ne.significant == std::vector<std::size_t>{1});
  CHECK(ne.noise.empty());

  PartitionConfig thr;
  thr.rule = PartitionRule::threshold;
  thr.threshold = 0.5;
  const auto th = partition_features(d, thr);
  CHECK(th.significant == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(partition_features(PersistenceDiagram{}), ParameterError);
}

TEST_CASE("top-k partition equals a brute-force sort") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_diagram(rng, 1 + trial % 13);
    PartitionConfig pc;
    pc.k = 1 + static_cast<std::size_t>(trial % 4);
    const auto part = partition_features(d, pc);
    std::vector<std::size_t> idx(d.pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      return d.pairs[a].persistence() > d.pairs[b].persistence();
    });
    std::vector<std::size_t> expect(idx.begin(), idx.begin() + static_cast<long>(std::min(pc.k, idx.size())));
    std::sort(expect.begin(), expect.end());
    CHECK(part.significant == expect);
    CHECK(part.significant.size() + part.noise.size() == d.pairs.size());

    double neg = 0.0, deaths = 0.0;
    for (auto i : part.significant) neg -= d.pairs[i].death - d.pairs[i].birth;
    for (auto i : part.noise) deaths += d.pairs[i].death;
    CHECK(loss_significant(d, part) == doctest::Approx(neg));
    CHECK(loss_significant(d, part) <= 0.0);
    CHECK(loss_noise(d, part) == doctest::Approx(deaths));
  }
}

TEST_CASE("loss value examples") {
  PersistenceDiagram d;
  d.pairs.push_back({0.0, 0.8, 0, 1, false});
  d.pairs.push_back({0.2, 0.3, 2, 3, false});
  FeaturePartition none;
  CHECK(loss_significant(d, none) == 0.0);
  CHECK(loss_noise(d, none) == 0.0);
  FeaturePartition p;
  p.significant = {0};
  p.noise = {1};
  CHECK(loss_significant(d, p) == doctest::Approx(-0.8));
  const auto terms = loss_noise_terms(d, p);
  CHECK(terms.birth_term == doctest::Approx(0.2));
  CHECK(terms.persistence_term == doctest::Approx(0.1));
  CHECK(loss_noise(d, p) == doctest::Approx(0.3));
  CHECK(loss_noise(d, p, BirthTermSet::significant) == doctest::Approx(0.0 + 0.1));
}

TEST_CASE("topological value gradient examples") {
  PersistenceDiagram d;
  d.pairs.push_back({0.1, 0.9, 4, 7, false});
  FeaturePartition sig;
  sig.significant = {0};
  const auto g = densify(topo_value_gradient(d, sig, {1.0, 0.0, 0}), 8);
  CHECK(g[4] == 1.0);
  CHECK(g[7] == -1.0);

  PersistenceDiagram n2;
  n2.pairs.push_back({0.1, 0.2, 1, 2, false});
  n2.pairs.push_back({0.3, 0.5, 3, 5, false});
  FeaturePartition noise;
  noise.noise = {0, 1};
  const auto entries = topo_value_gradient(n2, noise, {0.0, 1.0, 0});
  // birth contributions stay as two cancelling entries
  CHECK(std::count_if(entries.begin(), entries.end(), [](auto e) { return e.index == 1; }) == 2);
  const auto gn = densify(entries, 6);
  CHECK(gn[1] == 0.0);
  CHECK(gn[3] == 0.0);
  CHECK(gn[2] == 1.0);
  CHECK(gn[5] == 1.0);
}

TEST_CASE("topological value gradient matches finite differences on grids") {
  std::mt19937_64 rng(31);
  const LossWeights w{0.7, 2.5, 0};
  for (int trial = 0; trial < 30; ++trial) {
    const std::array<std::size_t, 3> dims{3, 3, 1 + static_cast<std::size_t>(trial % 3)};
    std::vector<double> v(dims[0] * dims[1] * dims[2]);
    std::iota(v.begin(), v.end(), 0.0);
    std::shuffle(v.begin(), v.end(), rng);
    // jitter keeps persistences distinct so the partition is stable under the probe
    std::uniform_real_distribution<double> jitter(0.0, 5e-3);
    for (auto& x : v) x = 0.01 * x + jitter(rng);
    PartitionConfig pc;
    pc.k = 1 + static_cast<std::size_t>(trial % 2);
    ScalarGrid g = ScalarGrid::with_dims(dims, v);
    const auto d = persistence0(g);
    const auto an = densify(topo_value_gradient(d, partition_features(d, pc), w), v.size());
    const auto num = oracle::fd_gradient(
        [&](const std::vector<double>& x) {
          return topo_objective(ScalarGrid::with_dims(dims, x), pc, w);
        },
        v, 1e-6);
    CHECK(oracle::max_rel_err(an, num, 1e-3) < 1e-6);
  }
}

TEST_CASE("topological gradient through the network matches finite differences") {
  const LossWeights w{0.5, 5.0, 0};
  TopoConfig topo;
  topo.grid_resolution = 3;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    SdfModel m = init_geometric(Architecture{2, 6, 1}, 0.5, seed);
    // zero hidden biases put every unit on its kink at the grid centre
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nudge(0.0, 0.05);
    for (auto& layer : m.layers)
      for (auto& b : layer.bias.storage()) b += nudge(rng);
    auto objective = [&](const std::vector<double>& theta) {
      SdfModel mm = m;
      mm.unflatten(theta);
      return topo_objective(sample_grid(mm, 3, topo.domain, true), topo.partition, w);
    };
    ad::Tape t;
    const auto params = bind_parameters(m, t);
    const auto ev = eval_grid(m, params, 3, topo.domain, t, true);
    const auto d = persistence0(ev.grid);
    const auto part = partition_features(d, topo.partition);
    topo_backward(d, part, w, BirthTermSet::noise, ev, t);
    const auto an = flatten_gradients(t.backward_injected(), params);
    const auto num = oracle::fd_gradient(objective, m.flatten(), 1e-7);
    CHECK(oracle::max_rel_err(an, num, 1e-3) < 1e-4);
  }
}

TEST_CASE("topo backward rejects a mismatched diagram") {
  SdfModel m = init_geometric(Architecture{2, 6, 1}, 0.5, 1);
  ad::Tape t;
  const auto ev = eval_grid(m, bind_parameters(m, t), 3, GridDomain{}, t, true);
  const auto d4 = persistence0(sample_grid(m, 4, GridDomain{}, true));
  CHECK_THROWS_AS(topo_backward(d4, partition_features(d4), {}, BirthTermSet::noise, ev, t),
                  ConsistencyError);
  const auto raw = persistence0(sample_grid(m, 3, GridDomain{}, false));
  CHECK_THROWS_AS(topo_backward(raw, partition_features(raw), {}, BirthTermSet::noise, ev, t),
                  ConsistencyError);
}

TEST_CASE("losses scale with the grid values") {
  std::mt19937_64 rng(4);
  std::vector<double> v(27);
  std::iota(v.begin(), v.end(), 0.0);
  std::shuffle(v.begin(), v.end(), rng);
  const auto g = ScalarGrid::with_dims({3, 3, 3}, v);
  auto h = v;
  for (auto& x : h) x *= 2.5;
  const auto da = persistence0(g);
  const auto db = persistence0(ScalarGrid::with_dims({3, 3, 3}, h));
  const auto pa = partition_features(da), pb = partition_features(db);
  CHECK(pa.significant == pb.significant);
  CHECK(pa.noise == pb.noise);
  CHECK(loss_significant(db, pb) == doctest::Approx(2.5 * loss_significant(da, pa)));
  CHECK(loss_noise(db, pb) == doctest::Approx(2.5 * loss_noise(da, pa)));
}

TEST_CASE("unified loss gating and recomputation") {
  std::mt19937_64 rng(12);
  PointCloud cloud;
  for (auto p : oracle::random_points(60, rng, -0.15, 0.15)) cloud.points.push_back({p[0] - 0.5, p[1], p[2]});
  for (auto p : oracle::random_points(60, rng, -0.15, 0.15)) cloud.points.push_back({p[0] + 0.5, p[1], p[2]});
  const KnnIndex index = build_index(cloud);
  const auto sig = per_point_sigma(index, cloud, 5);
  const auto batch = sample_queries(cloud, sig, 64, 3);
  const SdfModel m = init_geometric(Architecture{3, 16, 1}, 0.5, 7);
  TopoConfig topo;
  topo.grid_resolution = 6;
  const LossWeights w{0.5, 5.0, 10};

  ad::Tape t1;
  const auto early = unified_loss(m, bind_parameters(m, t1), cloud, index, batch, topo, w, 9, t1);
  CHECK_FALSE(early.topo_active);
  CHECK_FALSE(early.diagram.has_value());
  CHECK(early.total == early.pull);

  ad::Tape t2;
  const auto late = unified_loss(m, bind_parameters(m, t2), cloud, index, batch, topo, w, 10, t2);
  REQUIRE(late.diagram.has_value());
  CHECK(late.pull == early.pull);
  const auto part = partition_features(*late.diagram, topo.partition);
  const double expect = late.pull + 0.5 * loss_significant(*late.diagram, part) +
                        5.0 * loss_noise(*late.diagram, part);
  CHECK(late.total == doctest::Approx(expect).epsilon(1e-14));
  CHECK(*late.diagram == persistence0(sample_grid(m, 6, topo.domain, true)));

  ad::Tape t3;
  const auto zero = unified_loss(m, bind_parameters(m, t3), cloud, index, batch, topo, {0.0, 0.0, 0}, 50, t3);
  CHECK(zero.topo_active);
  CHECK(zero.total == zero.pull);
}
