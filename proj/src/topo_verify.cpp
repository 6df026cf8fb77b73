#include "toposdf/topo_verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "toposdf/errors.hpp"
#include "toposdf/kernels.hpp"

namespace toposdf {

FiniteSet3::FiniteSet3(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw DegenerateInputError("a finite set needs at least 2 points, got " +
                               std::to_string(points_.size()));
  }
}

double FiniteSet3::distance(std::size_t i, std::size_t j) const {
  return std::sqrt(kernels::squared_distance(points_.at(i), points_.at(j)));
}

const std::vector<double>& FiniteSet3::pairwise() const {
  if (pairwise_.empty()) {
    pairwise_.reserve(points_.size() * (points_.size() - 1) / 2);
    for (std::size_t i = 0; i < points_.size(); ++i)
      for (std::size_t j = i + 1; j < points_.size(); ++j) pairwise_.push_back(distance(i, j));
  }
  return pairwise_;
}

ConnectivityBounds connectivity_bounds(const FiniteSet3& set) {
  const auto& d = set.pairwise();
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  return {*mn, *mx};
}

bool is_m_eps_dense(const FiniteSet3& set, std::size_t m, double eps) {
  if (m >= set.size()) {
    throw ParameterError("density order m=" + std::to_string(m) + " must be below the set size " +
                         std::to_string(set.size()));
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::size_t close = 0;
    for (std::size_t j = 0; j < set.size(); ++j)
      if (j != i && set.distance(i, j) <= eps) ++close;
    if (close < m) return false;
  }
  return true;
}

bool is_eps_separated(const std::vector<Vec3>& points, double eps) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (!(std::sqrt(kernels::squared_distance(points[i], points[j])) > eps)) return false;
  return true;
}

bool is_eps_separated(const FiniteSet3& set, double eps) {
  for (double d : set.pairwise())
    if (!(d > eps)) return false;
  return true;
}

namespace {

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void validate_annulus(const Annulus& a, double eps) {
  if (!(a.beta > 0.0) || !(a.alpha >= 0.0) || a.alpha > a.beta) {
    throw ParameterError("invalid annulus [" + std::to_string(a.alpha) + ", " +
                         std::to_string(a.beta) + "]");
  }
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
}

using Rotation = std::array<std::array<double, 3>, 3>;

Rotation random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2 * std::numbers::pi * u2), x = a * std::cos(2 * std::numbers::pi * u2);
  const double y = b * std::sin(2 * std::numbers::pi * u3), z = b * std::cos(2 * std::numbers::pi * u3);
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

Vec3 rotate(const Rotation& r, const Vec3& p) {
  return {r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2],
          r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
          r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2]};
}

std::vector<std::vector<Vec3>> unit_polyhedra() {
  std::vector<Vec3> octa = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<Vec3> cube;
  const double c = 1.0 / std::sqrt(3.0);
  for (int i = 0; i < 8; ++i)
    cube.push_back({(i & 1) ? c : -c, (i & 2) ? c : -c, (i & 4) ? c : -c});
  std::vector<Vec3> ico;
  const double phi = std::numbers::phi;
  const double n = std::sqrt(1.0 + phi * phi);
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      ico.push_back({0.0, s1 / n, s2 * phi / n});
      ico.push_back({s1 / n, s2 * phi / n, 0.0});
      ico.push_back({s2 * phi / n, 0.0, s1 / n});
    }
  }
  return {octa, cube, ico};
}

std::vector<Vec3> candidate_points(const Annulus& a, std::mt19937_64& rng) {
  static const auto polyhedra = unit_polyhedra();
  std::vector<std::vector<Vec3>> groups;
  for (double r : {a.beta, 0.5 * (a.alpha + a.beta), a.alpha}) {
    if (r <= 0.0) continue;
    for (const auto& poly : polyhedra) {
      const Rotation rot = random_rotation(rng);
      std::vector<Vec3> g;
      for (const Vec3& p : poly) {
        const Vec3 q = rotate(rot, p);
        g.push_back({r * q[0], r * q[1], r * q[2]});
      }
      groups.push_back(std::move(g));
    }
  }
  std::shuffle(groups.begin(), groups.end(), rng);

  std::vector<Vec3> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double a3 = a.alpha * a.alpha * a.alpha, b3 = a.beta * a.beta * a.beta;
  constexpr std::size_t kRandomCandidates = 512;
  for (std::size_t i = 0; i < kRandomCandidates; ++i) {
    Vec3 d{gauss(rng), gauss(rng), gauss(rng)};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (len == 0.0) continue;
    const double r = std::cbrt(a3 + unit(rng) * (b3 - a3));
    out.push_back({r * d[0] / len, r * d[1] / len, r * d[2] / len});
  }
  return out;
}

std::vector<Vec3> greedy(const std::vector<Vec3>& candidates, double eps) {
  std::vector<Vec3> accepted;
  for (const Vec3& c : candidates) {
    bool ok = true;
    for (const Vec3& p : accepted) {
      if (!(std::sqrt(kernels::squared_distance(c, p)) > eps)) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(c);
  }
  return accepted;
}

Packing search_packing(const Annulus& annulus, double eps, std::size_t trials, std::uint64_t seed,
                       std::size_t target) {
  validate_annulus(annulus, eps);
  Packing best;
  if (eps >= 2.0 * annulus.beta) {
    best.points.push_back({annulus.beta, 0.0, 0.0});
    return best;
  }
  std::vector<double> ladder{eps};
  for (double e = 2.0 * annulus.beta; e > eps; e *= 0.9) ladder.push_back(e);

  for (std::size_t t = 0; t < std::max<std::size_t>(trials, 1); ++t) {
    std::mt19937_64 rng(trial_seed(seed, t));
    const std::vector<Vec3> candidates = candidate_points(annulus, rng);
    for (double e : ladder) {
      std::vector<Vec3> found = greedy(candidates, e);
      if (found.size() > best.size()) best.points = std::move(found);
      if (best.size() >= target) return best;
    }
  }
  return best;
}

std::vector<Vec3> uniform_cube(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(m);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

void validate_mk(std::size_t m, std::size_t k) {
  if (m > kMaxVerifySetSize) {
    throw ParameterError("m=" + std::to_string(m) + " exceeds the exhaustive subset limit of " +
                         std::to_string(kMaxVerifySetSize));
  }
  if (k < 2 || k > m) {
    throw ParameterError("need 2 <= k <= m, got k=" + std::to_string(k) +
                         " m=" + std::to_string(m));
  }
}

// Largest diameter over all k-subsets, by enumeration.
double max_subset_diameter(const FiniteSet3& set, std::size_t k) {
  const std::size_t m = set.size();
  double beta = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      for (std::size_t j = i + 1; j < m; ++j)
        if (mask & (1u << j)) beta = std::max(beta, set.distance(i, j));
    }
  }
  return beta;
}

}  // namespace

Packing best_packing(const Annulus& annulus, double eps, std::size_t trials, std::uint64_t seed) {
  return search_packing(annulus, eps, trials, seed, static_cast<std::size_t>(-1));
}

std::size_t metric_entropy_lower_bound(const Annulus& annulus, double eps, std::size_t trials,
                                       std::uint64_t seed) {
  return best_packing(annulus, eps, trials, seed).size();
}

std::size_t metric_entropy_upper_bound(const Annulus& annulus, double eps) {
  validate_annulus(annulus, eps);
  if (eps >= 2.0 * annulus.beta) return 1;
  const double ratio = (2.0 * annulus.beta + eps) / eps;
  const double bound = std::ceil(ratio * ratio * ratio);
  if (bound > 1e18) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(bound);
}

Theorem2Report check_theorem2(std::size_t m, std::size_t k, std::size_t trials, std::uint64_t seed) {
  validate_mk(m, k);
  Theorem2Report report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(trial_seed(seed, t));
    const FiniteSet3 M(uniform_cube(m, rng));
    const double beta = max_subset_diameter(M, k);
    if (!is_m_eps_dense(M, m - k + 1, beta)) ++report.counterexamples;
  }
  return report;
}

Theorem3Report check_theorem3(std::size_t m, std::size_t k, double eps_ratio, std::size_t trials,
                              std::uint64_t seed, std::size_t packing_trials) {
  validate_mk(m, k);
  if (!(eps_ratio > 0.0)) throw ParameterError("eps ratio must be positive");
  Theorem3Report report;
  report.trials = trials;
  const std::size_t need = m - k + 1;
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(trial_seed(seed, t));
    const FiniteSet3 M(uniform_cube(m, rng));
    const ConnectivityBounds cb = connectivity_bounds(M);
    const Annulus annulus{cb.alpha, cb.beta};
    const double eps = eps_ratio * cb.beta;
    if (need > metric_entropy_upper_bound(annulus, eps)) {
      if (is_eps_separated(M, eps)) {
        ++report.violated;
      } else {
        ++report.verified;
      }
      continue;
    }
    const Packing p = search_packing(annulus, eps, packing_trials, rng(), need);
    if (p.size() >= need) {
      ++report.premise_false;
    } else {
      ++report.undecided;
    }
  }
  return report;
}

}  // namespace toposdf
