#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "toposdf/tensor.hpp"

namespace toposdf {

/// A finite point set with at least two points. Pairwise distances are
/// computed once on demand.
class FiniteSet3 {
 public:
  explicit FiniteSet3(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }
  double distance(std::size_t i, std::size_t j) const;
  // Unordered pairs (i < j) in lexicographic order.
  const std::vector<double>& pairwise() const;

 private:
  std::vector<Vec3> points_;
  mutable std::vector<double> pairwise_;
};

struct ConnectivityBounds {
  double alpha = 0.0;  // smallest pairwise distance
  double beta = 0.0;   // largest pairwise distance
};

ConnectivityBounds connectivity_bounds(const FiniteSet3& set);

/// Every point has at least m other points within eps (inclusive).
bool is_m_eps_dense(const FiniteSet3& set, std::size_t m, double eps);

/// Every distinct pair is strictly farther apart than eps.
bool is_eps_separated(const FiniteSet3& set, double eps);
bool is_eps_separated(const std::vector<Vec3>& points, double eps);

/// Closed annulus {alpha <= |z| <= beta}; alpha == beta is the sphere.
struct Annulus {
  double alpha = 0.0;
  double beta = 1.0;
};

struct Packing {
  std::vector<Vec3> points;
  std::size_t size() const { return points.size(); }
};

/// Largest eps-separated subset of the annulus found by greedy insertion over
/// randomized candidate orderings. Candidates include rotated octahedron, cube
/// and icosahedron vertices on several shells plus uniform random points. A
/// packing for a larger eps is also a packing for eps, so the search also runs
/// on the ladder 2 beta * 0.9^j above eps.
Packing best_packing(const Annulus& annulus, double eps, std::size_t trials, std::uint64_t seed);

/// Certified lower bound on the eps-metric entropy of the annulus.
std::size_t metric_entropy_lower_bound(const Annulus& annulus, double eps, std::size_t trials,
                                       std::uint64_t seed);

/// Volume bound: disjoint balls of radius eps/2 centred in the ball of radius
/// beta fit inside radius beta + eps/2. Exactly 1 once eps >= 2 beta.
std::size_t metric_entropy_upper_bound(const Annulus& annulus, double eps);

struct Theorem2Report {
  std::size_t trials = 0;
  std::size_t counterexamples = 0;
};

inline constexpr std::size_t kMaxVerifySetSize = 8;

/// Draws M uniformly in the unit cube, takes beta as the largest k-subset
/// diameter and asserts M is (m-k+1)~beta-dense.
Theorem2Report check_theorem2(std::size_t m, std::size_t k, std::size_t trials, std::uint64_t seed);

struct Theorem3Report {
  std::size_t trials = 0;
  std::size_t verified = 0;       // premise decided true, M not eps-separated
  std::size_t premise_false = 0;  // a packing of size m-k+1 exists
  std::size_t undecided = 0;      // neither bound decides the premise
  std::size_t violated = 0;       // premise true but M eps-separated
  std::size_t counterexamples() const { return violated; }
};

/// eps is eps_ratio times the trial's beta.
Theorem3Report check_theorem3(std::size_t m, std::size_t k, double eps_ratio, std::size_t trials,
                              std::uint64_t seed, std::size_t packing_trials = 8);

}  // namespace toposdf
