#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "toposdf/errors.hpp"
#include "toposdf/synthetic.hpp"

using namespace toposdf;

namespace {

// chi-square statistic of counts against equal expected frequencies
double chi_square(const std::vector<std::size_t>& counts) {
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  const double e = n / static_cast<double>(counts.size());
  double s = 0.0;
  for (auto c : counts) s += (static_cast<double>(c) - e) * (static_cast<double>(c) - e) / e;
  return s;
}

// 0.99 quantile of chi-square with 19 degrees of freedom
constexpr double kChi2Crit19 = 36.191;

}  // namespace

TEST_CASE("analytic sdf examples") {
  CHECK(analytic_sdf(ShapeSpec::sphere(0.5, 10, 0), {0, 0, 0}) == -0.5);
  CHECK(analytic_sdf(ShapeSpec::sphere(0.5, 10, 0), {0, 2, 0}) == doctest::Approx(1.5));
  const auto torus = ShapeSpec::torus(0.5, 0.15, 10, 0);
  CHECK(analytic_sdf(torus, {0.5, 0, 0}) == doctest::Approx(-0.15));
  CHECK(analytic_sdf(torus, {0, 0, 0}) == doctest::Approx(0.35));
  const auto two = ShapeSpec::two_spheres(kTwoSpheresRadius, kTwoSpheresGap, 10, 0);
  CHECK(analytic_sdf(two, {0, 0, 0}) == doctest::Approx(kTwoSpheresGap / 2.0));
  const auto plate = ShapeSpec::thin_plate(0.6, 0.05, 10, 0);
  CHECK(analytic_sdf(plate, {0, 0, 0}) == doctest::Approx(-0.025));
  CHECK(analytic_sdf(plate, {0, 0, 1}) == doctest::Approx(0.975));
}

TEST_CASE("generated points lie on the zero set") {
  for (const auto& spec : {ShapeSpec::sphere(0.5, 1000, 1), ShapeSpec::torus(0.5, 0.15, 1000, 2),
                           ShapeSpec::two_spheres(kTwoSpheresRadius, kTwoSpheresGap, 1000, 3),
                           ShapeSpec::thin_plate(0.6, 0.05, 1000, 4)}) {
    const auto s = generate(spec);
    REQUIRE(s.points.size() == 1000);
    for (const auto& p : s.points) CHECK(std::fabs(analytic_sdf(spec, p)) < 1e-12);
    CHECK(generate(spec).points == s.points);
  }
}

TEST_CASE("noisy samples stay near the surface") {
  ShapeSpec sphere = ShapeSpec::sphere(0.5, 1000, 5);
  sphere.noise_std = 0.01;
  for (const auto& p : generate(sphere).points) CHECK(std::fabs(oracle::dist(p, {0, 0, 0}) - 0.5) < 0.04);

  ShapeSpec two = ShapeSpec::two_spheres(kTwoSpheresRadius, 0.3, 1000, 6);
  two.noise_std = 0.005;
  const auto pts = generate(two).points;
  std::vector<Vec3> left, right;
  for (const auto& p : pts) (p[0] < 0 ? left : right).push_back(p);
  double gap = 1e9;
  for (const auto& a : left)
    for (const auto& b : right) gap = std::min(gap, oracle::dist(a, b));
  CHECK(gap >= 0.3 - 8.0 * 0.005);
}

TEST_CASE("analytic sdf matches dense surface sampling") {
  for (const auto& spec : {ShapeSpec::sphere(0.5, 1000000, 7), ShapeSpec::torus(0.5, 0.15, 1000000, 8)}) {
    const auto dense = generate(spec).points;
    std::mt19937_64 rng(9);
    for (const auto& q : oracle::random_points(20, rng)) {
      const double brute = oracle::brute_nearest(q, dense).second;
      CHECK(std::fabs(std::fabs(analytic_sdf(spec, q)) - brute) < 2e-3);
    }
  }
}

TEST_CASE("sampling is area uniform") {
  // equal-height bands of a sphere have equal area
  const auto s = generate(ShapeSpec::sphere(0.5, 100000, 10)).points;
  std::vector<std::size_t> bands(20, 0);
  for (const auto& p : s) bands[std::min<std::size_t>(19, static_cast<std::size_t>((p[2] + 0.5) / 0.05))]++;
  CHECK(chi_square(bands) < kChi2Crit19);

  // the torus is rotationally symmetric about z
  const auto t = generate(ShapeSpec::torus(0.5, 0.15, 100000, 11)).points;
  std::vector<std::size_t> sectors(20, 0);
  for (const auto& p : t) {
    const double a = std::atan2(p[1], p[0]) + std::numbers::pi;
    sectors[std::min<std::size_t>(19, static_cast<std::size_t>(a / (2.0 * std::numbers::pi) * 20.0))]++;
  }
  CHECK(chi_square(sectors) < kChi2Crit19);
  // tube angle bins weighted by their area share, 1 + (r/R) cos(phi)
  std::vector<double> expect(20, 0.0), got(20, 0.0);
  for (const auto& p : t) {
    const double rho = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    const double phi = std::atan2(p[2], rho - 0.5) + std::numbers::pi;
    got[std::min<std::size_t>(19, static_cast<std::size_t>(phi / (2.0 * std::numbers::pi) * 20.0))] += 1.0;
  }
  const double w = 2.0 * std::numbers::pi / 20.0;
  double chi = 0.0;
  for (int b = 0; b < 20; ++b) {
    const double lo = -std::numbers::pi + b * w, hi = lo + w;
    const double share = (w + 0.3 * (std::sin(hi) - std::sin(lo))) / (2.0 * std::numbers::pi);
    expect[b] = share * 100000.0;
    chi += (got[b] - expect[b]) * (got[b] - expect[b]) / expect[b];
  }
  CHECK(chi < kChi2Crit19);
}

TEST_CASE("shape names and validation") {
  CHECK(shape_kind_from_string("two_spheres") == ShapeKind::two_spheres);
  CHECK(to_string(ShapeKind::thin_plate) == "thin_plate");
  CHECK_THROWS_AS(shape_kind_from_string("cube"), ParameterError);
  CHECK_THROWS_AS(generate(ShapeSpec::sphere(-1.0, 10, 0)), ParameterError);
  CHECK_THROWS_AS(generate(ShapeSpec::torus(0.1, 0.2, 10, 0)), ParameterError);
}
