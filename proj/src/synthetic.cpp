#include "toposdf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "toposdf/errors.hpp"

namespace toposdf {

std::string_view to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::two_spheres: return "two_spheres";
    case ShapeKind::torus: return "torus";
    case ShapeKind::thin_plate: return "thin_plate";
  }
  return "sphere";
}

ShapeKind shape_kind_from_string(std::string_view s) {
  if (s == "sphere") return ShapeKind::sphere;
  if (s == "two_spheres") return ShapeKind::two_spheres;
  if (s == "torus") return ShapeKind::torus;
  if (s == "thin_plate") return ShapeKind::thin_plate;
  throw ParameterError("unknown shape '" + std::string(s) + "'");
}

void ShapeSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ParameterError(std::string(name) + " must be positive");
  };
  switch (kind) {
    case ShapeKind::sphere: positive(radius, "radius"); break;
    case ShapeKind::two_spheres:
      positive(radius, "radius");
      if (!(gap >= 0.0)) throw ParameterError("gap must be non-negative");
      break;
    case ShapeKind::torus:
      positive(major_radius, "major_radius");
      positive(minor_radius, "minor_radius");
      if (minor_radius >= major_radius) throw ParameterError("torus tube must be thinner than its ring");
      break;
    case ShapeKind::thin_plate:
      positive(half_extent, "half_extent");
      positive(thickness, "thickness");
      break;
  }
  if (!(noise_std >= 0.0)) throw ParameterError("noise_std must be non-negative");
}

ShapeSpec ShapeSpec::sphere(double radius, std::size_t samples, std::uint64_t seed) {
  ShapeSpec s;
  s.kind = ShapeKind::sphere;
  s.radius = radius;
  s.samples = samples;
  s.seed = seed;
  return s;
}

ShapeSpec ShapeSpec::two_spheres(double radius, double gap, std::size_t samples, std::uint64_t seed) {
  ShapeSpec s = sphere(radius, samples, seed);
  s.kind = ShapeKind::two_spheres;
  s.gap = gap;
  return s;
}

ShapeSpec ShapeSpec::torus(double major, double minor, std::size_t samples, std::uint64_t seed) {
  ShapeSpec s;
  s.kind = ShapeKind::torus;
  s.major_radius = major;
  s.minor_radius = minor;
  s.samples = samples;
  s.seed = seed;
  return s;
}

ShapeSpec ShapeSpec::thin_plate(double half_extent, double thickness, std::size_t samples,
                                std::uint64_t seed) {
  ShapeSpec s;
  s.kind = ShapeKind::thin_plate;
  s.half_extent = half_extent;
  s.thickness = thickness;
  s.samples = samples;
  s.seed = seed;
  return s;
}

namespace {

double norm(const Vec3& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

double box_sdf(const Vec3& p, const Vec3& half) {
  Vec3 q;
  for (int k = 0; k < 3; ++k) q[k] = std::fabs(p[k]) - half[k];
  const Vec3 outside{std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0)};
  return norm(outside) + std::min(std::max({q[0], q[1], q[2]}), 0.0);
}

Vec3 unit_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  while (true) {
    Vec3 d{g(rng), g(rng), g(rng)};
    const double n = norm(d);
    if (n > 1e-12) return {d[0] / n, d[1] / n, d[2] / n};
  }
}

}  // namespace

double analytic_sdf(const ShapeSpec& spec, const Vec3& p) {
  switch (spec.kind) {
    case ShapeKind::sphere: return norm(p) - spec.radius;
    case ShapeKind::two_spheres: {
      const double c = spec.radius + 0.5 * spec.gap;
      const double a = norm({p[0] - c, p[1], p[2]}) - spec.radius;
      const double b = norm({p[0] + c, p[1], p[2]}) - spec.radius;
      return std::min(a, b);
    }
    case ShapeKind::torus: {
      const double ring = std::sqrt(p[0] * p[0] + p[1] * p[1]) - spec.major_radius;
      return std::sqrt(ring * ring + p[2] * p[2]) - spec.minor_radius;
    }
    case ShapeKind::thin_plate:
      return box_sdf(p, {spec.half_extent, spec.half_extent, 0.5 * spec.thickness});
  }
  return 0.0;
}

SyntheticShape generate(const ShapeSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SyntheticShape shape;
  shape.spec = spec;
  shape.points.resize(spec.samples);

  for (auto& p : shape.points) {
    switch (spec.kind) {
      case ShapeKind::sphere: {
        const Vec3 d = unit_direction(rng);
        p = {spec.radius * d[0], spec.radius * d[1], spec.radius * d[2]};
        break;
      }
      case ShapeKind::two_spheres: {
        const double c = (unit(rng) < 0.5 ? -1.0 : 1.0) * (spec.radius + 0.5 * spec.gap);
        const Vec3 d = unit_direction(rng);
        p = {c + spec.radius * d[0], spec.radius * d[1], spec.radius * d[2]};
        break;
      }
      case ShapeKind::torus: {
        const double R = spec.major_radius, r = spec.minor_radius;
        double phi = 0.0;
        // area element is proportional to R + r cos(phi)
        do {
          phi = 2.0 * std::numbers::pi * unit(rng);
        } while (unit(rng) * (R + r) > R + r * std::cos(phi));
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        const double w = R + r * std::cos(phi);
        p = {w * std::cos(theta), w * std::sin(theta), r * std::sin(phi)};
        break;
      }
      case ShapeKind::thin_plate: {
        const double h = spec.half_extent, t = 0.5 * spec.thickness;
        const double cap = 4.0 * h * h;  // each of the two large faces
        const double side = 4.0 * h * t;  // each of the four rims
        const double pick = unit(rng) * (2.0 * cap + 4.0 * side);
        const double u = 2.0 * unit(rng) - 1.0, v = 2.0 * unit(rng) - 1.0;
        if (pick < 2.0 * cap) {
          p = {h * u, h * v, pick < cap ? t : -t};
        } else {
          const int face = std::min(3, static_cast<int>((pick - 2.0 * cap) / side));
          const double s = face % 2 == 0 ? h : -h;
          p = face < 2 ? Vec3{s, h * u, t * v} : Vec3{h * u, s, t * v};
        }
        break;
      }
    }
  }

  if (spec.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (auto& p : shape.points)
      for (double& c : p) c += noise(rng);
  }
  return shape;
}

}  // namespace toposdf
