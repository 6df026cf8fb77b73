#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "toposdf/tensor.hpp"

namespace toposdf {

enum class ShapeKind { sphere, two_spheres, torus, thin_plate };

std::string_view to_string(ShapeKind k);
ShapeKind shape_kind_from_string(std::string_view s);

/// Shapes are centred at the origin.
///   sphere       radius
///   two_spheres  two balls of `radius` on the x axis, surfaces `gap` apart
///   torus        major_radius about the z axis, tube minor_radius
///   thin_plate   slab |z| <= thickness/2 clipped to the box |x|,|y| <= half_extent
struct ShapeSpec {
  ShapeKind kind = ShapeKind::sphere;
  double radius = 0.5;
  double gap = 0.3;
  double major_radius = 0.5;
  double minor_radius = 0.15;
  double thickness = 0.05;
  double half_extent = 0.6;
  std::size_t samples = 2000;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  void validate() const;

  static ShapeSpec sphere(double radius, std::size_t samples, std::uint64_t seed);
  static ShapeSpec two_spheres(double radius, double gap, std::size_t samples, std::uint64_t seed);
  static ShapeSpec torus(double major, double minor, std::size_t samples, std::uint64_t seed);
  static ShapeSpec thin_plate(double half_extent, double thickness, std::size_t samples,
                              std::uint64_t seed);
};

/// Defaults used for the two-spheres experiments: radius 0.375, gap 0.3, so
/// the pair spans [-0.9, 0.9] along x.
inline constexpr double kTwoSpheresRadius = 0.375;
inline constexpr double kTwoSpheresGap = 0.3;

/// Exact signed distance, negative inside.
double analytic_sdf(const ShapeSpec& spec, const Vec3& p);

struct SyntheticShape {
  ShapeSpec spec;
  std::vector<Vec3> points;
  double sdf(const Vec3& p) const { return analytic_sdf(spec, p); }
};

/// Area-uniform surface samples plus optional isotropic Gaussian noise.
SyntheticShape generate(const ShapeSpec& spec);

}  // namespace toposdf
