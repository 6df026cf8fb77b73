#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "toposdf/autodiff.hpp"
#include "toposdf/tensor.hpp"

namespace toposdf {

/// MLP shape. `layer_count` counts affine layers including the scalar output
/// layer; every layer but the last is followed by a ReLU. The layer at
/// `skip_layer` receives the hidden activation concatenated with the raw
/// 3D input (scaled by 1/sqrt(2)), so its fan-in is hidden_width + 3.
struct Architecture {
  std::size_t layer_count = 8;
  std::size_t hidden_width = 256;
  std::size_t skip_layer = 4;

  static Architecture with_default_skip(std::size_t layers, std::size_t width) {
    return {layers, width, layers / 2 == 0 ? 1 : layers / 2};
  }

  void validate() const;
  std::size_t input_dim(std::size_t layer) const;
  std::size_t output_dim(std::size_t layer) const;
  std::size_t parameter_count() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class InitScheme : std::uint32_t { geometric = 0, standard = 1 };

struct InitDescriptor {
  InitScheme scheme = InitScheme::geometric;
  double radius = 0.5;
  std::uint64_t seed = 0;
};

struct DenseLayer {
  Tensor weight;  // fan_in x fan_out
  Tensor bias;    // fan_out
};

struct SdfModel {
  Architecture arch;
  std::vector<DenseLayer> layers;
  InitDescriptor init;

  std::size_t parameter_count() const { return arch.parameter_count(); }
  // Layer-major, weights before bias; the checkpoint blob order.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);
};

inline constexpr double kSkipScale = 0.70710678118654752440;

SdfModel init_geometric(const Architecture& arch, double radius, std::uint64_t seed);
SdfModel init_standard(const Architecture& arch, std::uint64_t seed);

/// Tape handles for one model's parameters.
struct BoundModel {
  std::vector<ad::Var> weights;
  std::vector<ad::Var> biases;
};

// trainable=false binds parameters as constants, so no parameter adjoints are
// accumulated.
BoundModel bind_parameters(const SdfModel& model, ad::Tape& tape, bool trainable = true);

/// f(points) on the tape; points is n x 3, the result has shape [n].
ad::Var sdf_forward(const SdfModel& model, const BoundModel& params, ad::Var points);

struct SdfWithGradient {
  ad::Var value;     // [n]
  ad::Var gradient;  // n x 3, d f / d x built from differentiable tape ops
};

/// Forward pass plus the spatial gradient expressed on the tape, so that
/// losses depending on the gradient direction can be differentiated with
/// respect to the parameters. ReLU masks enter as constants.
SdfWithGradient sdf_forward_with_gradient(const SdfModel& model, const BoundModel& params,
                                          ad::Var points);

/// Exact spatial gradient by reverse mode (seed of ones on the outputs).
Tensor spatial_gradient(const SdfModel& model, const Tensor& points);

/// Tape-free batched evaluation.
std::vector<double> evaluate(const SdfModel& model, std::span<const Vec3> points);
double evaluate(const SdfModel& model, const Vec3& point);

}  // namespace toposdf
