#include "toposdf/sdf_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "toposdf/errors.hpp"
#include "toposdf/kernels.hpp"

namespace toposdf {

void Architecture::validate() const {
  if (layer_count < 2) throw ParameterError("architecture needs at least 2 layers");
  if (hidden_width == 0) throw ParameterError("hidden width must be positive");
  if (skip_layer == 0 || skip_layer >= layer_count) {
    throw ParameterError("skip layer " + std::to_string(skip_layer) + " must lie in (0, " +
                         std::to_string(layer_count) + ")");
  }
}

std::size_t Architecture::input_dim(std::size_t layer) const {
  if (layer == 0) return 3;
  return layer == skip_layer ? hidden_width + 3 : hidden_width;
}

std::size_t Architecture::output_dim(std::size_t layer) const {
  return layer + 1 == layer_count ? 1 : hidden_width;
}

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < layer_count; ++l) total += (input_dim(l) + 1) * output_dim(l);
  return total;
}

std::vector<double> SdfModel::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers) {
    out.insert(out.end(), layer.weight.storage().begin(), layer.weight.storage().end());
    out.insert(out.end(), layer.bias.storage().begin(), layer.bias.storage().end());
  }
  return out;
}

void SdfModel::unflatten(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw DimensionError("parameter blob has " + std::to_string(values.size()) +
                         " values, architecture needs " + std::to_string(parameter_count()));
  }
  std::size_t pos = 0;
  for (auto& layer : layers) {
    for (double& v : layer.weight.storage()) v = values[pos++];
    for (double& v : layer.bias.storage()) v = values[pos++];
  }
}

namespace {

SdfModel allocate(const Architecture& arch) {
  arch.validate();
  SdfModel m;
  m.arch = arch;
  for (std::size_t l = 0; l < arch.layer_count; ++l) {
    m.layers.push_back(
        {Tensor({arch.input_dim(l), arch.output_dim(l)}), Tensor({arch.output_dim(l)})});
  }
  return m;
}

void fill_normal(Tensor& t, std::mt19937_64& rng, double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  for (double& v : t.storage()) v = dist(rng);
}

}  // namespace

SdfModel init_geometric(const Architecture& arch, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ParameterError("geometric init radius must be positive");
  SdfModel m = allocate(arch);
  m.init = {InitScheme::geometric, radius, seed};
  std::mt19937_64 rng(seed);
  const std::size_t last = arch.layer_count - 1;
  for (std::size_t l = 0; l < arch.layer_count; ++l) {
    auto& layer = m.layers[l];
    if (l == last) {
      const double mu = std::sqrt(std::numbers::pi) / std::sqrt(static_cast<double>(arch.input_dim(l)));
      fill_normal(layer.weight, rng, mu, 1e-4);
      for (double& b : layer.bias.storage()) b = -radius;
    } else {
      fill_normal(layer.weight, rng, 0.0, std::sqrt(2.0 / static_cast<double>(arch.hidden_width)));
    }
  }
  return m;
}

SdfModel init_standard(const Architecture& arch, std::uint64_t seed) {
  SdfModel m = allocate(arch);
  m.init = {InitScheme::standard, 0.0, seed};
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < arch.layer_count; ++l) {
    fill_normal(m.layers[l].weight, rng, 0.0,
                std::sqrt(2.0 / static_cast<double>(arch.input_dim(l))));
  }
  return m;
}

BoundModel bind_parameters(const SdfModel& model, ad::Tape& tape, bool trainable) {
  BoundModel b;
  for (const auto& layer : model.layers) {
    b.weights.push_back(trainable ? tape.leaf(layer.weight) : tape.constant(layer.weight));
    b.biases.push_back(trainable ? tape.leaf(layer.bias) : tape.constant(layer.bias));
  }
  return b;
}

namespace {

struct ForwardTrace {
  ad::Var output;                    // n x 1
  std::vector<ad::Var> pre_activation;  // z_l for every layer
};

ForwardTrace forward_trace(const SdfModel& model, const BoundModel& params, ad::Var points) {
  const Tensor& x = points.value();
  if (x.rank() != 2 || x.cols() != 3) {
    throw DimensionError("sdf_forward expects n x 3 points, got " + shape_string(x.shape()));
  }
  ForwardTrace trace;
  ad::Var h = points;
  const std::size_t n_layers = model.arch.layer_count;
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (l == model.arch.skip_layer) h = ad::scale(ad::concat_cols(h, points), kSkipScale);
    ad::Var z = ad::affine(h, params.weights[l], params.biases[l]);
    trace.pre_activation.push_back(z);
    h = l + 1 < n_layers ? ad::relu(z) : z;
  }
  trace.output = h;
  return trace;
}

}  // namespace

ad::Var sdf_forward(const SdfModel& model, const BoundModel& params, ad::Var points) {
  ad::Var out = forward_trace(model, params, points).output;
  return ad::reshape(out, {out.value().rows()});
}

SdfWithGradient sdf_forward_with_gradient(const SdfModel& model, const BoundModel& params,
                                          ad::Var points) {
  ForwardTrace trace = forward_trace(model, params, points);
  ad::Tape& tape = *points.tape;
  const std::size_t n = points.value().rows();
  const std::size_t width = model.arch.hidden_width;

  // delta = d f / d z_l, walked from the output layer back to the input
  ad::Var delta = tape.constant(Tensor({n, 1}, 1.0));
  ad::Var grad_x{};
  bool have_skip_term = false;
  for (std::size_t l = model.arch.layer_count; l-- > 0;) {
    ad::Var upstream = ad::matmul_nt(delta, params.weights[l]);  // d f / d (layer input)
    if (l == model.arch.skip_layer) {
      ad::Var hidden_part = ad::scale(ad::slice_cols(upstream, 0, width), kSkipScale);
      grad_x = ad::scale(ad::slice_cols(upstream, width, 3), kSkipScale);
      have_skip_term = true;
      upstream = hidden_part;
    }
    if (l == 0) {
      grad_x = have_skip_term ? ad::add(upstream, grad_x) : upstream;
      break;
    }
    const Tensor mask = ad::positive_mask(trace.pre_activation[l - 1].value());
    delta = ad::mul(upstream, tape.constant(mask));
  }
  ad::Var value = ad::reshape(trace.output, {n});
  return {value, grad_x};
}

Tensor spatial_gradient(const SdfModel& model, const Tensor& points) {
  ad::Tape tape;
  BoundModel params = bind_parameters(model, tape, false);
  ad::Var x = tape.leaf(points);
  ad::Var f = sdf_forward(model, params, x);
  auto grads = tape.backward(f, Tensor(f.value().shape(), 1.0));
  return grads.at(x);
}

std::vector<double> evaluate(const SdfModel& model, std::span<const Vec3> points) {
  constexpr std::size_t kBatch = 4096;
  const auto& arch = model.arch;
  std::vector<double> out(points.size());
  std::vector<double> input, hidden, next, skip;
  for (std::size_t start = 0; start < points.size(); start += kBatch) {
    const std::size_t n = std::min(kBatch, points.size() - start);
    input.assign(n * 3, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 3; ++c) input[i * 3 + c] = points[start + i][c];
    hidden = input;
    std::size_t width = 3;
    for (std::size_t l = 0; l < arch.layer_count; ++l) {
      if (l == arch.skip_layer) {
        skip.assign(n * (width + 3), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t c = 0; c < width; ++c)
            skip[i * (width + 3) + c] = hidden[i * width + c] * kSkipScale;
          for (std::size_t c = 0; c < 3; ++c)
            skip[i * (width + 3) + width + c] = input[i * 3 + c] * kSkipScale;
        }
        hidden.swap(skip);
        width += 3;
      }
      const std::size_t dout = arch.output_dim(l);
      next.assign(n * dout, 0.0);
      kernels::affine(hidden, model.layers[l].weight.values(), model.layers[l].bias.values(), next,
                      n, width, dout);
      if (l + 1 < arch.layer_count)
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      hidden.swap(next);
      width = dout;
    }
    for (std::size_t i = 0; i < n; ++i) out[start + i] = hidden[i];
  }
  return out;
}

double evaluate(const SdfModel& model, const Vec3& point) {
  return evaluate(model, std::span<const Vec3>(&point, 1))[0];
}

}  // namespace toposdf
