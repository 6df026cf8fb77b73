#include "toposdf/trainer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "toposdf/errors.hpp"

namespace toposdf {

std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::adam ? "adam" : "sgd_robbins_monro";
}

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd_robbins_monro" || s == "sgd") return OptimizerKind::sgd_robbins_monro;
  throw ParameterError("unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  arch.validate();
  if (iterations == 0) throw ParameterError("iterations must be positive");
  if (optimizer == OptimizerKind::adam && iterations <= warmup_iters) {
    throw ParameterError("iterations (" + std::to_string(iterations) +
                         ") must exceed warmup_iters (" + std::to_string(warmup_iters) + ")");
  }
  if (batch_queries == 0) throw ParameterError("batch_queries must be at least 1");
  if (batch_points == 0) throw ParameterError("batch_points must be at least 1");
  if (weights.curriculum_start_iter > iterations) {
    throw ParameterError("curriculum_start_iter exceeds iterations");
  }
  if (weights.lambda1 < 0.0 || weights.lambda2 < 0.0) {
    throw ParameterError("loss weights must be non-negative");
  }
  if (!(base_lr >= 0.0)) throw ParameterError("base_lr must be non-negative");
  if (!(sgd_noise_std >= 0.0)) throw ParameterError("sgd_noise_std must be non-negative");
  if (topo.grid_resolution < 2) throw ParameterError("topology grid resolution must be >= 2");
  if (init == InitScheme::geometric && !(init_radius > 0.0)) {
    throw ParameterError("init_radius must be positive");
  }
}

TrainConfig TrainConfig::desk_preset() {
  TrainConfig c;
  c.arch = Architecture::with_default_skip(4, 64);
  c.iterations = 5000;
  c.batch_points = 20000;
  c.batch_queries = 512;
  c.topo.grid_resolution = 8;
  c.weights.curriculum_start_iter = c.iterations - 500;
  return c;
}

double lr_schedule(const TrainConfig& config, std::size_t iter) {
  if (config.optimizer == OptimizerKind::sgd_robbins_monro) {
    return config.base_lr / (1.0 + static_cast<double>(iter));
  }
  if (iter < config.warmup_iters) return config.base_lr;
  const double span = static_cast<double>(config.iterations - config.warmup_iters);
  const double t = static_cast<double>(iter - config.warmup_iters) / span;
  return config.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 double lr) {
  if (grads.size() != params.size()) {
    throw DimensionError("adam: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params.size()) + " parameters");
  }
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam state does not match the parameter count");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void adam_step(SdfModel& model, std::span<const double> grads, AdamState& state, double lr) {
  std::vector<double> theta = model.flatten();
  adam_update(theta, grads, state, lr);
  model.unflatten(theta);
}

void sgd_update(std::span<double> params, std::span<const double> grads, double lr,
                double noise_std, std::mt19937_64& rng) {
  if (grads.size() != params.size()) {
    throw DimensionError("sgd: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params.size()) + " parameters");
  }
  if (noise_std > 0.0) {
    std::normal_distribution<double> zeta(0.0, noise_std);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * (grads[i] + zeta(rng));
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
  }
}

void sgd_step(SdfModel& model, std::span<const double> grads, double lr, double noise_std,
              std::mt19937_64& rng) {
  std::vector<double> theta = model.flatten();
  sgd_update(theta, grads, lr, noise_std, rng);
  model.unflatten(theta);
}

std::vector<double> flatten_gradients(const ad::GradientMap& grads, const BoundModel& params) {
  std::vector<double> out;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto w = grads.at(params.weights[l]).values();
    const auto b = grads.at(params.biases[l]).values();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

namespace {

std::vector<std::size_t> subsample(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

std::pair<SdfModel, TrainHistory> train(const PointCloud& cloud, const TrainConfig& config,
                                        const IterationCallback& on_iteration) {
  config.validate();
  if (cloud.size() < 2) throw DegenerateInputError("training needs at least 2 points");

  SdfModel model = config.init == InitScheme::geometric
                       ? init_geometric(config.arch, config.init_radius, config.seed)
                       : init_standard(config.arch, config.seed);
  const KnnIndex index = build_index(cloud);
  const std::vector<double> sigmas = per_point_sigma(index, cloud, config.sigma_k);

  std::mt19937_64 rng(config.seed);
  std::mt19937_64 noise_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState adam;
  TrainHistory history;
  history.records.reserve(config.iterations);

  for (std::size_t it = 0; it < config.iterations; ++it) {
    std::vector<std::size_t> pool;
    if (cloud.size() > config.batch_points) pool = subsample(cloud.size(), config.batch_points, rng);
    const QueryBatch batch = sample_queries(cloud, sigmas, config.batch_queries, rng, pool);

    ad::Tape tape;
    const BoundModel params = bind_parameters(model, tape);
    const UnifiedLoss loss =
        unified_loss(model, params, cloud, index, batch, config.topo, config.weights, it, tape);
    if (!std::isfinite(loss.total)) {
      std::ostringstream msg;
      msg << "non-finite loss at iteration " << it << ": pull=" << loss.pull
          << " significant=" << loss.significant << " noise=" << loss.noise
          << " total=" << loss.total;
      throw NumericalError(msg.str());
    }
    const ad::GradientMap grads = tape.backward(loss.pull_node, Tensor::scalar(1.0));
    const std::vector<double> flat = flatten_gradients(grads, params);
    for (double g : flat) {
      if (!std::isfinite(g)) {
        throw NumericalError("non-finite gradient at iteration " + std::to_string(it));
      }
    }

    const double lr = lr_schedule(config, it);
    if (config.optimizer == OptimizerKind::adam) {
      adam_step(model, flat, adam, lr);
    } else {
      sgd_step(model, flat, lr, config.sgd_noise_std, noise_rng);
    }

    IterationRecord rec{it, loss.pull, loss.significant, loss.noise, loss.total, lr, loss.dropped};
    history.records.push_back(rec);
    if (loss.diagram && config.snapshot_every > 0 && it % config.snapshot_every == 0) {
      history.snapshots.emplace_back(it, *loss.diagram);
    }
    if (on_iteration) on_iteration(rec);
  }
  return {std::move(model), std::move(history)};
}

ConvergenceReport convergence_report(const TrainHistory& history, std::size_t window) {
  if (window < 2 || history.records.size() < 2 * window) {
    throw ParameterError("convergence report needs at least " + std::to_string(2 * window) +
                         " iterations, history has " + std::to_string(history.records.size()));
  }
  const std::size_t start = history.records.size() - window;
  const double n = static_cast<double>(window);
  const double x_mean = (n - 1.0) / 2.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < window; ++i) y_mean += history.records[start + i].total;
  y_mean /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (history.records[start + i].total - y_mean);
    sxx += dx * dx;
  }
  ConvergenceReport r;
  r.slope = sxy / sxx;
  r.converged = r.slope <= kConvergenceSlopeTolerance;
  return r;
}

}  // namespace toposdf
