#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "toposdf/cubical.hpp"
#include "toposdf/losses.hpp"
#include "toposdf/pointcloud.hpp"
#include "toposdf/sdf_model.hpp"

namespace toposdf {

enum class OptimizerKind { adam, sgd_robbins_monro };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view s);

struct TrainConfig {
  Architecture arch;
  InitScheme init = InitScheme::geometric;
  double init_radius = 0.5;

  std::size_t iterations = 40000;
  std::size_t batch_points = 20000;
  std::size_t batch_queries = 4096;
  std::size_t sigma_k = 50;

  OptimizerKind optimizer = OptimizerKind::adam;
  double base_lr = 0.001;
  std::size_t warmup_iters = 1000;
  double sgd_noise_std = 0.0;  // std of the injected gradient noise (sgd mode)

  TopoConfig topo;
  LossWeights weights{0.5, 5.0, 39500};
  std::size_t snapshot_every = 0;  // keep every n-th diagram during topo iterations

  std::uint64_t seed = 0;

  void validate() const;

  /// 4 x 64 network, 5000 iterations, topology on an 8^3 grid during the
  /// last 500 iterations. Runs in well under a minute on one core.
  static TrainConfig desk_preset();
};

struct IterationRecord {
  std::size_t iter = 0;
  double pull = 0.0;
  double significant = 0.0;
  double noise = 0.0;
  double total = 0.0;
  double lr = 0.0;
  std::size_t dropped = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct TrainHistory {
  std::vector<IterationRecord> records;
  std::vector<std::pair<std::size_t, PersistenceDiagram>> snapshots;
};

double lr_schedule(const TrainConfig& config, std::size_t iter);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 double lr);
void adam_step(SdfModel& model, std::span<const double> grads, AdamState& state, double lr);

// theta -= lr * (grad + zeta), zeta ~ N(0, noise_std^2) per coordinate
void sgd_update(std::span<double> params, std::span<const double> grads, double lr,
                double noise_std, std::mt19937_64& rng);
void sgd_step(SdfModel& model, std::span<const double> grads, double lr, double noise_std,
              std::mt19937_64& rng);

/// Flattened parameter gradient in checkpoint order.
std::vector<double> flatten_gradients(const ad::GradientMap& grads, const BoundModel& params);

using IterationCallback = std::function<void(const IterationRecord&)>;

std::pair<SdfModel, TrainHistory> train(const PointCloud& cloud, const TrainConfig& config,
                                        const IterationCallback& on_iteration = {});

struct ConvergenceReport {
  double slope = 0.0;
  bool converged = false;
};

inline constexpr double kConvergenceSlopeTolerance = 1e-6;

/// Least-squares slope of the total loss over the trailing window.
ConvergenceReport convergence_report(const TrainHistory& history, std::size_t window = 500);

}  // namespace toposdf
