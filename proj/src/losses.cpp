#include "toposdf/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "toposdf/errors.hpp"

namespace toposdf {

std::string_view to_string(PartitionRule r) {
  return r == PartitionRule::top_k ? "top_k" : "persistence_threshold";
}

std::string_view to_string(BirthTermSet b) {
  return b == BirthTermSet::noise ? "noise" : "significant";
}

PartitionRule partition_rule_from_string(std::string_view s) {
  if (s == "top_k") return PartitionRule::top_k;
  if (s == "persistence_threshold" || s == "threshold") return PartitionRule::threshold;
  throw ParameterError("unknown partition rule '" + std::string(s) + "'");
}

BirthTermSet birth_term_set_from_string(std::string_view s) {
  if (s == "noise") return BirthTermSet::noise;
  if (s == "significant") return BirthTermSet::significant;
  throw ParameterError("unknown birth term set '" + std::string(s) + "'");
}

PullResult pulled_location(const SdfModel& model, const BoundModel& params, const Tensor& queries,
                           ad::Tape& tape) {
  if (queries.rank() != 2 || queries.cols() != 3) {
    throw DimensionError("queries must be n x 3, got " + shape_string(queries.shape()));
  }
  if (!queries.all_finite()) throw NumericalError("queries contain non-finite coordinates");
  ad::Var q = tape.constant(queries);
  SdfWithGradient fg = sdf_forward_with_gradient(model, params, q);

  PullResult out;
  const Tensor& grad = fg.gradient.value();
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    const double n2 = grad.at(r, 0) * grad.at(r, 0) + grad.at(r, 1) * grad.at(r, 1) +
                      grad.at(r, 2) * grad.at(r, 2);
    if (std::sqrt(n2) < 1e-12) {
      ++out.dropped;
    } else {
      out.kept.push_back(r);
    }
  }
  if (out.kept.empty()) {
    throw DegenerateDirectionError("every query in the batch has a vanishing SDF gradient");
  }
  ad::Var f = fg.value;
  ad::Var g = fg.gradient;
  if (out.dropped > 0) {
    f = ad::gather_rows(f, out.kept);
    g = ad::gather_rows(g, out.kept);
    q = ad::gather_rows(q, out.kept);
  }
  ad::Var direction = ad::scale_rows(g, ad::reciprocal(ad::l2_norm_rows(g)));
  out.pulled = ad::sub(q, ad::scale_rows(direction, f));
  return out;
}

ad::Var pull_loss(ad::Var pulled, const Tensor& targets) {
  const Tensor& p = pulled.value();
  if (!p.same_shape(targets)) {
    throw DimensionError("pull_loss: pulled " + shape_string(p.shape()) + " vs targets " +
                         shape_string(targets.shape()));
  }
  if (p.rows() == 0) throw DegenerateInputError("pull_loss on an empty batch");
  ad::Var diff = ad::sub(pulled, pulled.tape->constant(targets));
  return ad::scale(ad::sum(ad::square(diff)), 1.0 / static_cast<double>(p.rows()));
}

FeaturePartition partition_features(const PersistenceDiagram& diagram,
                                    const PartitionConfig& config) {
  if (diagram.pairs.empty()) throw ParameterError("cannot partition an empty diagram");
  FeaturePartition part;
  part.config = config;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < diagram.pairs.size(); ++i)
    if (config.include_essential || !diagram.pairs[i].essential) candidates.push_back(i);

  if (config.rule == PartitionRule::top_k) {
    const auto& pairs = diagram.pairs;
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      const double pa = pairs[a].persistence(), pb = pairs[b].persistence();
      if (pa != pb) return pa > pb;
      return pairs[a].birth_vertex < pairs[b].birth_vertex;
    });
    const std::size_t k = std::min(config.k, candidates.size());
    part.significant.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
    part.noise.assign(candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());
  } else {
    for (std::size_t i : candidates) {
      (diagram.pairs[i].persistence() >= config.threshold ? part.significant : part.noise)
          .push_back(i);
    }
  }
  std::sort(part.significant.begin(), part.significant.end());
  std::sort(part.noise.begin(), part.noise.end());
  return part;
}

double loss_significant(const PersistenceDiagram& diagram, const FeaturePartition& partition) {
  double acc = 0.0;
  for (std::size_t i : partition.significant) acc += diagram.pairs.at(i).persistence();
  return -acc;
}

NoiseLossTerms loss_noise_terms(const PersistenceDiagram& diagram, const FeaturePartition& partition,
                                BirthTermSet birth_set) {
  NoiseLossTerms t;
  const auto& births = birth_set == BirthTermSet::noise ? partition.noise : partition.significant;
  for (std::size_t i : births) t.birth_term += diagram.pairs.at(i).birth;
  for (std::size_t i : partition.noise) t.persistence_term += diagram.pairs.at(i).persistence();
  return t;
}

double loss_noise(const PersistenceDiagram& diagram, const FeaturePartition& partition,
                  BirthTermSet birth_set) {
  return loss_noise_terms(diagram, partition, birth_set).total();
}

std::vector<ad::SparseEntry> topo_value_gradient(const PersistenceDiagram& diagram,
                                                 const FeaturePartition& partition,
                                                 const LossWeights& weights,
                                                 BirthTermSet birth_set) {
  std::vector<ad::SparseEntry> g;
  // L_S = -sum (d - b)
  for (std::size_t i : partition.significant) {
    const auto& p = diagram.pairs.at(i);
    g.push_back({p.birth_vertex, weights.lambda1});
    g.push_back({p.death_vertex, -weights.lambda1});
  }
  // L_N = sum b + sum (d - b); the birth contributions stay separate entries
  const auto& births = birth_set == BirthTermSet::noise ? partition.noise : partition.significant;
  for (std::size_t i : births) g.push_back({diagram.pairs.at(i).birth_vertex, weights.lambda2});
  for (std::size_t i : partition.noise) {
    const auto& p = diagram.pairs.at(i);
    g.push_back({p.birth_vertex, -weights.lambda2});
    g.push_back({p.death_vertex, weights.lambda2});
  }
  return g;
}

void topo_backward(const PersistenceDiagram& diagram, const FeaturePartition& partition,
                   const LossWeights& weights, BirthTermSet birth_set,
                   const GridEvaluation& evaluation, ad::Tape& tape) {
  if (diagram.grid_dims != evaluation.grid.dims) {
    throw ConsistencyError("diagram grid dimensions do not match the evaluated grid");
  }
  if (diagram.filtration != evaluation.grid.filtration) {
    throw ConsistencyError("diagram filtration '" + std::string(to_string(diagram.filtration)) +
                           "' does not match grid filtration '" +
                           std::string(to_string(evaluation.grid.filtration)) + "'");
  }
  auto entries = topo_value_gradient(diagram, partition, weights, birth_set);
  for (auto& e : entries) e.value *= evaluation.signs.at(e.index);
  tape.inject_external_gradient(evaluation.raw_node, entries);
}

UnifiedLoss unified_loss(const SdfModel& model, const BoundModel& params, const PointCloud& cloud,
                         const KnnIndex& index, const QueryBatch& queries,
                         const TopoConfig& topo, const LossWeights& weights, std::size_t iter,
                         ad::Tape& tape) {
  UnifiedLoss out;
  PullResult pr = pulled_location(model, params, Tensor::from_points(queries.queries), tape);
  Tensor targets({pr.kept.size(), 3});
  for (std::size_t r = 0; r < pr.kept.size(); ++r) {
    const Vec3 c = nearest_surface_point(index, cloud, queries.queries[pr.kept[r]]).point;
    for (int k = 0; k < 3; ++k) targets.at(r, k) = c[k];
  }
  out.pull_node = pull_loss(pr.pulled, targets);
  out.pull = out.pull_node.value().item();
  out.dropped = pr.dropped;
  out.total = out.pull;

  if (iter >= weights.curriculum_start_iter) {
    GridEvaluation ev = eval_grid(model, params, topo.grid_resolution, topo.domain, tape,
                                  topo.filtration == Filtration::absolute);
    PersistenceDiagram pd = persistence0(ev.grid);
    FeaturePartition part = partition_features(pd, topo.partition);
    out.significant = loss_significant(pd, part);
    out.noise = loss_noise(pd, part, topo.birth_term_set);
    out.total = out.pull + weights.lambda1 * out.significant + weights.lambda2 * out.noise;
    topo_backward(pd, part, weights, topo.birth_term_set, ev, tape);
    out.topo_active = true;
    out.diagram = std::move(pd);
  }
  return out;
}

}  // namespace toposdf
