#include "toposdf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "toposdf/errors.hpp"
#include "toposdf/kernels.hpp"

namespace toposdf::ad {

namespace {

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw LookupError("variable is not attached to a tape");
  return *a.tape;
}

Tape& common_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ConsistencyError("variables belong to different tapes");
  return tape_of(a);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_matrix(const char* op, const Tensor& t) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

Var unary(Op op, Var x, Tensor value, double scalar = 0.0) {
  TapeNode n;
  n.op = op;
  n.inputs = {x.id};
  n.value = std::move(value);
  n.scalar = scalar;
  return tape_of(x).push(std::move(n));
}

Var binary(Op op, Var a, Var b, Tensor value) {
  TapeNode n;
  n.op = op;
  n.inputs = {a.id, b.id};
  n.value = std::move(value);
  return common_tape(a, b).push(std::move(n));
}

void accumulate(Tensor& into, const Tensor& delta) {
  auto dst = into.values();
  auto src = delta.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

const Tensor& Var::value() const { return tape_of(*this).node(id).value; }

const Tensor& GradientMap::at(std::size_t id) const {
  if (id >= adjoints_.size()) {
    throw LookupError("no gradient for unknown node id " + std::to_string(id));
  }
  return adjoints_[id];
}

Var Tape::leaf(Tensor value) {
  TapeNode n;
  n.op = Op::leaf;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  TapeNode n;
  n.op = Op::constant;
  n.value = std::move(value);
  n.requires_grad = false;
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Tape::push(TapeNode n) {
  for (std::size_t in : n.inputs) {
    if (in >= nodes_.size()) throw LookupError("unknown input node " + std::to_string(in));
    n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  }
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

const TapeNode& Tape::node(std::size_t id) const {
  if (id >= nodes_.size()) throw LookupError("unknown node id " + std::to_string(id));
  return nodes_[id];
}

void Tape::inject_external_gradient(Var target, std::span<const SparseEntry> entries) {
  const TapeNode& n = node(target.id);
  for (const auto& e : entries) {
    if (e.index >= n.value.size()) {
      throw IndexError("injected index " + std::to_string(e.index) + " out of range for node " +
                       std::to_string(target.id) + " of size " +
                       std::to_string(n.value.size()));
    }
  }
  for (const auto& e : entries) injections_.push_back({target.id, e.index, e.value});
}

GradientMap Tape::backward(Var seed_node, const Tensor& seed) const {
  const TapeNode& n = node(seed_node.id);
  if (!n.value.same_shape(seed)) {
    throw DimensionError("seed gradient shape " + shape_string(seed.shape()) +
                         " does not match node shape " + shape_string(n.value.shape()));
  }
  std::size_t start = seed_node.id;
  for (const auto& inj : injections_) start = std::max(start, inj.node);
  return run_backward(start, &seed, seed_node.id);
}

GradientMap Tape::backward_injected() const {
  std::size_t start = 0;
  for (const auto& inj : injections_) start = std::max(start, inj.node);
  return run_backward(start, nullptr, 0);
}

GradientMap Tape::run_backward(std::size_t start, const Tensor* seed, std::size_t seed_id) const {
  std::vector<Tensor> adj(nodes_.size());
  auto touch = [&](std::size_t id) -> Tensor& {
    if (adj[id].size() != nodes_[id].value.size() || adj[id].shape() != nodes_[id].value.shape())
      adj[id] = Tensor(nodes_[id].value.shape(), 0.0);
    return adj[id];
  };
  std::vector<char> live(nodes_.size(), 0);
  if (seed != nullptr) {
    accumulate(touch(seed_id), *seed);
    live[seed_id] = 1;
  }
  for (const auto& inj : injections_) {
    touch(inj.node)[inj.index] += inj.value;
    live[inj.node] = 1;
  }

  if (!nodes_.empty()) {
    for (std::size_t id = std::min(start, nodes_.size() - 1) + 1; id-- > 0;) {
      if (!live[id]) continue;
      const TapeNode& n = nodes_[id];
      if (!n.requires_grad || n.inputs.empty()) continue;
      const Tensor& g = adj[id];
      auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };
      auto grad_of = [&](std::size_t k) -> Tensor& {
        live[n.inputs[k]] = 1;
        return touch(n.inputs[k]);
      };
      const Tensor& x = nodes_[n.inputs[0]].value;

      switch (n.op) {
        case Op::leaf:
        case Op::constant:
          break;
        case Op::affine: {
          const Tensor& w = nodes_[n.inputs[1]].value;
          const std::size_t rows = x.rows(), din = w.rows(), dout = w.cols();
          if (wants(0)) {
            Tensor d({rows, din});
            kernels::matmul_nt(g.values(), w.values(), d.values(), rows, din, dout);
            accumulate(grad_of(0), d);
          }
          if (wants(1)) {
            Tensor d({din, dout});
            kernels::matmul_tn(x.values(), g.values(), d.values(), rows, din, dout);
            accumulate(grad_of(1), d);
          }
          if (wants(2)) {
            Tensor d({dout});
            kernels::column_sums(g.values(), d.values(), rows, dout);
            accumulate(grad_of(2), d);
          }
          break;
        }
        case Op::matmul_nt: {
          // out = x * w^T with x: rows x dout, w: din x dout
          const Tensor& w = nodes_[n.inputs[1]].value;
          const std::size_t rows = x.rows(), din = w.rows(), dout = w.cols();
          if (wants(0)) {
            Tensor d({rows, dout});
            const std::vector<double> zero(dout, 0.0);
            kernels::affine(g.values(), w.values(), zero, d.values(), rows, din, dout);
            accumulate(grad_of(0), d);
          }
          if (wants(1)) {
            Tensor d({din, dout});
            kernels::matmul_tn(g.values(), x.values(), d.values(), rows, din, dout);
            accumulate(grad_of(1), d);
          }
          break;
        }
        case Op::relu: {
          Tensor& d = grad_of(0);
          for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > 0.0) d[i] += g[i];
          break;
        }
        case Op::add: {
          if (wants(0)) accumulate(grad_of(0), g);
          if (wants(1)) accumulate(grad_of(1), g);
          break;
        }
        case Op::sub: {
          if (wants(0)) accumulate(grad_of(0), g);
          if (wants(1)) {
            Tensor& d = grad_of(1);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
          }
          break;
        }
        case Op::mul: {
          const Tensor& y = nodes_[n.inputs[1]].value;
          if (wants(0)) {
            Tensor& d = grad_of(0);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i];
          }
          if (wants(1)) {
            Tensor& d = grad_of(1);
            for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * x[i];
          }
          break;
        }
        case Op::scale: {
          Tensor& d = grad_of(0);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * n.scalar;
          break;
        }
        case Op::square: {
          Tensor& d = grad_of(0);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += 2.0 * x[i] * g[i];
          break;
        }
        case Op::sum: {
          Tensor& d = grad_of(0);
          const double s = g[0];
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += s;
          break;
        }
        case Op::mean: {
          Tensor& d = grad_of(0);
          const double s = g[0] / static_cast<double>(d.size());
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += s;
          break;
        }
        case Op::abs: {
          Tensor& d = grad_of(0);
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double sgn = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
            d[i] += sgn * g[i];
          }
          break;
        }
        case Op::row_norm: {
          Tensor& d = grad_of(0);
          const std::size_t cols = x.cols();
          for (std::size_t r = 0; r < x.rows(); ++r) {
            const double s = g[r] / n.value[r];
            for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += s * x[r * cols + c];
          }
          break;
        }
        case Op::gather_rows: {
          Tensor& d = grad_of(0);
          const std::size_t cols = x.cols();
          for (std::size_t r = 0; r < n.indices.size(); ++r) {
            const std::size_t src = n.indices[r];
            for (std::size_t c = 0; c < cols; ++c) d[src * cols + c] += g[r * cols + c];
          }
          break;
        }
        case Op::concat_cols: {
          const Tensor& y = nodes_[n.inputs[1]].value;
          const std::size_t ca = x.cols(), cb = y.cols(), cw = ca + cb;
          if (wants(0)) {
            Tensor& d = grad_of(0);
            for (std::size_t r = 0; r < x.rows(); ++r)
              for (std::size_t c = 0; c < ca; ++c) d[r * ca + c] += g[r * cw + c];
          }
          if (wants(1)) {
            Tensor& d = grad_of(1);
            for (std::size_t r = 0; r < y.rows(); ++r)
              for (std::size_t c = 0; c < cb; ++c) d[r * cb + c] += g[r * cw + ca + c];
          }
          break;
        }
        case Op::slice_cols: {
          Tensor& d = grad_of(0);
          const std::size_t start_col = static_cast<std::size_t>(n.scalar);
          const std::size_t cx = x.cols(), cs = n.value.cols();
          for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < cs; ++c) d[r * cx + start_col + c] += g[r * cs + c];
          break;
        }
        case Op::scale_rows: {
          const Tensor& s = nodes_[n.inputs[1]].value;
          const std::size_t cols = x.cols();
          if (wants(0)) {
            Tensor& d = grad_of(0);
            for (std::size_t r = 0; r < x.rows(); ++r)
              for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += g[r * cols + c] * s[r];
          }
          if (wants(1)) {
            Tensor& d = grad_of(1);
            for (std::size_t r = 0; r < x.rows(); ++r) {
              double acc = 0.0;
              for (std::size_t c = 0; c < cols; ++c) acc += g[r * cols + c] * x[r * cols + c];
              d[r] += acc;
            }
          }
          break;
        }
        case Op::reciprocal: {
          Tensor& d = grad_of(0);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i] / (x[i] * x[i]);
          break;
        }
        case Op::reshape: {
          Tensor& d = grad_of(0);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
          break;
        }
      }
    }
  }

  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (adj[id].shape() != nodes_[id].value.shape() || adj[id].size() != nodes_[id].value.size())
      adj[id] = Tensor(nodes_[id].value.shape(), 0.0);
  }
  return GradientMap(std::move(adj));
}

GradientMap backward(Tape& tape, Var seed_node, const Tensor& seed) {
  return tape.backward(seed_node, seed);
}

void inject_external_gradient(Tape& tape, Var target, std::span<const SparseEntry> entries) {
  tape.inject_external_gradient(target, entries);
}

Var affine(Var input, Var weight, Var bias) {
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows() || b.rank() != 1 ||
      b.size() != w.cols()) {
    throw DimensionError("affine: input " + shape_string(x.shape()) + " incompatible with weight " +
                         shape_string(w.shape()) + " and bias " + shape_string(b.shape()));
  }
  Tensor out({x.rows(), w.cols()});
  kernels::affine(x.values(), w.values(), b.values(), out.values(), x.rows(), w.rows(), w.cols());
  TapeNode n;
  n.op = Op::affine;
  n.inputs = {input.id, weight.id, bias.id};
  n.value = std::move(out);
  common_tape(input, weight);
  return common_tape(input, bias).push(std::move(n));
}

Var matmul_nt(Var input, Var weight) {
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.cols()) {
    throw DimensionError("matmul_nt: input " + shape_string(x.shape()) +
                         " incompatible with weight " + shape_string(w.shape()));
  }
  Tensor out({x.rows(), w.rows()});
  kernels::matmul_nt(x.values(), w.values(), out.values(), x.rows(), w.rows(), w.cols());
  return binary(Op::matmul_nt, input, weight, std::move(out));
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.storage()) v = v > 0.0 ? v : 0.0;
  return unary(Op::relu, x, std::move(out));
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return binary(Op::add, a, b, std::move(out));
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  return binary(Op::sub, a, b, std::move(out));
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  return binary(Op::mul, a, b, std::move(out));
}

Var scale(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.storage()) v *= c;
  return unary(Op::scale, x, std::move(out), c);
}

Var square(Var x) {
  Tensor out = x.value();
  for (double& v : out.storage()) v = v * v;
  return unary(Op::square, x, std::move(out));
}

Var sum(Var x) {
  double acc = 0.0;
  for (double v : x.value().values()) acc += v;
  return unary(Op::sum, x, Tensor::scalar(acc));
}

Var mean(Var x) {
  const Tensor& t = x.value();
  if (t.size() == 0) throw DimensionError("mean of empty tensor");
  double acc = 0.0;
  for (double v : t.values()) acc += v;
  return unary(Op::mean, x, Tensor::scalar(acc / static_cast<double>(t.size())));
}

Var abs(Var x) {
  Tensor out = x.value();
  for (double& v : out.storage()) v = std::fabs(v);
  return unary(Op::abs, x, std::move(out));
}

Var l2_norm_rows(Var x) {
  const Tensor& t = x.value();
  require_matrix("l2_norm_rows", t);
  Tensor out({t.rows()});
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) acc += t.at(r, c) * t.at(r, c);
    const double norm = std::sqrt(acc);
    if (norm < 1e-12) {
      throw DegenerateDirectionError("l2_norm_rows: row " + std::to_string(r) +
                                     " has vanishing norm");
    }
    out[r] = norm;
  }
  return unary(Op::row_norm, x, std::move(out));
}

Var gather_rows(Var x, std::vector<std::size_t> rows) {
  const Tensor& t = x.value();
  const std::size_t cols = t.cols();
  std::vector<std::size_t> shape = t.shape();
  if (shape.empty()) throw DimensionError("gather_rows on a scalar");
  shape[0] = rows.size();
  Tensor out(shape);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= t.rows()) {
      throw IndexError("gather_rows: row " + std::to_string(rows[r]) + " out of range " +
                       std::to_string(t.rows()));
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = t[rows[r] * cols + c];
  }
  TapeNode n;
  n.op = Op::gather_rows;
  n.inputs = {x.id};
  n.value = std::move(out);
  n.indices = std::move(rows);
  return tape_of(x).push(std::move(n));
}

Var concat_cols(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_matrix("concat_cols", x);
  require_matrix("concat_cols", y);
  if (x.rows() != y.rows()) {
    throw DimensionError("concat_cols: row mismatch " + shape_string(x.shape()) + " vs " +
                         shape_string(y.shape()));
  }
  const std::size_t ca = x.cols(), cb = y.cols();
  Tensor out({x.rows(), ca + cb});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < ca; ++c) out[r * (ca + cb) + c] = x[r * ca + c];
    for (std::size_t c = 0; c < cb; ++c) out[r * (ca + cb) + ca + c] = y[r * cb + c];
  }
  return binary(Op::concat_cols, a, b, std::move(out));
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
  const Tensor& t = x.value();
  require_matrix("slice_cols", t);
  if (start + count > t.cols()) {
    throw IndexError("slice_cols: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of range for " +
                     shape_string(t.shape()));
  }
  Tensor out({t.rows(), count});
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out[r * count + c] = t.at(r, start + c);
  return unary(Op::slice_cols, x, std::move(out), static_cast<double>(start));
}

Var scale_rows(Var x, Var s) {
  const Tensor& t = x.value();
  const Tensor& f = s.value();
  if (t.rank() == 0 || f.size() != t.rows()) {
    throw DimensionError("scale_rows: " + shape_string(t.shape()) + " cannot be scaled by " +
                         shape_string(f.shape()));
  }
  Tensor out = t;
  const std::size_t cols = t.cols();
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= f[r];
  return binary(Op::scale_rows, x, s, std::move(out));
}

Var reciprocal(Var x) {
  Tensor out = x.value();
  for (double& v : out.storage()) v = 1.0 / v;
  return unary(Op::reciprocal, x, std::move(out));
}

Var reshape(Var x, std::vector<std::size_t> shape) {
  const Tensor& t = x.value();
  if (shape_product(shape) != t.size()) {
    throw DimensionError("reshape: " + shape_string(t.shape()) + " to " + shape_string(shape));
  }
  return unary(Op::reshape, x, Tensor(std::move(shape), t.storage()));
}

Tensor positive_mask(const Tensor& x) {
  Tensor m(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) m[i] = x[i] > 0.0 ? 1.0 : 0.0;
  return m;
}

}  // namespace toposdf::ad
