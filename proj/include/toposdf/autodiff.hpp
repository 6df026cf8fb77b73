#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "toposdf/tensor.hpp"

// Minimal reverse-mode automatic differentiation over dense tensors.
//
// A Tape records every operation in creation order, so node ids are already a
// topological order and backward() simply walks them in reverse. There is no
// broadcasting: elementwise operations require identical shapes.
namespace toposdf::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const std::vector<std::size_t>& shape() const { return value().shape(); }
};

enum class Op {
  leaf,
  constant,
  affine,
  matmul_nt,
  relu,
  add,
  sub,
  mul,
  scale,
  square,
  sum,
  mean,
  abs,
  row_norm,
  gather_rows,
  concat_cols,
  slice_cols,
  scale_rows,
  reciprocal,
  reshape,
};

struct TapeNode {
  Op op = Op::leaf;
  std::vector<std::size_t> inputs;
  Tensor value;
  bool requires_grad = false;
  double scalar = 0.0;                 // scale factor, slice start
  std::vector<std::size_t> indices;    // gather_rows
};

/// Adjoint of every node reached by one backward() call; unreached nodes
/// hold zeros of their value shape.
class GradientMap {
 public:
  explicit GradientMap(std::vector<Tensor> adjoints) : adjoints_(std::move(adjoints)) {}
  const Tensor& at(Var v) const { return at(v.id); }
  const Tensor& at(std::size_t id) const;
  std::size_t size() const { return adjoints_.size(); }

 private:
  std::vector<Tensor> adjoints_;
};

struct SparseEntry {
  std::size_t index;
  double value;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var leaf(Tensor value);
  Var constant(Tensor value);

  const TapeNode& node(std::size_t id) const;
  std::size_t size() const { return nodes_.size(); }

  /// Queue a sparse adjoint contribution for `target`; it is added on every
  /// subsequent backward() before traversal passes that node.
  void inject_external_gradient(Var target, std::span<const SparseEntry> entries);
  void clear_injections() { injections_.clear(); }

  GradientMap backward(Var seed_node, const Tensor& seed) const;
  // Backward driven purely by injected gradients.
  GradientMap backward_injected() const;

  Var push(TapeNode n);

 private:
  GradientMap run_backward(std::size_t start, const Tensor* seed, std::size_t seed_id) const;

  std::vector<TapeNode> nodes_;
  struct Injection {
    std::size_t node;
    std::size_t index;
    double value;
  };
  std::vector<Injection> injections_;
};

GradientMap backward(Tape& tape, Var seed_node, const Tensor& seed);
void inject_external_gradient(Tape& tape, Var target, std::span<const SparseEntry> entries);

Var affine(Var input, Var weight, Var bias);
// input (n x dout) times weight (din x dout) transposed -> n x din
Var matmul_nt(Var input, Var weight);
Var relu(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double c);
Var square(Var x);
Var sum(Var x);
Var mean(Var x);
Var abs(Var x);
Var l2_norm_rows(Var x);
Var gather_rows(Var x, std::vector<std::size_t> rows);
Var concat_cols(Var a, Var b);
Var slice_cols(Var x, std::size_t start, std::size_t count);
// out[i,j] = x[i,j] * s[i]; s has one element per row of x
Var scale_rows(Var x, Var s);
Var reciprocal(Var x);
Var reshape(Var x, std::vector<std::size_t> shape);

// Constant 0/1 mask of x > 0, for building derivative chains on the tape.
Tensor positive_mask(const Tensor& x);

}  // namespace toposdf::ad
