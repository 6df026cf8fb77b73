#include "toposdf/tensor.hpp"

#include <cmath>
#include <numeric>

#include "toposdf/errors.hpp"

namespace toposdf {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(shape_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_product(shape_) != values_.size()) {
    throw DimensionError("tensor shape " + shape_string(shape_) + " does not match " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

Tensor Tensor::from_points(std::span<const Vec3> points) {
  std::vector<double> v;
  v.reserve(points.size() * 3);
  for (const auto& p : points) v.insert(v.end(), p.begin(), p.end());
  return Tensor({points.size(), 3}, std::move(v));
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) return 1;
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() < 2) return 1;
  return shape_[1];
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_string(shape_));
  }
  return values_[0];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<Vec3> Tensor::to_points() const {
  if (rank() != 2 || cols() != 3) {
    throw DimensionError("expected n x 3 tensor, got " + shape_string(shape_));
  }
  std::vector<Vec3> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = {at(i, 0), at(i, 1), at(i, 2)};
  return out;
}

}  // namespace toposdf
