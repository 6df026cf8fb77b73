#include <limits>

#include "toposdf/kernels.hpp"

namespace toposdf::kernels::ref {

void affine(std::span<const double> in, std::span<const double> weight,
            std::span<const double> bias, std::span<double> out, std::size_t n,
            std::size_t din, std::size_t dout) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dout; ++j) {
      double acc = bias[j];
      for (std::size_t k = 0; k < din; ++k) acc += in[i * din + k] * weight[k * dout + j];
      out[i * dout + j] = acc;
    }
  }
}

void matmul_nt(std::span<const double> dy, std::span<const double> weight,
               std::span<double> out, std::size_t n, std::size_t din, std::size_t dout) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < din; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dout; ++j) acc += dy[i * dout + j] * weight[k * dout + j];
      out[i * din + k] = acc;
    }
  }
}

void matmul_tn(std::span<const double> x, std::span<const double> dy, std::span<double> out,
               std::size_t n, std::size_t din, std::size_t dout) {
  for (std::size_t k = 0; k < din; ++k) {
    for (std::size_t j = 0; j < dout; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += x[i * din + k] * dy[i * dout + j];
      out[k * dout + j] = acc;
    }
  }
}

void column_sums(std::span<const double> m, std::span<double> out, std::size_t n,
                 std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += m[i * d + j];
    out[j] = acc;
  }
}

void nearest_sq_dist(std::span<const Vec3> p, std::span<const Vec3> q, std::span<double> out) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : q) {
      const double d = squared_distance(p[i], b);
      if (d < best) best = d;
    }
    out[i] = best;
  }
}

}  // namespace toposdf::kernels::ref
