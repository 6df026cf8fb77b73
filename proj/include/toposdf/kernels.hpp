#pragma once

#include <cstddef>
#include <span>

#include "toposdf/tensor.hpp"

// Dense inner loops used by the tape, the inference path and the metrics.
//
// Every kernel exists twice: a plain serial version in kernels::ref and an
// OpenMP version in kernels. Both accumulate each output element in the same
// order (ascending reduction index starting from the same initial value), so
// their results are bit-identical regardless of thread count. The tests rely
// on that; keep it true when touching either side.
namespace toposdf::kernels {

// out[i,j] = bias[j] + sum_k in[i,k] * weight[k,j]; in is n x din, weight
// din x dout, out n x dout.
void affine(std::span<const double> in, std::span<const double> weight,
            std::span<const double> bias, std::span<double> out, std::size_t n,
            std::size_t din, std::size_t dout);

// out[i,k] = sum_j dy[i,j] * weight[k,j]; dy is n x dout, weight din x dout.
void matmul_nt(std::span<const double> dy, std::span<const double> weight,
               std::span<double> out, std::size_t n, std::size_t din, std::size_t dout);

// out[k,j] = sum_i x[i,k] * dy[i,j]; x is n x din, dy n x dout, out din x dout.
void matmul_tn(std::span<const double> x, std::span<const double> dy, std::span<double> out,
               std::size_t n, std::size_t din, std::size_t dout);

// out[j] = sum_i m[i,j]
void column_sums(std::span<const double> m, std::span<double> out, std::size_t n,
                 std::size_t d);

// out[i] = min_j |p_i - q_j|^2 by exhaustive scan.
void nearest_sq_dist(std::span<const Vec3> p, std::span<const Vec3> q, std::span<double> out);

namespace ref {

void affine(std::span<const double> in, std::span<const double> weight,
            std::span<const double> bias, std::span<double> out, std::size_t n,
            std::size_t din, std::size_t dout);
void matmul_nt(std::span<const double> dy, std::span<const double> weight,
               std::span<double> out, std::size_t n, std::size_t din, std::size_t dout);
void matmul_tn(std::span<const double> x, std::span<const double> dy, std::span<double> out,
               std::size_t n, std::size_t din, std::size_t dout);
void column_sums(std::span<const double> m, std::span<double> out, std::size_t n,
                 std::size_t d);
void nearest_sq_dist(std::span<const Vec3> p, std::span<const Vec3> q, std::span<double> out);

}  // namespace ref

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace toposdf::kernels
