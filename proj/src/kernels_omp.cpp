#include <algorithm>
#include <limits>
#include <vector>

#include "toposdf/kernels.hpp"

#ifdef TOPOSDF_HAVE_OPENMP
#include <omp.h>
#endif

namespace toposdf::kernels {

namespace {
using Index = std::ptrdiff_t;
}

int max_threads() {
#ifdef TOPOSDF_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef TOPOSDF_HAVE_OPENMP
  omp_set_num_threads(std::max(1, n));
#else
  (void)n;
#endif
}

void affine(std::span<const double> in, std::span<const double> weight,
            std::span<const double> bias, std::span<double> out, std::size_t n,
            std::size_t din, std::size_t dout) {
  const double* x = in.data();
  const double* w = weight.data();
  const double* b = bias.data();
  double* y = out.data();
#pragma omp parallel for schedule(static) if (n * din * dout > 32768)
  for (Index i = 0; i < static_cast<Index>(n); ++i) {
    double* row = y + i * dout;
    for (std::size_t j = 0; j < dout; ++j) row[j] = b[j];
    for (std::size_t k = 0; k < din; ++k) {
      const double a = x[i * din + k];
      const double* wk = w + k * dout;
      for (std::size_t j = 0; j < dout; ++j) row[j] += a * wk[j];
    }
  }
}

void matmul_nt(std::span<const double> dy, std::span<const double> weight,
               std::span<double> out, std::size_t n, std::size_t din, std::size_t dout) {
  // transpose so the inner loop runs contiguously over k
  std::vector<double> wt(din * dout);
  for (std::size_t k = 0; k < din; ++k)
    for (std::size_t j = 0; j < dout; ++j) wt[j * din + k] = weight[k * dout + j];
  const double* g = dy.data();
  const double* t = wt.data();
  double* y = out.data();
#pragma omp parallel for schedule(static) if (n * din * dout > 32768)
  for (Index i = 0; i < static_cast<Index>(n); ++i) {
    double* row = y + i * din;
    for (std::size_t k = 0; k < din; ++k) row[k] = 0.0;
    for (std::size_t j = 0; j < dout; ++j) {
      const double a = g[i * dout + j];
      const double* tj = t + j * din;
      for (std::size_t k = 0; k < din; ++k) row[k] += a * tj[k];
    }
  }
}

void matmul_tn(std::span<const double> x, std::span<const double> dy, std::span<double> out,
               std::size_t n, std::size_t din, std::size_t dout) {
  const double* a = x.data();
  const double* g = dy.data();
  double* y = out.data();
#pragma omp parallel for schedule(static) if (n * din * dout > 32768)
  for (Index k = 0; k < static_cast<Index>(din); ++k) {
    double* row = y + k * dout;
    for (std::size_t j = 0; j < dout; ++j) row[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = a[i * din + k];
      const double* gi = g + i * dout;
      for (std::size_t j = 0; j < dout; ++j) row[j] += s * gi[j];
    }
  }
}

void column_sums(std::span<const double> m, std::span<double> out, std::size_t n,
                 std::size_t d) {
  constexpr std::size_t kBlock = 64;
  const Index blocks = static_cast<Index>((d + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) if (n * d > 65536)
  for (Index bi = 0; bi < blocks; ++bi) {
    const std::size_t lo = static_cast<std::size_t>(bi) * kBlock;
    const std::size_t hi = std::min(d, lo + kBlock);
    for (std::size_t j = lo; j < hi; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = lo; j < hi; ++j) out[j] += m[i * d + j];
  }
}

void nearest_sq_dist(std::span<const Vec3> p, std::span<const Vec3> q, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < static_cast<Index>(p.size()); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : q) {
      const double d = squared_distance(p[i], b);
      if (d < best) best = d;
    }
    out[i] = best;
  }
}

}  // namespace toposdf::kernels
