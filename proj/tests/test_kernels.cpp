#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "toposdf/kernels.hpp"

using namespace toposdf;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("parallel kernels equal the serial reference bit for bit") {
  std::mt19937_64 rng(1);
  for (int threads : {1, 2, 4}) {
    kernels::set_threads(threads);
    for (const auto [n, din, dout] : {std::array<std::size_t, 3>{1, 3, 1}, {17, 67, 64},
                                      {300, 64, 64}, {5, 1, 9}}) {
      const auto in = random_vec(n * din, rng);
      const auto w = random_vec(din * dout, rng);
      const auto b = random_vec(dout, rng);
      const auto dy = random_vec(n * dout, rng);
      std::vector<double> a1(n * dout), a2(n * dout);
      kernels::affine(in, w, b, a1, n, din, dout);
      kernels::ref::affine(in, w, b, a2, n, din, dout);
      CHECK(a1 == a2);
      std::vector<double> m1(n * din), m2(n * din);
      kernels::matmul_nt(dy, w, m1, n, din, dout);
      kernels::ref::matmul_nt(dy, w, m2, n, din, dout);
      CHECK(m1 == m2);
      std::vector<double> t1(din * dout), t2(din * dout);
      kernels::matmul_tn(in, dy, t1, n, din, dout);
      kernels::ref::matmul_tn(in, dy, t2, n, din, dout);
      CHECK(t1 == t2);
      std::vector<double> c1(dout), c2(dout);
      kernels::column_sums(dy, c1, n, dout);
      kernels::ref::column_sums(dy, c2, n, dout);
      CHECK(c1 == c2);
    }
    const auto p = oracle::random_points(700, rng);
    const auto q = oracle::random_points(300, rng);
    std::vector<double> d1(p.size()), d2(p.size());
    kernels::nearest_sq_dist(p, q, d1);
    kernels::ref::nearest_sq_dist(p, q, d2);
    CHECK(d1 == d2);
  }
}

TEST_CASE("reference kernels against direct loops") {
  std::mt19937_64 rng(2);
  const std::size_t n = 7, din = 5, dout = 4;
  const auto in = random_vec(n * din, rng);
  const auto w = random_vec(din * dout, rng);
  const auto b = random_vec(dout, rng);
  std::vector<double> out(n * dout);
  kernels::ref::affine(in, w, b, out, n, din, dout);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dout; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < din; ++k) s += in[i * din + k] * w[k * dout + j];
      CHECK(out[i * dout + j] == doctest::Approx(s + b[j]).epsilon(1e-13));
    }
  const auto p = oracle::random_points(50, rng);
  const auto q = oracle::random_points(40, rng);
  std::vector<double> d(p.size());
  kernels::ref::nearest_sq_dist(p, q, d);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = oracle::brute_nearest(p[i], q).second;
    CHECK(std::sqrt(d[i]) == e);
  }
  CHECK(kernels::max_threads() >= 1);
}
