#include <doctest.h>

#include <cmath>
#include <vector>

#include "moltx/kernels.hpp"
#include "moltx/rng.hpp"

using namespace moltx;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform_real(-2.0, 2.0);
  return v;
}

bool close(double a, double b, double rel = 1e-12) {
  return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b), 1.0});
}

}  // namespace

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!kernels::avx2_available()) {
    MESSAGE("AVX2 not available; dispatch falls back to scalar");
    return;
  }
  const auto& scalar = kernels::scalar_ops();
  kernels::force(kernels::Backend::kAvx2);
  const auto& simd = kernels::ops();
  REQUIRE(&simd != &scalar);

  Rng rng(1234);
  // Odd lengths exercise the vector remainders.
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 64u, 67u}) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);

    // Elementwise ops without FMA are bit-identical.
    {
      std::vector<double> r1(n), r2(n);
      scalar.add(a.data(), b.data(), r1.data(), n);
      simd.add(a.data(), b.data(), r2.data(), n);
      CHECK(r1 == r2);
      scalar.mul(a.data(), b.data(), r1.data(), n);
      simd.mul(a.data(), b.data(), r2.data(), n);
      CHECK(r1 == r2);
      scalar.relu(a.data(), r1.data(), n);
      simd.relu(a.data(), r2.data(), n);
      CHECK(r1 == r2);
      scalar.scale(a.data(), 1.7, r1.data(), n);
      simd.scale(a.data(), 1.7, r2.data(), n);
      CHECK(r1 == r2);
    }
    // Reductions and FMA paths reassociate; compare within tight tolerance.
    CHECK(close(scalar.dot(a.data(), b.data(), n),
                simd.dot(a.data(), b.data(), n)));
    CHECK(close(scalar.sum(a.data(), n), simd.sum(a.data(), n)));
    {
      auto y1 = random_vec(rng, n);
      auto y2 = y1;
      scalar.axpy(0.37, a.data(), y1.data(), n);
      simd.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i]));
      auto z1 = random_vec(rng, n);
      auto z2 = z1;
      scalar.mul_acc(a.data(), b.data(), z1.data(), n);
      simd.mul_acc(a.data(), b.data(), z2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close(z1[i], z2[i]));
    }
    {
      auto y = random_vec(rng, n);
      auto g1 = random_vec(rng, n);
      auto g2 = g1;
      scalar.relu_grad_acc(y.data(), a.data(), g1.data(), n);
      simd.relu_grad_acc(y.data(), a.data(), g2.data(), n);
      CHECK(g1 == g2);
    }
  }

  // Matrix ops over assorted shapes.
  for (auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1, 1}, {3, 5}, {8, 8}, {7, 13}, {16, 9}}) {
    const auto W = random_vec(rng, m * n);
    const auto x = random_vec(rng, n);
    const auto gy = random_vec(rng, m);
    std::vector<double> y1(m), y2(m);
    scalar.matvec(W.data(), x.data(), y1.data(), m, n);
    simd.matvec(W.data(), x.data(), y2.data(), m, n);
    for (std::size_t i = 0; i < m; ++i) CHECK(close(y1[i], y2[i]));

    auto gx1 = random_vec(rng, n);
    auto gx2 = gx1;
    scalar.matvec_t_acc(W.data(), gy.data(), gx1.data(), m, n);
    simd.matvec_t_acc(W.data(), gy.data(), gx2.data(), m, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(gx1[i], gx2[i]));

    auto gw1 = random_vec(rng, m * n);
    auto gw2 = gw1;
    scalar.ger_acc(gy.data(), x.data(), gw1.data(), m, n);
    simd.ger_acc(gy.data(), x.data(), gw2.data(), m, n);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(close(gw1[i], gw2[i]));
  }

  kernels::force(kernels::Backend::kScalar);
  CHECK(&kernels::ops() == &kernels::scalar_ops());
  kernels::force(kernels::Backend::kAvx2);
}

TEST_CASE("forcing an unavailable backend is a no-op") {
  const auto before = kernels::active();
  kernels::force(kernels::Backend::kAvx2);
  if (!kernels::avx2_available())
    CHECK(kernels::active() == kernels::Backend::kScalar);
  kernels::force(before);
}
