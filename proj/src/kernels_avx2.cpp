// AVX2 + FMA variants of the dense kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; callers reach it through the
// dispatch table in kernels.cpp.
#include <immintrin.h>

#include "moltx/kernels.hpp"

namespace moltx::kernels {

namespace avx2 {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void matvec(const double* W, const double* x, double* y, std::size_t m,
            std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) y[i] = dot(W + i * n, x, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_t_acc(const double* W, const double* gy, double* gx,
                  std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) axpy(gy[i], W + i * n, gx, n);
}

void ger_acc(const double* gy, const double* x, double* gW, std::size_t m,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) axpy(gy[i], x, gW + i * n, n);
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                                _mm256_loadu_pd(b + i),
                                _mm256_loadu_pd(out + i));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void relu(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_acc(const double* y, const double* gy, double* gx,
                   std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(y + i), zero, _CMP_GT_OQ);
    __m256d gated = _mm256_and_pd(mask, _mm256_loadu_pd(gy + i));
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), gated));
  }
  for (; i < n; ++i)
    if (y[i] > 0.0) gx[i] += gy[i];
}

void scale(const double* x, double a, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

}  // namespace avx2

const Ops& avx2_ops_impl() {
  static constexpr Ops kOps = {
      avx2::matvec, avx2::matvec_t_acc, avx2::ger_acc,
      avx2::axpy,   avx2::add,          avx2::mul,
      avx2::mul_acc, avx2::relu,        avx2::relu_grad_acc,
      avx2::scale,  avx2::dot,          avx2::sum,
  };
  return kOps;
}

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace moltx::kernels
