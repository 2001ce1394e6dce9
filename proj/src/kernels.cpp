#include "moltx/kernels.hpp"

namespace moltx::kernels {

namespace scalar {

void matvec(const double* W, const double* x, double* y, std::size_t m,
            std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = W + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_t_acc(const double* W, const double* gy, double* gx,
                  std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = W + i * n;
    const double g = gy[i];
    for (std::size_t j = 0; j < n; ++j) gx[j] += row[j] * g;
  }
}

void ger_acc(const double* gy, const double* x, double* gW, std::size_t m,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = gW + i * n;
    const double g = gy[i];
    for (std::size_t j = 0; j < n; ++j) row[j] += g * x[j];
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void relu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_acc(const double* y, const double* gy, double* gx,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (y[i] > 0.0) gx[i] += gy[i];
}

void scale(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace scalar

namespace {

constexpr Ops kScalarOps = {
    scalar::matvec, scalar::matvec_t_acc, scalar::ger_acc,
    scalar::axpy,   scalar::add,          scalar::mul,
    scalar::mul_acc, scalar::relu,        scalar::relu_grad_acc,
    scalar::scale,  scalar::dot,          scalar::sum,
};

Backend detect() {
#if defined(MOLTX_HAVE_AVX2)
  if (avx2_available()) return Backend::kAvx2;
#endif
  return Backend::kScalar;
}

Backend& backend_slot() {
  static Backend b = detect();
  return b;
}

}  // namespace

#if defined(MOLTX_HAVE_AVX2)
// Defined in kernels_avx2.cpp (compiled with -mavx2 -mfma).
const Ops& avx2_ops_impl();
bool cpu_has_avx2();
#endif

bool avx2_available() {
#if defined(MOLTX_HAVE_AVX2)
  return cpu_has_avx2();
#else
  return false;
#endif
}

Backend active() { return backend_slot(); }

void force(Backend b) {
  if (b == Backend::kAvx2 && !avx2_available()) return;
  backend_slot() = b;
}

std::string_view name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

const Ops& scalar_ops() { return kScalarOps; }

const Ops& ops() {
#if defined(MOLTX_HAVE_AVX2)
  if (backend_slot() == Backend::kAvx2) return avx2_ops_impl();
#endif
  return kScalarOps;
}

}  // namespace moltx::kernels
