#pragma once

#include <cstddef>
#include <string_view>

// Dense f64 primitives behind the tape's forward/backward rules.
// Scalar reference implementations are the semantic ground truth; the AVX2
// variants are selected at runtime when the CPU supports them and are held
// to the reference by equivalence tests (exact for elementwise ops,
// tolerance-bounded for reassociated reductions).
namespace moltx::kernels {

enum class Backend { kScalar, kAvx2 };

Backend active();
void force(Backend b);       // test / CLI override; kScalar always available
bool avx2_available();
std::string_view name(Backend b);

struct Ops {
  // y = W x            (W is m x n row-major, x is n, y is m)
  void (*matvec)(const double* W, const double* x, double* y, std::size_t m,
                 std::size_t n);
  // gx += W^T gy
  void (*matvec_t_acc)(const double* W, const double* gy, double* gx,
                       std::size_t m, std::size_t n);
  // gW += gy x^T       (rank-1 update)
  void (*ger_acc)(const double* gy, const double* x, double* gW,
                  std::size_t m, std::size_t n);
  // y += a x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out += a .* b
  void (*mul_acc)(const double* a, const double* b, double* out,
                  std::size_t n);
  void (*relu)(const double* x, double* y, std::size_t n);
  // gx += (y > 0) ? gy : 0, where y is the relu output
  void (*relu_grad_acc)(const double* y, const double* gy, double* gx,
                        std::size_t n);
  void (*scale)(const double* x, double a, double* y, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

const Ops& ops();
const Ops& scalar_ops();  // always the reference implementation

}  // namespace moltx::kernels
