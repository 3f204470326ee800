#pragma once

#include <cstddef>

namespace impplan::kernels {

// Data-parallel inner-loop kernels shared by the costmap smoothing and the
// network forward/backward passes. Each entry has a scalar reference
// implementation and, on x86-64, an AVX2 variant selected at runtime.
//
// The SIMD variants vectorize across *independent outputs* and keep each
// output's accumulation order identical to the scalar kernel, so the two
// backends produce bit-identical results (verified by the equivalence tests).
struct Table {
  // dst[i] += a * x[i]
  void (*axpy)(double* dst, double a, const double* x, std::size_t n);
  // dst[i] = a * x[i]
  void (*scale)(double* dst, double a, const double* x, std::size_t n);
  // dst[i] = x[i] + y[i]
  void (*add)(double* dst, const double* x, const double* y, std::size_t n);
  // dst[i] = x[i] * y[i]
  void (*hadamard)(double* dst, const double* x, const double* y, std::size_t n);
  // dst[i] = x[i] > 0 ? x[i] : 0
  void (*relu)(double* dst, const double* x, std::size_t n);
  // dst[i] += x[i] > 0 ? g[i] : 0
  void (*relu_mask_acc)(double* dst, const double* g, const double* x, std::size_t n);
  // out[j] += sum_r vec[r] * m[r*cols + j]   (out += m^T vec, m row-major)
  void (*matvec_tn_acc)(double* out, const double* vec, const double* m,
                        std::size_t rows, std::size_t cols);
  // m[i*cols + j] += a[i] * b[j]
  void (*outer_acc)(double* m, const double* a, const double* b,
                    std::size_t rows, std::size_t cols);
  // Offset-compensated 1D convolution along the row axis (taps span rows),
  // edge rows replicated:
  //   dst[r][c] = src[r][c] + sum_{t != 0} taps[t+radius] *
  //               (src[clamp(r+t)][c] - src[r][c])
  // The offset form reproduces constant fields exactly regardless of the
  // rounding of the normalized taps.
  void (*conv_vertical)(double* dst, const double* src, std::size_t rows,
                        std::size_t cols, const double* taps, int radius);
  // Same along the column axis (taps span columns).
  void (*conv_horizontal)(double* dst, const double* src, std::size_t rows,
                          std::size_t cols, const double* taps, int radius);
  const char* name;
};

// Active backend. Selection: IMPPLAN_SIMD=scalar|avx2|auto (default auto =
// pick AVX2 when the CPU supports it). Resolved once, thread-safe.
const Table& active();

const Table& scalar_table();

// AVX2 backend, or nullptr when unsupported by the build or the CPU.
const Table* avx2_table();

}  // namespace impplan::kernels
