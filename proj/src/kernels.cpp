#include "impplan/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <string>

namespace impplan::kernels {

namespace {

void axpy_scalar(double* dst, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i];
}

void scale_scalar(double* dst, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a * x[i];
}

void add_scalar(double* dst, const double* x, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] + y[i];
}

void hadamard_scalar(double* dst, const double* x, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] * y[i];
}

void relu_scalar(double* dst, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_acc_scalar(double* dst, const double* g, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dst[i] += g[i];
}

void matvec_tn_acc_scalar(double* out, const double* vec, const double* m,
                          std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = vec[r];
    const double* row = m + r * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += v * row[j];
  }
}

void outer_acc_scalar(double* m, const double* a, const double* b,
                      std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double ai = a[i];
    double* row = m + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += ai * b[j];
  }
}

inline std::size_t clamp_index(long i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<long>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

void conv_vertical_scalar(double* dst, const double* src, std::size_t rows,
                          std::size_t cols, const double* taps, int radius) {
  std::memcpy(dst, src, rows * cols * sizeof(double));
  for (int t = -radius; t <= radius; ++t) {
    if (t == 0) continue;
    const double k = taps[t + radius];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* in = src + clamp_index(static_cast<long>(r) + t, rows) * cols;
      const double* self = src + r * cols;
      double* out = dst + r * cols;
      for (std::size_t c = 0; c < cols; ++c) out[c] += k * (in[c] - self[c]);
    }
  }
}

void conv_horizontal_scalar(double* dst, const double* src, std::size_t rows,
                            std::size_t cols, const double* taps, int radius) {
  std::memcpy(dst, src, rows * cols * sizeof(double));
  for (int t = -radius; t <= radius; ++t) {
    if (t == 0) continue;
    const double k = taps[t + radius];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* in = src + r * cols;
      double* out = dst + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        const double x = in[clamp_index(static_cast<long>(c) + t, cols)];
        out[c] += k * (x - in[c]);
      }
    }
  }
}

const Table kScalar = {
    axpy_scalar,        scale_scalar,         add_scalar,
    hadamard_scalar,    relu_scalar,          relu_mask_acc_scalar,
    matvec_tn_acc_scalar, outer_acc_scalar,
    conv_vertical_scalar, conv_horizontal_scalar,
    "scalar",
};

const Table* select_backend() {
  const char* env = std::getenv("IMPPLAN_SIMD");
  const std::string mode = env ? env : "auto";
  if (mode == "scalar" || mode == "off") return &kScalar;
  const Table* avx2 = avx2_table();
  if (mode == "avx2") return avx2 ? avx2 : &kScalar;
  return avx2 ? avx2 : &kScalar;  // auto
}

}  // namespace

const Table& scalar_table() { return kScalar; }

const Table& active() {
  static const Table* table = select_backend();
  return *table;
}

}  // namespace impplan::kernels
