// AVX2 backend. This TU is the only one compiled with -mavx2; the dispatcher
// checks CPU support at runtime before handing out the table. Every loop
// vectorizes across independent outputs with the same per-output accumulation
// order as the scalar kernels, and uses mul+add (no FMA) so results are
// bit-identical to the scalar backend.

#include "impplan/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cstring>

namespace impplan::kernels {

namespace {

void axpy_avx2(double* dst, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_loadu_pd(dst + i);
    __m256d v = _mm256_loadu_pd(x + i);
    d = _mm256_add_pd(d, _mm256_mul_pd(va, v));
    _mm256_storeu_pd(dst + i, d);
  }
  for (; i < n; ++i) dst[i] += a * x[i];
}

void scale_avx2(double* dst, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) dst[i] = a * x[i];
}

void add_avx2(double* dst, const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) dst[i] = x[i] + y[i];
}

void hadamard_avx2(double* dst, const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) dst[i] = x[i] * y[i];
}

void relu_avx2(double* dst, const double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    // keep v where v > 0, else 0; matches the scalar (x > 0 ? x : 0) exactly,
    // including the sign of zero
    __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dst + i, _mm256_and_pd(mask, v));
  }
  for (; i < n; ++i) dst[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_acc_avx2(double* dst, const double* g, const double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    __m256d gg = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), gg));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) dst[i] += g[i];
}

void matvec_tn_acc_avx2(double* out, const double* vec, const double* m,
                        std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const __m256d v = _mm256_set1_pd(vec[r]);
    const double* row = m + r * cols;
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      __m256d o = _mm256_loadu_pd(out + j);
      o = _mm256_add_pd(o, _mm256_mul_pd(v, _mm256_loadu_pd(row + j)));
      _mm256_storeu_pd(out + j, o);
    }
    const double vs = vec[r];
    for (; j < cols; ++j) out[j] += vs * row[j];
  }
}

void outer_acc_avx2(double* m, const double* a, const double* b,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const __m256d va = _mm256_set1_pd(a[i]);
    double* row = m + i * cols;
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      __m256d o = _mm256_loadu_pd(row + j);
      o = _mm256_add_pd(o, _mm256_mul_pd(va, _mm256_loadu_pd(b + j)));
      _mm256_storeu_pd(row + j, o);
    }
    const double as = a[i];
    for (; j < cols; ++j) row[j] += as * b[j];
  }
}

inline std::size_t clamp_index(long i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<long>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

void conv_vertical_avx2(double* dst, const double* src, std::size_t rows,
                        std::size_t cols, const double* taps, int radius) {
  std::memcpy(dst, src, rows * cols * sizeof(double));
  for (int t = -radius; t <= radius; ++t) {
    if (t == 0) continue;
    const double k = taps[t + radius];
    const __m256d vk = _mm256_set1_pd(k);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* in = src + clamp_index(static_cast<long>(r) + t, rows) * cols;
      const double* self = src + r * cols;
      double* out = dst + r * cols;
      std::size_t c = 0;
      for (; c + 4 <= cols; c += 4) {
        __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(in + c), _mm256_loadu_pd(self + c));
        __m256d o = _mm256_add_pd(_mm256_loadu_pd(out + c), _mm256_mul_pd(vk, diff));
        _mm256_storeu_pd(out + c, o);
      }
      for (; c < cols; ++c) out[c] += k * (in[c] - self[c]);
    }
  }
}

void conv_horizontal_avx2(double* dst, const double* src, std::size_t rows,
                          std::size_t cols, const double* taps, int radius) {
  std::memcpy(dst, src, rows * cols * sizeof(double));
  for (int t = -radius; t <= radius; ++t) {
    if (t == 0) continue;
    const double k = taps[t + radius];
    const __m256d vk = _mm256_set1_pd(k);
    // interior columns where c+t needs no clamping
    const std::size_t lo = t < 0 ? static_cast<std::size_t>(-t) : 0;
    const std::size_t hi = t > 0 ? (cols > static_cast<std::size_t>(t) ? cols - t : 0) : cols;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* in = src + r * cols;
      double* out = dst + r * cols;
      std::size_t c = 0;
      for (; c < lo && c < cols; ++c)
        out[c] += k * (in[clamp_index(static_cast<long>(c) + t, cols)] - in[c]);
      for (; c + 4 <= hi; c += 4) {
        __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(in + c + t), _mm256_loadu_pd(in + c));
        __m256d o = _mm256_add_pd(_mm256_loadu_pd(out + c), _mm256_mul_pd(vk, diff));
        _mm256_storeu_pd(out + c, o);
      }
      for (; c < cols; ++c)
        out[c] += k * (in[clamp_index(static_cast<long>(c) + t, cols)] - in[c]);
    }
  }
}

const Table kAvx2 = {
    axpy_avx2,        scale_avx2,         add_avx2,
    hadamard_avx2,    relu_avx2,          relu_mask_acc_avx2,
    matvec_tn_acc_avx2, outer_acc_avx2,
    conv_vertical_avx2, conv_horizontal_avx2,
    "avx2",
};

}  // namespace

const Table* avx2_table() {
  return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

}  // namespace impplan::kernels

#else  // !__AVX2__

namespace impplan::kernels {
const Table* avx2_table() { return nullptr; }
}  // namespace impplan::kernels

#endif
