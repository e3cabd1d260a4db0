// Copyright 2026 AASV toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#include "aasv/kernels.hpp"

#if defined(AASV_HAVE_AVX2_BUILD)

#include <immintrin.h>

namespace aasv::kernels::avx2 {

namespace {

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 0x55));
  return _mm_cvtss_f32(lo);
}

}  // namespace

float dot(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                           acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8),
                           _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i),
                           acc0);
  float acc = hsum256(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_loadu_ps(y + i);
    vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(float* x, float alpha, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

// Broadcast-FMA over rows of B; C rows stay hot in registers for short n.
void gemm_nn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float av = ai[p];
      if (av == 0.0f) continue;
      const __m256 va = _mm256_set1_ps(av);
      const float* bp = b + p * n;
      std::size_t j = 0;
      for (; j + 16 <= n; j += 16) {
        __m256 c0 = _mm256_loadu_ps(ci + j);
        __m256 c1 = _mm256_loadu_ps(ci + j + 8);
        c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(bp + j), c0);
        c1 = _mm256_fmadd_ps(va, _mm256_loadu_ps(bp + j + 8), c1);
        _mm256_storeu_ps(ci + j, c0);
        _mm256_storeu_ps(ci + j + 8, c1);
      }
      for (; j + 8 <= n; j += 8) {
        __m256 c0 = _mm256_loadu_ps(ci + j);
        c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(bp + j), c0);
        _mm256_storeu_ps(ci + j, c0);
      }
      for (; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += dot(ai, b + j * k, k);
  }
}

void gemm_tn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < m; ++p) {
    const float* ap = a + p * k;
    const float* bp = b + p * n;
    for (std::size_t i = 0; i < k; ++i) {
      const float av = ap[i];
      if (av == 0.0f) continue;
      const __m256 va = _mm256_set1_ps(av);
      float* ci = c + i * n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 c0 = _mm256_loadu_ps(ci + j);
        c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(bp + j), c0);
        _mm256_storeu_ps(ci + j, c0);
      }
      for (; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

}  // namespace aasv::kernels::avx2

#endif  // AASV_HAVE_AVX2_BUILD
