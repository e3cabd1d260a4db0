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

#include <cstdlib>
#include <cstring>

namespace aasv::kernels {

namespace {

struct Backend {
  std::string name;
  float (*dot)(const float*, const float*, std::size_t);
  void (*axpy)(float, const float*, float*, std::size_t);
  void (*scale)(float*, float, std::size_t);
  void (*gemm_nn)(const float*, const float*, float*, std::size_t,
                  std::size_t, std::size_t);
  void (*gemm_nt)(const float*, const float*, float*, std::size_t,
                  std::size_t, std::size_t);
  void (*gemm_tn)(const float*, const float*, float*, std::size_t,
                  std::size_t, std::size_t);
};

Backend select_backend() {
  const char* force = std::getenv("AASV_SIMD");
  bool want_scalar = force != nullptr && std::strcmp(force, "scalar") == 0;
#if defined(AASV_HAVE_AVX2_BUILD)
  if (!want_scalar && __builtin_cpu_supports("avx2") &&
      __builtin_cpu_supports("fma")) {
    return {"avx2",         avx2::dot,     avx2::axpy,   avx2::scale,
            avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn};
  }
#else
  (void)want_scalar;
#endif
  return {"scalar",          scalar::dot,     scalar::axpy,   scalar::scale,
          scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_tn};
}

const Backend& backend() {
  static const Backend b = select_backend();
  return b;
}

}  // namespace

const std::string& active_backend() { return backend().name; }

float dot(const float* a, const float* b, std::size_t n) {
  return backend().dot(a, b, n);
}
void axpy(float alpha, const float* x, float* y, std::size_t n) {
  backend().axpy(alpha, x, y, n);
}
void scale(float* x, float alpha, std::size_t n) {
  backend().scale(x, alpha, n);
}
void gemm_nn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n) {
  backend().gemm_nn(a, b, c, m, k, n);
}
void gemm_nt(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n) {
  backend().gemm_nt(a, b, c, m, k, n);
}
void gemm_tn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n) {
  backend().gemm_tn(a, b, c, m, k, n);
}

}  // namespace aasv::kernels
