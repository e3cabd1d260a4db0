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

#ifndef AASV_KERNELS_HPP
#define AASV_KERNELS_HPP

#include <cstddef>
#include <string>

namespace aasv::kernels {

// Scalar reference kernels. These define the semantics; the SIMD
// variants must agree with them to within accumulation-order roundoff.
namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void scale(float* x, float alpha, std::size_t n);
// C(m x n) += A(m x k) * B(k x n), all row-major.
void gemm_nn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
// C(m x n) += A(m x k) * B^T, where B is (n x k) row-major.
void gemm_nt(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
// C(k x n) += A^T * B, where A is (m x k) and B is (m x n) row-major.
void gemm_tn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define AASV_HAVE_AVX2_BUILD 1
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void scale(float* x, float alpha, std::size_t n);
void gemm_nn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
void gemm_nt(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
void gemm_tn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
}  // namespace avx2
#endif

// Dispatched entry points. Resolved once at first use from CPUID;
// AASV_SIMD=scalar in the environment forces the reference path.
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void scale(float* x, float alpha, std::size_t n);
void gemm_nn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
void gemm_nt(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);
void gemm_tn(const float* a, const float* b, float* c, std::size_t m,
             std::size_t k, std::size_t n);

// Name of the active backend: "avx2" or "scalar".
const std::string& active_backend();

}  // namespace aasv::kernels

#endif  // AASV_KERNELS_HPP
