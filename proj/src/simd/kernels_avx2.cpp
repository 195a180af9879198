// Copyright 2026 The evnat authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 variants. Bitwise-equal to the scalar references: lanes map to
// independent output elements, per-element operation order matches the
// scalar loop, and multiply-add stays unfused (this TU is built without FMA
// codegen).

#include "kernel_table.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace evnat::simd {

namespace {

void add_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i),
                                            _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale_avx2(float a, float* x, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) x[i] = a * x[i];
}

void leaky_relu_avx2(const float* x, float* y, std::size_t n, float slope) {
  const __m256 vslope = _mm256_set1_ps(slope);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256 mask = _mm256_cmp_ps(vx, zero, _CMP_GT_OQ);
    const __m256 neg = _mm256_mul_ps(vslope, vx);
    _mm256_storeu_ps(y + i, _mm256_blendv_ps(neg, vx, mask));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : slope * x[i];
}

void leaky_relu_grad_avx2(const float* x, const float* dy, float* dx,
                          std::size_t n, float slope) {
  const __m256 vslope = _mm256_set1_ps(slope);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256 vdy = _mm256_loadu_ps(dy + i);
    const __m256 mask = _mm256_cmp_ps(vx, zero, _CMP_GT_OQ);
    const __m256 neg = _mm256_mul_ps(vslope, vdy);
    _mm256_storeu_ps(dx + i, _mm256_blendv_ps(neg, vdy, mask));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : slope * dy[i];
}

// Row-major gemm. Vector lanes cover adjacent output columns; k advances
// sequentially so each C[i][j] sees the same addition order as the scalar
// reference.
void gemm_avx2(const float* a, const float* b, float* c, int m, int k, int n,
               bool accumulate) {
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * n;
    const float* arow = a + static_cast<std::size_t>(i) * k;

    int j = 0;
    for (; j + 32 <= n; j += 32) {
      __m256 c0, c1, c2, c3;
      if (accumulate) {
        c0 = _mm256_loadu_ps(crow + j);
        c1 = _mm256_loadu_ps(crow + j + 8);
        c2 = _mm256_loadu_ps(crow + j + 16);
        c3 = _mm256_loadu_ps(crow + j + 24);
      } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_ps();
      }
      for (int p = 0; p < k; ++p) {
        const __m256 av = _mm256_set1_ps(arow[p]);
        const float* brow = b + static_cast<std::size_t>(p) * n + j;
        c0 = _mm256_add_ps(c0, _mm256_mul_ps(av, _mm256_loadu_ps(brow)));
        c1 = _mm256_add_ps(c1, _mm256_mul_ps(av, _mm256_loadu_ps(brow + 8)));
        c2 = _mm256_add_ps(c2, _mm256_mul_ps(av, _mm256_loadu_ps(brow + 16)));
        c3 = _mm256_add_ps(c3, _mm256_mul_ps(av, _mm256_loadu_ps(brow + 24)));
      }
      _mm256_storeu_ps(crow + j, c0);
      _mm256_storeu_ps(crow + j + 8, c1);
      _mm256_storeu_ps(crow + j + 16, c2);
      _mm256_storeu_ps(crow + j + 24, c3);
    }
    for (; j + 8 <= n; j += 8) {
      __m256 acc = accumulate ? _mm256_loadu_ps(crow + j) : _mm256_setzero_ps();
      for (int p = 0; p < k; ++p) {
        const __m256 av = _mm256_set1_ps(arow[p]);
        const __m256 bv = _mm256_loadu_ps(b + static_cast<std::size_t>(p) * n + j);
        acc = _mm256_add_ps(acc, _mm256_mul_ps(av, bv));
      }
      _mm256_storeu_ps(crow + j, acc);
    }
    for (; j < n; ++j) {
      float acc = accumulate ? crow[j] : 0.0f;
      for (int p = 0; p < k; ++p) {
        acc = acc + arow[p] * b[static_cast<std::size_t>(p) * n + j];
      }
      crow[j] = acc;
    }
  }
}

void adam_avx2(float* param, const float* grad, float* m, float* v,
               std::size_t n, float lr, float beta1, float beta2, float eps,
               float inv_bc1, float inv_bc2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vomb1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 vomb2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vbc1 = _mm256_set1_ps(inv_bc1);
  const __m256 vbc2 = _mm256_set1_ps(inv_bc2);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 veps = _mm256_set1_ps(eps);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad + i);
    const __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)),
                                    _mm256_mul_ps(vomb1, g));
    const __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                                    _mm256_mul_ps(vomb2, _mm256_mul_ps(g, g)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    const __m256 m_hat = _mm256_mul_ps(mi, vbc1);
    const __m256 v_hat = _mm256_mul_ps(vi, vbc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(v_hat), veps);
    const __m256 step = _mm256_mul_ps(vlr, _mm256_div_ps(m_hat, denom));
    _mm256_storeu_ps(param + i, _mm256_sub_ps(_mm256_loadu_ps(param + i), step));
  }
  const float omb1 = 1.0f - beta1;
  const float omb2 = 1.0f - beta2;
  for (; i < n; ++i) {
    const float g = grad[i];
    m[i] = beta1 * m[i] + omb1 * g;
    v[i] = beta2 * v[i] + omb2 * (g * g);
    const float m_hat = m[i] * inv_bc1;
    const float v_hat = v[i] * inv_bc2;
    param[i] = param[i] - lr * (m_hat / (std::sqrt(v_hat) + eps));
  }
}

constexpr KernelTable kAvx2 = {
    add_avx2,        sub_avx2,   mul_avx2,
    axpy_avx2,       scale_avx2, leaky_relu_avx2,
    leaky_relu_grad_avx2, gemm_avx2,  adam_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace evnat::simd

#else  // !__AVX2__

namespace evnat::simd {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace evnat::simd

#endif
