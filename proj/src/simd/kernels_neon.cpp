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

// NEON variants (aarch64 only: vdivq/vsqrtq are IEEE-exact there, which the
// bitwise equivalence contract relies on). Same lane discipline as the AVX2
// TU: lanes are independent outputs, k advances sequentially, no fused
// multiply-add.

#include "kernel_table.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstring>

namespace evnat::simd {

namespace {

void add_neon(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(out + i, vaddq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_neon(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(out + i, vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_neon(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(out + i, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_neon(float a, const float* x, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t prod = vmulq_f32(va, vld1q_f32(x + i));
    vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale_neon(float a, float* x, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(x + i, vmulq_f32(va, vld1q_f32(x + i)));
  }
  for (; i < n; ++i) x[i] = a * x[i];
}

void leaky_relu_neon(const float* x, float* y, std::size_t n, float slope) {
  const float32x4_t vslope = vdupq_n_f32(slope);
  const float32x4_t zero = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vx = vld1q_f32(x + i);
    const uint32x4_t mask = vcgtq_f32(vx, zero);
    vst1q_f32(y + i, vbslq_f32(mask, vx, vmulq_f32(vslope, vx)));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : slope * x[i];
}

void leaky_relu_grad_neon(const float* x, const float* dy, float* dx,
                          std::size_t n, float slope) {
  const float32x4_t vslope = vdupq_n_f32(slope);
  const float32x4_t zero = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vx = vld1q_f32(x + i);
    const float32x4_t vdy = vld1q_f32(dy + i);
    const uint32x4_t mask = vcgtq_f32(vx, zero);
    vst1q_f32(dx + i, vbslq_f32(mask, vdy, vmulq_f32(vslope, vdy)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : slope * dy[i];
}

void gemm_neon(const float* a, const float* b, float* c, int m, int k, int n,
               bool accumulate) {
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * n;
    const float* arow = a + static_cast<std::size_t>(i) * k;

    int j = 0;
    for (; j + 16 <= n; j += 16) {
      float32x4_t c0, c1, c2, c3;
      if (accumulate) {
        c0 = vld1q_f32(crow + j);
        c1 = vld1q_f32(crow + j + 4);
        c2 = vld1q_f32(crow + j + 8);
        c3 = vld1q_f32(crow + j + 12);
      } else {
        c0 = c1 = c2 = c3 = vdupq_n_f32(0.0f);
      }
      for (int p = 0; p < k; ++p) {
        const float32x4_t av = vdupq_n_f32(arow[p]);
        const float* brow = b + static_cast<std::size_t>(p) * n + j;
        c0 = vaddq_f32(c0, vmulq_f32(av, vld1q_f32(brow)));
        c1 = vaddq_f32(c1, vmulq_f32(av, vld1q_f32(brow + 4)));
        c2 = vaddq_f32(c2, vmulq_f32(av, vld1q_f32(brow + 8)));
        c3 = vaddq_f32(c3, vmulq_f32(av, vld1q_f32(brow + 12)));
      }
      vst1q_f32(crow + j, c0);
      vst1q_f32(crow + j + 4, c1);
      vst1q_f32(crow + j + 8, c2);
      vst1q_f32(crow + j + 12, c3);
    }
    for (; j + 4 <= n; j += 4) {
      float32x4_t acc = accumulate ? vld1q_f32(crow + j) : vdupq_n_f32(0.0f);
      for (int p = 0; p < k; ++p) {
        const float32x4_t av = vdupq_n_f32(arow[p]);
        const float32x4_t bv = vld1q_f32(b + static_cast<std::size_t>(p) * n + j);
        acc = vaddq_f32(acc, vmulq_f32(av, bv));
      }
      vst1q_f32(crow + j, acc);
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

void adam_neon(float* param, const float* grad, float* m, float* v,
               std::size_t n, float lr, float beta1, float beta2, float eps,
               float inv_bc1, float inv_bc2) {
  const float32x4_t vb1 = vdupq_n_f32(beta1);
  const float32x4_t vb2 = vdupq_n_f32(beta2);
  const float32x4_t vomb1 = vdupq_n_f32(1.0f - beta1);
  const float32x4_t vomb2 = vdupq_n_f32(1.0f - beta2);
  const float32x4_t vbc1 = vdupq_n_f32(inv_bc1);
  const float32x4_t vbc2 = vdupq_n_f32(inv_bc2);
  const float32x4_t vlr = vdupq_n_f32(lr);
  const float32x4_t veps = vdupq_n_f32(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t g = vld1q_f32(grad + i);
    const float32x4_t mi = vaddq_f32(vmulq_f32(vb1, vld1q_f32(m + i)),
                                     vmulq_f32(vomb1, g));
    const float32x4_t vi = vaddq_f32(vmulq_f32(vb2, vld1q_f32(v + i)),
                                     vmulq_f32(vomb2, vmulq_f32(g, g)));
    vst1q_f32(m + i, mi);
    vst1q_f32(v + i, vi);
    const float32x4_t m_hat = vmulq_f32(mi, vbc1);
    const float32x4_t v_hat = vmulq_f32(vi, vbc2);
    const float32x4_t denom = vaddq_f32(vsqrtq_f32(v_hat), veps);
    const float32x4_t step = vmulq_f32(vlr, vdivq_f32(m_hat, denom));
    vst1q_f32(param + i, vsubq_f32(vld1q_f32(param + i), step));
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

constexpr KernelTable kNeon = {
    add_neon,        sub_neon,   mul_neon,
    axpy_neon,       scale_neon, leaky_relu_neon,
    leaky_relu_grad_neon, gemm_neon,  adam_neon,
};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace evnat::simd

#else  // !__aarch64__

namespace evnat::simd {
const KernelTable* neon_table() { return nullptr; }
}  // namespace evnat::simd

#endif
