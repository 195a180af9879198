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

#pragma once

#include <cstddef>

namespace evnat::simd {

// Runtime-dispatched float kernels. Every vector variant is bitwise
// equivalent to the scalar reference: vectorization runs across independent
// output elements only, per-element operation order is fixed, and no variant
// uses fused multiply-add. Equivalence is enforced by tests, so numerical
// results do not depend on which ISA the dispatcher picks.

enum class Isa { Scalar, Avx2, Neon };

const char* isa_name(Isa isa);

/// Best ISA supported by the running CPU.
Isa best_isa();

/// ISA currently routing the kernels. Resolved on first use from best_isa(),
/// overridable via the EVNAT_ISA environment variable (scalar|avx2|neon).
Isa active_isa();

/// Forces the dispatch choice; throws BadConfig when unsupported here.
void force_isa(Isa isa);

// out[i] = a[i] op b[i]
void add(const float* a, const float* b, float* out, std::size_t n);
void sub(const float* a, const float* b, float* out, std::size_t n);
void mul(const float* a, const float* b, float* out, std::size_t n);

/// y[i] += a * x[i]
void axpy(float a, const float* x, float* y, std::size_t n);
/// x[i] *= a
void scale(float a, float* x, std::size_t n);

void leaky_relu(const float* x, float* y, std::size_t n, float slope);
/// dx[i] = dy[i] * (x[i] > 0 ? 1 : slope)
void leaky_relu_grad(const float* x, const float* dy, float* dx, std::size_t n,
                     float slope);

/// Row-major C[M x N] = (accumulate ? C : 0) + A[M x K] . B[K x N].
/// Accumulation over k is sequential per output element in every variant.
void gemm(const float* a, const float* b, float* c, int m, int k, int n,
          bool accumulate);

/// One bias-corrected Adam update over n parameters. inv_bc1/inv_bc2 are the
/// precomputed 1/(1-beta^t) correction factors for the current step.
void adam_update(float* param, const float* grad, float* m, float* v,
                 std::size_t n, float lr, float beta1, float beta2, float eps,
                 float inv_bc1, float inv_bc2);

}  // namespace evnat::simd
