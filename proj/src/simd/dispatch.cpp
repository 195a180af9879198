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

#include "evnat/simd/kernels.hpp"

#include <cstdlib>
#include <string>

#include "evnat/core/error.hpp"
#include "kernel_table.hpp"

namespace evnat::simd {

namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return scalar_table();
    case Isa::Avx2: return avx2_table();
    case Isa::Neon: return neon_table();
  }
  return nullptr;
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
      return neon_table() != nullptr;  // baseline on aarch64
  }
  return false;
}

struct Dispatch {
  Isa isa;
  const KernelTable* table;
};

Dispatch resolve_initial() {
  if (const char* env = std::getenv("EVNAT_ISA")) {
    const std::string want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == isa_name(isa)) {
        if (!cpu_supports(isa)) {
          raise(ErrorCode::BadConfig, "EVNAT_ISA=" + want + " not supported on this CPU");
        }
        return {isa, table_for(isa)};
      }
    }
    raise(ErrorCode::BadConfig, "unknown EVNAT_ISA value '" + want + "'");
  }
  const Isa isa = best_isa();
  return {isa, table_for(isa)};
}

Dispatch& dispatch() {
  static Dispatch d = resolve_initial();
  return d;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

Isa best_isa() {
  if (cpu_supports(Isa::Avx2)) return Isa::Avx2;
  if (cpu_supports(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return dispatch().isa; }

void force_isa(Isa isa) {
  if (!cpu_supports(isa)) {
    raise(ErrorCode::BadConfig,
          std::string("ISA '") + isa_name(isa) + "' not supported on this CPU");
  }
  dispatch() = {isa, table_for(isa)};
}

void add(const float* a, const float* b, float* out, std::size_t n) {
  dispatch().table->add(a, b, out, n);
}
void sub(const float* a, const float* b, float* out, std::size_t n) {
  dispatch().table->sub(a, b, out, n);
}
void mul(const float* a, const float* b, float* out, std::size_t n) {
  dispatch().table->mul(a, b, out, n);
}
void axpy(float a, const float* x, float* y, std::size_t n) {
  dispatch().table->axpy(a, x, y, n);
}
void scale(float a, float* x, std::size_t n) { dispatch().table->scale(a, x, n); }
void leaky_relu(const float* x, float* y, std::size_t n, float slope) {
  dispatch().table->leaky_relu(x, y, n, slope);
}
void leaky_relu_grad(const float* x, const float* dy, float* dx, std::size_t n,
                     float slope) {
  dispatch().table->leaky_relu_grad(x, dy, dx, n, slope);
}
void gemm(const float* a, const float* b, float* c, int m, int k, int n,
          bool accumulate) {
  dispatch().table->gemm(a, b, c, m, k, n, accumulate);
}
void adam_update(float* param, const float* grad, float* m, float* v,
                 std::size_t n, float lr, float beta1, float beta2, float eps,
                 float inv_bc1, float inv_bc2) {
  dispatch().table->adam(param, grad, m, v, n, lr, beta1, beta2, eps, inv_bc1,
                         inv_bc2);
}

}  // namespace evnat::simd
