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

struct KernelTable {
  void (*add)(const float*, const float*, float*, std::size_t);
  void (*sub)(const float*, const float*, float*, std::size_t);
  void (*mul)(const float*, const float*, float*, std::size_t);
  void (*axpy)(float, const float*, float*, std::size_t);
  void (*scale)(float, float*, std::size_t);
  void (*leaky_relu)(const float*, float*, std::size_t, float);
  void (*leaky_relu_grad)(const float*, const float*, float*, std::size_t, float);
  void (*gemm)(const float*, const float*, float*, int, int, int, bool);
  void (*adam)(float*, const float*, float*, float*, std::size_t, float, float,
               float, float, float, float);
};

const KernelTable* scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in

}  // namespace evnat::simd
