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

#include "evnat/nn/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

#include "evnat/simd/kernels.hpp"

namespace evnat::nn {

namespace {

std::atomic<ConvEngine> g_conv_engine{ConvEngine::Im2col};

// float routes through the runtime-dispatched kernels; double uses the same
// loop order in plain code (the 64-bit path only serves gradient checking).
template <typename T>
void gemm_t(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  if constexpr (std::is_same_v<T, float>) {
    simd::gemm(a, b, c, m, k, n, accumulate);
  } else {
    for (int i = 0; i < m; ++i) {
      T* crow = c + static_cast<std::size_t>(i) * n;
      if (!accumulate) std::fill(crow, crow + n, T(0));
      const T* arow = a + static_cast<std::size_t>(i) * k;
      for (int p = 0; p < k; ++p) {
        const T av = arow[p];
        const T* brow = b + static_cast<std::size_t>(p) * n;
        for (int j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
      }
    }
  }
}

template <typename T>
void transpose_t(const T* src, T* dst, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < cols; ++j) {
      dst[static_cast<std::size_t>(j) * rows + r] =
          src[static_cast<std::size_t>(r) * cols + j];
    }
  }
}

struct ConvDims {
  int n, c, h, w;        // input
  int o, kh, kw;         // filter
  int stride, pad;
  int ho, wo;            // output spatial
  int patch() const { return c * kh * kw; }
  int cols() const { return ho * wo; }
};

// cols[(c*kh + i)*kw + j][ho*wo_idx] = x zero-padded; row order (c, i, j)
// matches the direct loop's accumulation order.
template <typename T>
void im2col(const T* x, const ConvDims& d, T* cols) {
  const int L = d.cols();
  for (int c = 0; c < d.c; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * d.h * d.w;
    for (int i = 0; i < d.kh; ++i) {
      for (int j = 0; j < d.kw; ++j) {
        T* row = cols + (static_cast<std::size_t>(c) * d.kh + i) * d.kw * L +
                 static_cast<std::size_t>(j) * L;
        for (int ho = 0; ho < d.ho; ++ho) {
          const int hi = ho * d.stride - d.pad + i;
          T* dst = row + static_cast<std::size_t>(ho) * d.wo;
          if (hi < 0 || hi >= d.h) {
            std::fill(dst, dst + d.wo, T(0));
            continue;
          }
          for (int wo = 0; wo < d.wo; ++wo) {
            const int wi = wo * d.stride - d.pad + j;
            dst[wo] = (wi < 0 || wi >= d.w) ? T(0) : xc[hi * d.w + wi];
          }
        }
      }
    }
  }
}

// Adjoint scatter of im2col.
template <typename T>
void col2im_add(const T* cols, const ConvDims& d, T* x) {
  const int L = d.cols();
  for (int c = 0; c < d.c; ++c) {
    T* xc = x + static_cast<std::size_t>(c) * d.h * d.w;
    for (int i = 0; i < d.kh; ++i) {
      for (int j = 0; j < d.kw; ++j) {
        const T* row = cols + (static_cast<std::size_t>(c) * d.kh + i) * d.kw * L +
                       static_cast<std::size_t>(j) * L;
        for (int ho = 0; ho < d.ho; ++ho) {
          const int hi = ho * d.stride - d.pad + i;
          if (hi < 0 || hi >= d.h) continue;
          const T* src = row + static_cast<std::size_t>(ho) * d.wo;
          for (int wo = 0; wo < d.wo; ++wo) {
            const int wi = wo * d.stride - d.pad + j;
            if (wi >= 0 && wi < d.w) xc[hi * d.w + wi] += src[wo];
          }
        }
      }
    }
  }
}

template <typename T>
T padded_at(const T* xc, int h, int w, int hi, int wi) {
  return (hi < 0 || hi >= h || wi < 0 || wi >= w) ? T(0) : xc[hi * w + wi];
}

// Direct loop-nest forward; zero terms at padded positions are included so
// the accumulation sequence matches the im2col+gemm path bitwise.
template <typename T>
void conv_forward_direct(const T* x, const T* w, T* y, const ConvDims& d) {
  const std::size_t xplane = static_cast<std::size_t>(d.h) * d.w;
  const std::size_t yplane = static_cast<std::size_t>(d.ho) * d.wo;
  for (int o = 0; o < d.o; ++o) {
    const T* wo_ = w + static_cast<std::size_t>(o) * d.patch();
    T* yo = y + static_cast<std::size_t>(o) * yplane;
    for (int ho = 0; ho < d.ho; ++ho) {
      for (int wo = 0; wo < d.wo; ++wo) {
        T acc = T(0);
        const T* wp = wo_;
        for (int c = 0; c < d.c; ++c) {
          const T* xc = x + c * xplane;
          for (int i = 0; i < d.kh; ++i) {
            const int hi = ho * d.stride - d.pad + i;
            for (int j = 0; j < d.kw; ++j, ++wp) {
              const int wi = wo * d.stride - d.pad + j;
              acc = acc + *wp * padded_at(xc, d.h, d.w, hi, wi);
            }
          }
        }
        yo[ho * d.wo + wo] = acc;
      }
    }
  }
}

template <typename T>
void conv_forward_im2col(const T* x, const T* w, T* y, const ConvDims& d,
                         std::vector<T>& scratch) {
  scratch.resize(static_cast<std::size_t>(d.patch()) * d.cols());
  im2col(x, d, scratch.data());
  gemm_t<T>(w, scratch.data(), y, d.o, d.patch(), d.cols(), false);
}

template <typename T>
void check_conv_common(const Shape& xs, const Shape& ws, const Shape& bs,
                       int stride, int padding) {
  if (xs.rank != 4 || ws.rank != 4) {
    raise(ErrorCode::ShapeMismatch, "conv expects rank-4 input and weight");
  }
  if (bs.numel() != static_cast<std::size_t>(ws.n())) {
    raise(ErrorCode::ShapeMismatch, "bias length must equal output channels");
  }
  if (stride < 1 || padding < 0) {
    raise(ErrorCode::ShapeMismatch, "stride must be >= 1 and padding >= 0");
  }
}

// Shared bias gradient: sum of dY over batch and spatial dims, accumulated
// in double regardless of storage precision.
template <typename T>
void bias_grad(const TensorT<T>& dy, const ValuePtrT<T>& b, int channels) {
  if (!b->requires_grad) return;
  b->ensure_grad();
  const int n = dy.shape.n();
  const std::size_t plane = static_cast<std::size_t>(dy.shape.h()) * dy.shape.w();
  for (int c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const T* p = dy.data.data() + (static_cast<std::size_t>(i) * channels + c) * plane;
      for (std::size_t l = 0; l < plane; ++l) acc += static_cast<double>(p[l]);
    }
    b->grad.data[c] += static_cast<T>(acc);
  }
}

}  // namespace

ConvEngine conv_engine() { return g_conv_engine.load(); }
void set_conv_engine(ConvEngine engine) { g_conv_engine.store(engine); }

template <typename T>
ValuePtrT<T> constant(TapeT<T>& tape, TensorT<T> value) {
  auto node = tape.record(std::move(value));
  node->requires_grad = false;
  return node;
}

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

template <typename T>
ValuePtrT<T> conv2d(TapeT<T>& tape, const ValuePtrT<T>& x, const ValuePtrT<T>& w,
                    const ValuePtrT<T>& b, int stride, int padding) {
  const Shape xs = x->value.shape;
  const Shape ws = w->value.shape;
  check_conv_common<T>(xs, ws, b->value.shape, stride, padding);
  if (xs.c() != ws.c()) {
    raise(ErrorCode::ShapeMismatch, "input channels " + std::to_string(xs.c()) +
                                        " != weight channels " + std::to_string(ws.c()));
  }
  const int hnum = xs.h() + 2 * padding - ws.h();
  const int wnum = xs.w() + 2 * padding - ws.w();
  if (hnum < 0 || wnum < 0 || hnum % stride != 0 || wnum % stride != 0) {
    raise(ErrorCode::NonIntegralOutput,
          "conv output dims not integral for input " + xs.to_string());
  }

  ConvDims d{xs.n(), xs.c(), xs.h(), xs.w(), ws.n(), ws.h(), ws.w(),
             stride,  padding, hnum / stride + 1, wnum / stride + 1};

  TensorT<T> out(Shape::of4(d.n, d.o, d.ho, d.wo));
  const std::size_t xstride = static_cast<std::size_t>(d.c) * d.h * d.w;
  const std::size_t ystride = static_cast<std::size_t>(d.o) * d.ho * d.wo;
  const ConvEngine engine = conv_engine();
  {
    std::vector<T> scratch;
    for (int i = 0; i < d.n; ++i) {
      const T* xi = x->value.data.data() + i * xstride;
      T* yi = out.data.data() + i * ystride;
      if (engine == ConvEngine::Im2col) {
        conv_forward_im2col(xi, w->value.data.data(), yi, d, scratch);
      } else {
        conv_forward_direct(xi, w->value.data.data(), yi, d);
      }
    }
  }
  // bias after the accumulation so both engines round identically
  const std::size_t plane = static_cast<std::size_t>(d.ho) * d.wo;
  for (int i = 0; i < d.n; ++i) {
    for (int o = 0; o < d.o; ++o) {
      const T bv = b->value.data[o];
      T* p = out.data.data() + i * ystride + o * plane;
      for (std::size_t l = 0; l < plane; ++l) p[l] = p[l] + bv;
    }
  }

  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;

  ValueT<T>* self = node.get();
  node->backprop = [self, x, w, b, d, xstride, ystride, plane]() {
    const TensorT<T>& dy = self->grad;
    bias_grad(dy, b, d.o);

    const ConvEngine engine = conv_engine();
    const int K = d.patch();
    const int L = d.cols();

    if (w->requires_grad) w->ensure_grad();
    if (x->requires_grad) x->ensure_grad();

    if (engine == ConvEngine::Im2col) {
      std::vector<T> cols(static_cast<std::size_t>(K) * L);
      std::vector<T> dyt(static_cast<std::size_t>(L) * d.o);
      std::vector<T> dwt;
      std::vector<T> wt;
      std::vector<T> dcols;
      if (w->requires_grad) dwt.assign(static_cast<std::size_t>(K) * d.o, T(0));
      if (x->requires_grad) {
        wt.resize(static_cast<std::size_t>(K) * d.o);
        transpose_t(w->value.data.data(), wt.data(), d.o, K);
        dcols.resize(static_cast<std::size_t>(K) * L);
      }
      for (int i = 0; i < d.n; ++i) {
        const T* dyi = dy.data.data() + i * ystride;
        if (w->requires_grad) {
          im2col(x->value.data.data() + i * xstride, d, cols.data());
          transpose_t(dyi, dyt.data(), d.o, L);
          gemm_t<T>(cols.data(), dyt.data(), dwt.data(), K, L, d.o, true);
        }
        if (x->requires_grad) {
          gemm_t<T>(wt.data(), dyi, dcols.data(), K, d.o, L, false);
          ConvDims dn = d;
          col2im_add(dcols.data(), dn, x->grad.data.data() + i * xstride);
        }
      }
      if (w->requires_grad) {
        for (int o = 0; o < d.o; ++o) {
          for (int kidx = 0; kidx < K; ++kidx) {
            w->grad.data[static_cast<std::size_t>(o) * K + kidx] +=
                dwt[static_cast<std::size_t>(kidx) * d.o + o];
          }
        }
      }
      return;
    }

    // direct engine
    const std::size_t xplane = static_cast<std::size_t>(d.h) * d.w;
    if (w->requires_grad) {
      for (int o = 0; o < d.o; ++o) {
        T* wg = w->grad.data.data() + static_cast<std::size_t>(o) * K;
        for (int c = 0; c < d.c; ++c) {
          for (int i = 0; i < d.kh; ++i) {
            for (int j = 0; j < d.kw; ++j) {
              T acc = T(0);
              for (int n = 0; n < d.n; ++n) {
                const T* dyo = dy.data.data() + n * ystride + o * plane;
                const T* xc = x->value.data.data() + n * xstride + c * xplane;
                for (int ho = 0; ho < d.ho; ++ho) {
                  const int hi = ho * d.stride - d.pad + i;
                  for (int wo = 0; wo < d.wo; ++wo) {
                    const int wi = wo * d.stride - d.pad + j;
                    acc = acc + dyo[ho * d.wo + wo] * padded_at(xc, d.h, d.w, hi, wi);
                  }
                }
              }
              wg[(c * d.kh + i) * d.kw + j] += acc;
            }
          }
        }
      }
    }
    if (x->requires_grad) {
      for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.c; ++c) {
          T* xg = x->grad.data.data() + n * xstride + c * xplane;
          for (int h = 0; h < d.h; ++h) {
            for (int wpos = 0; wpos < d.w; ++wpos) {
              T acc = T(0);
              for (int o = 0; o < d.o; ++o) {
                const T* dyo = dy.data.data() + n * ystride + o * plane;
                const T* wrow = w->value.data.data() +
                                (static_cast<std::size_t>(o) * d.c + c) * d.kh * d.kw;
                for (int i = 0; i < d.kh; ++i) {
                  const int honum = h + d.pad - i;
                  if (honum < 0 || honum % d.stride != 0) continue;
                  const int ho = honum / d.stride;
                  if (ho >= d.ho) continue;
                  for (int j = 0; j < d.kw; ++j) {
                    const int wonum = wpos + d.pad - j;
                    if (wonum < 0 || wonum % d.stride != 0) continue;
                    const int wo = wonum / d.stride;
                    if (wo >= d.wo) continue;
                    acc = acc + dyo[ho * d.wo + wo] * wrow[i * d.kw + j];
                  }
                }
              }
              xg[h * d.w + wpos] += acc;
            }
          }
        }
      }
    }
  };
  return node;
}

// ---------------------------------------------------------------------------
// conv_transpose2d
// ---------------------------------------------------------------------------

template <typename T>
ValuePtrT<T> conv_transpose2d(TapeT<T>& tape, const ValuePtrT<T>& x,
                              const ValuePtrT<T>& w, const ValuePtrT<T>& b,
                              int stride, int padding) {
  const Shape xs = x->value.shape;
  const Shape ws = w->value.shape;  // [Cin, Cout, kh, kw]
  if (xs.rank != 4 || ws.rank != 4) {
    raise(ErrorCode::ShapeMismatch, "conv_transpose expects rank-4 input and weight");
  }
  if (xs.c() != ws.n()) {
    raise(ErrorCode::ShapeMismatch, "input channels must equal weight dim 0");
  }
  const int cout = ws.c();
  if (b->value.numel() != static_cast<std::size_t>(cout)) {
    raise(ErrorCode::ShapeMismatch, "bias length must equal output channels");
  }
  if (stride < 1 || padding < 0) {
    raise(ErrorCode::ShapeMismatch, "stride must be >= 1 and padding >= 0");
  }
  const int ho = (xs.h() - 1) * stride - 2 * padding + ws.h();
  const int wo = (xs.w() - 1) * stride - 2 * padding + ws.w();
  if (ho < 1 || wo < 1) {
    raise(ErrorCode::ShapeMismatch, "conv_transpose output collapses below 1x1");
  }

  // Geometry of the adjoint conv2d: its "input" is this op's output.
  ConvDims d{xs.n(), cout, ho, wo, xs.c(), ws.h(), ws.w(), stride, padding,
             xs.h(), xs.w()};
  const int K = d.patch();  // cout * kh * kw
  const int L = d.cols();   // xs.h * xs.w
  const std::size_t xstride = static_cast<std::size_t>(xs.c()) * L;
  const std::size_t ystride = static_cast<std::size_t>(cout) * ho * wo;

  TensorT<T> out(Shape::of4(d.n, cout, ho, wo));
  {
    std::vector<T> wt(static_cast<std::size_t>(K) * xs.c());
    transpose_t(w->value.data.data(), wt.data(), xs.c(), K);
    std::vector<T> dcols(static_cast<std::size_t>(K) * L);
    for (int i = 0; i < d.n; ++i) {
      gemm_t<T>(wt.data(), x->value.data.data() + i * xstride, dcols.data(), K,
                xs.c(), L, false);
      col2im_add(dcols.data(), d, out.data.data() + i * ystride);
    }
  }
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int i = 0; i < d.n; ++i) {
    for (int o = 0; o < cout; ++o) {
      const T bv = b->value.data[o];
      T* p = out.data.data() + i * ystride + o * plane;
      for (std::size_t l = 0; l < plane; ++l) p[l] = p[l] + bv;
    }
  }

  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;

  const int cin = xs.c();
  ValueT<T>* self = node.get();
  node->backprop = [self, x, w, b, d, K, L, cin, xstride, ystride]() {
    const TensorT<T>& dy = self->grad;  // shape of this op's output
    bias_grad(dy, b, d.c);

    if (w->requires_grad) w->ensure_grad();
    if (x->requires_grad) x->ensure_grad();

    std::vector<T> cols(static_cast<std::size_t>(K) * L);
    std::vector<T> xt;
    std::vector<T> dwt;
    if (w->requires_grad) {
      xt.resize(static_cast<std::size_t>(L) * cin);
      dwt.assign(static_cast<std::size_t>(K) * cin, T(0));
    }
    for (int i = 0; i < d.n; ++i) {
      im2col(dy.data.data() + i * ystride, d, cols.data());
      if (x->requires_grad) {
        // dx = w . cols, the adjoint conv's forward
        gemm_t<T>(w->value.data.data(), cols.data(),
                  x->grad.data.data() + i * xstride, cin, K, L, true);
      }
      if (w->requires_grad) {
        transpose_t(x->value.data.data() + i * xstride, xt.data(), cin, L);
        gemm_t<T>(cols.data(), xt.data(), dwt.data(), K, L, cin, true);
      }
    }
    if (w->requires_grad) {
      for (int ci = 0; ci < cin; ++ci) {
        for (int kidx = 0; kidx < K; ++kidx) {
          w->grad.data[static_cast<std::size_t>(ci) * K + kidx] +=
              dwt[static_cast<std::size_t>(kidx) * cin + ci];
        }
      }
    }
  };
  return node;
}

// ---------------------------------------------------------------------------
// batch norm
// ---------------------------------------------------------------------------

template <typename T>
ValuePtrT<T> batch_norm(TapeT<T>& tape, const ValuePtrT<T>& x,
                        const ValuePtrT<T>& gamma, const ValuePtrT<T>& beta,
                        BnStateT<T>& state, Mode mode, T momentum, T eps) {
  const Shape xs = x->value.shape;
  if (xs.rank != 4) raise(ErrorCode::ShapeMismatch, "batch_norm expects NCHW");
  const int C = xs.c();
  if (gamma->value.numel() != static_cast<std::size_t>(C) ||
      beta->value.numel() != static_cast<std::size_t>(C) ||
      state.running_mean.numel() != static_cast<std::size_t>(C) ||
      state.running_var.numel() != static_cast<std::size_t>(C)) {
    raise(ErrorCode::ShapeMismatch, "per-channel parameter size mismatch");
  }
  const int N = xs.n();
  const std::size_t plane = static_cast<std::size_t>(xs.h()) * xs.w();
  const std::size_t cstride = static_cast<std::size_t>(C) * plane;
  const double m_count = static_cast<double>(N) * plane;

  std::vector<T> mean(C), inv_std(C);
  if (mode == Mode::Train) {
    for (int c = 0; c < C; ++c) {
      double sum = 0.0;
      for (int n = 0; n < N; ++n) {
        const T* p = x->value.data.data() + n * cstride + c * plane;
        for (std::size_t l = 0; l < plane; ++l) sum += static_cast<double>(p[l]);
      }
      const double mu = sum / m_count;
      double sq = 0.0;
      for (int n = 0; n < N; ++n) {
        const T* p = x->value.data.data() + n * cstride + c * plane;
        for (std::size_t l = 0; l < plane; ++l) {
          const double dv = static_cast<double>(p[l]) - mu;
          sq += dv * dv;
        }
      }
      const double var = sq / m_count;
      mean[c] = static_cast<T>(mu);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      const double unbiased = m_count > 1.0 ? sq / (m_count - 1.0) : var;
      state.running_mean.data[c] = static_cast<T>(
          (1.0 - static_cast<double>(momentum)) * state.running_mean.data[c] +
          static_cast<double>(momentum) * mu);
      state.running_var.data[c] = static_cast<T>(
          (1.0 - static_cast<double>(momentum)) * state.running_var.data[c] +
          static_cast<double>(momentum) * unbiased);
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = state.running_mean.data[c];
      inv_std[c] = static_cast<T>(
          1.0 / std::sqrt(static_cast<double>(state.running_var.data[c]) +
                          static_cast<double>(eps)));
    }
  }

  auto xhat = std::make_shared<TensorT<T>>(xs);
  TensorT<T> out(xs);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const T* p = x->value.data.data() + n * cstride + c * plane;
      T* ph = xhat->data.data() + n * cstride + c * plane;
      T* po = out.data.data() + n * cstride + c * plane;
      const T g = gamma->value.data[c];
      const T bta = beta->value.data[c];
      for (std::size_t l = 0; l < plane; ++l) {
        const T h = (p[l] - mean[c]) * inv_std[c];
        ph[l] = h;
        po[l] = g * h + bta;
      }
    }
  }

  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;

  ValueT<T>* self = node.get();
  node->backprop = [self, x, gamma, beta, xhat, inv_std, mode, N, C, plane,
                    cstride, m_count]() {
    const TensorT<T>& dy = self->grad;

    std::vector<double> sum_dy(C, 0.0), sum_dy_xhat(C, 0.0);
    for (int c = 0; c < C; ++c) {
      for (int n = 0; n < N; ++n) {
        const T* pdy = dy.data.data() + n * cstride + c * plane;
        const T* ph = xhat->data.data() + n * cstride + c * plane;
        for (std::size_t l = 0; l < plane; ++l) {
          sum_dy[c] += static_cast<double>(pdy[l]);
          sum_dy_xhat[c] += static_cast<double>(pdy[l]) * ph[l];
        }
      }
    }
    if (gamma->requires_grad) {
      gamma->ensure_grad();
      for (int c = 0; c < C; ++c) gamma->grad.data[c] += static_cast<T>(sum_dy_xhat[c]);
    }
    if (beta->requires_grad) {
      beta->ensure_grad();
      for (int c = 0; c < C; ++c) beta->grad.data[c] += static_cast<T>(sum_dy[c]);
    }
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (int c = 0; c < C; ++c) {
      const double g = static_cast<double>(gamma->value.data[c]);
      const double istd = static_cast<double>(inv_std[c]);
      if (mode == Mode::Eval) {
        const T k = static_cast<T>(g * istd);
        for (int n = 0; n < N; ++n) {
          const T* pdy = dy.data.data() + n * cstride + c * plane;
          T* pdx = x->grad.data.data() + n * cstride + c * plane;
          for (std::size_t l = 0; l < plane; ++l) pdx[l] += k * pdy[l];
        }
        continue;
      }
      const double mean_dy = sum_dy[c] / m_count;
      const double mean_dy_xhat = sum_dy_xhat[c] / m_count;
      for (int n = 0; n < N; ++n) {
        const T* pdy = dy.data.data() + n * cstride + c * plane;
        const T* ph = xhat->data.data() + n * cstride + c * plane;
        T* pdx = x->grad.data.data() + n * cstride + c * plane;
        for (std::size_t l = 0; l < plane; ++l) {
          const double t = static_cast<double>(pdy[l]) - mean_dy -
                           static_cast<double>(ph[l]) * mean_dy_xhat;
          pdx[l] += static_cast<T>(g * istd * t);
        }
      }
    }
  };
  return node;
}

// ---------------------------------------------------------------------------
// elementwise activations
// ---------------------------------------------------------------------------

template <typename T>
ValuePtrT<T> leaky_relu(TapeT<T>& tape, const ValuePtrT<T>& x, T slope) {
  TensorT<T> out(x->value.shape);
  const std::size_t n = out.numel();
  if constexpr (std::is_same_v<T, float>) {
    simd::leaky_relu(x->value.data.data(), out.data.data(), n, slope);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const T v = x->value.data[i];
      out.data[i] = v > T(0) ? v : slope * v;
    }
  }
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x, slope, n]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    if constexpr (std::is_same_v<T, float>) {
      std::vector<T> dx(n);
      simd::leaky_relu_grad(x->value.data.data(), self->grad.data.data(), dx.data(),
                            n, slope);
      simd::add(x->grad.data.data(), dx.data(), x->grad.data.data(), n);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const T v = x->value.data[i];
        x->grad.data[i] += v > T(0) ? self->grad.data[i] : slope * self->grad.data[i];
      }
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> relu(TapeT<T>& tape, const ValuePtrT<T>& x) {
  return leaky_relu(tape, x, T(0));
}

template <typename T>
ValuePtrT<T> tanh_act(TapeT<T>& tape, const ValuePtrT<T>& x) {
  TensorT<T> out(x->value.shape);
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = std::tanh(x->value.data[i]);
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self->value.numel(); ++i) {
      const T y = self->value.data[i];
      x->grad.data[i] += self->grad.data[i] * (T(1) - y * y);
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> sigmoid_act(TapeT<T>& tape, const ValuePtrT<T>& x) {
  TensorT<T> out(x->value.shape);
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out.data[i] = T(1) / (T(1) + std::exp(-x->value.data[i]));
  }
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self->value.numel(); ++i) {
      const T y = self->value.data[i];
      x->grad.data[i] += self->grad.data[i] * y * (T(1) - y);
    }
  };
  return node;
}

// ---------------------------------------------------------------------------
// pooling / dropout / shape ops
// ---------------------------------------------------------------------------

template <typename T>
ValuePtrT<T> max_pool2d(TapeT<T>& tape, const ValuePtrT<T>& x, int k, int stride) {
  const Shape xs = x->value.shape;
  if (xs.rank != 4) raise(ErrorCode::ShapeMismatch, "max_pool2d expects NCHW");
  if (k < 1 || stride < 1) raise(ErrorCode::ShapeMismatch, "pool size/stride must be >= 1");
  const int hnum = xs.h() - k;
  const int wnum = xs.w() - k;
  if (hnum < 0 || wnum < 0 || hnum % stride != 0 || wnum % stride != 0) {
    raise(ErrorCode::NonIntegralOutput, "pool output dims not integral");
  }
  const int ho = hnum / stride + 1;
  const int wo = wnum / stride + 1;
  const int N = xs.n(), C = xs.c();

  TensorT<T> out(Shape::of4(N, C, ho, wo));
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  std::size_t oi = 0;
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const std::size_t base =
          (static_cast<std::size_t>(n) * C + c) * xs.h() * xs.w();
      for (int oh = 0; oh < ho; ++oh) {
        for (int ow = 0; ow < wo; ++ow, ++oi) {
          T best{};
          std::size_t best_idx = 0;
          bool first = true;
          for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
              const std::size_t idx =
                  base + static_cast<std::size_t>(oh * stride + i) * xs.w() +
                  (ow * stride + j);
              const T v = x->value.data[idx];
              if (first || v > best) {  // strict '>' keeps the first max
                best = v;
                best_idx = idx;
                first = false;
              }
            }
          }
          out.data[oi] = best;
          (*argmax)[oi] = best_idx;
        }
      }
    }
  }

  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x, argmax]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self->grad.numel(); ++i) {
      x->grad.data[(*argmax)[i]] += self->grad.data[i];
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> dropout(TapeT<T>& tape, const ValuePtrT<T>& x, T p, CounterRng& rng,
                     Mode mode) {
  if (!(p >= T(0) && p < T(1))) {
    raise(ErrorCode::ShapeMismatch, "dropout probability must lie in [0,1)");
  }
  if (mode == Mode::Eval) return reshape(tape, x, x->value.shape);

  const std::size_t n = x->value.numel();
  auto mask = std::make_shared<std::vector<T>>(n);
  const T keep_scale = T(1) / (T(1) - p);
  TensorT<T> out(x->value.shape);
  for (std::size_t i = 0; i < n; ++i) {
    const T m = rng.next_bernoulli(static_cast<float>(p)) ? T(0) : keep_scale;
    (*mask)[i] = m;
    out.data[i] = x->value.data[i] * m;
  }
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x, mask]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self->grad.numel(); ++i) {
      x->grad.data[i] += self->grad.data[i] * (*mask)[i];
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> concat_channels(TapeT<T>& tape, const ValuePtrT<T>& a,
                             const ValuePtrT<T>& b) {
  const Shape as = a->value.shape, bs = b->value.shape;
  if (as.rank != 4 || bs.rank != 4 || as.n() != bs.n() || as.h() != bs.h() ||
      as.w() != bs.w()) {
    raise(ErrorCode::ShapeMismatch, "concat_channels needs matching N,H,W");
  }
  const std::size_t plane = static_cast<std::size_t>(as.h()) * as.w();
  const std::size_t a_ch = static_cast<std::size_t>(as.c()) * plane;
  const std::size_t b_ch = static_cast<std::size_t>(bs.c()) * plane;
  TensorT<T> out(Shape::of4(as.n(), as.c() + bs.c(), as.h(), as.w()));
  for (int n = 0; n < as.n(); ++n) {
    std::copy_n(a->value.data.data() + n * a_ch, a_ch,
                out.data.data() + n * (a_ch + b_ch));
    std::copy_n(b->value.data.data() + n * b_ch, b_ch,
                out.data.data() + n * (a_ch + b_ch) + a_ch);
  }
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, a, b, a_ch, b_ch, n_items = as.n()]() {
    for (int n = 0; n < n_items; ++n) {
      const T* g = self->grad.data.data() + n * (a_ch + b_ch);
      if (a->requires_grad) {
        a->ensure_grad();
        T* ga = a->grad.data.data() + n * a_ch;
        for (std::size_t i = 0; i < a_ch; ++i) ga[i] += g[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        T* gb = b->grad.data.data() + n * b_ch;
        for (std::size_t i = 0; i < b_ch; ++i) gb[i] += g[a_ch + i];
      }
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> reshape(TapeT<T>& tape, const ValuePtrT<T>& x, Shape shape) {
  if (shape.numel() != x->value.numel()) {
    raise(ErrorCode::ShapeMismatch, "reshape must preserve element count");
  }
  TensorT<T> out(shape, x->value.data);
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self->grad.numel(); ++i) {
      x->grad.data[i] += self->grad.data[i];
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> add(TapeT<T>& tape, const ValuePtrT<T>& a, const ValuePtrT<T>& b) {
  if (!(a->value.shape == b->value.shape)) {
    raise(ErrorCode::ShapeMismatch, "add needs matching shapes");
  }
  TensorT<T> out(a->value.shape);
  const std::size_t n = out.numel();
  if constexpr (std::is_same_v<T, float>) {
    simd::add(a->value.data.data(), b->value.data.data(), out.data.data(), n);
  } else {
    for (std::size_t i = 0; i < n; ++i) out.data[i] = a->value.data[i] + b->value.data[i];
  }
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, a, b]() {
    for (const auto& p : {a, b}) {
      if (!p->requires_grad) continue;
      p->ensure_grad();
      for (std::size_t i = 0; i < self->grad.numel(); ++i) {
        p->grad.data[i] += self->grad.data[i];
      }
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> scale_by(TapeT<T>& tape, const ValuePtrT<T>& x, T factor) {
  TensorT<T> out(x->value.shape);
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = factor * x->value.data[i];
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x, factor]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::size_t i = 0; i < self->grad.numel(); ++i) {
      x->grad.data[i] += factor * self->grad.data[i];
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> sum_all(TapeT<T>& tape, const ValuePtrT<T>& x) {
  double acc = 0.0;
  for (const T v : x->value.data) acc += static_cast<double>(v);
  TensorT<T> out(Shape::scalar());
  out.data[0] = static_cast<T>(acc);
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, x]() {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const T g = self->grad.data[0];
    for (std::size_t i = 0; i < x->grad.numel(); ++i) x->grad.data[i] += g;
  };
  return node;
}

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

namespace {
template <typename T>
constexpr T kBceClampLo = T(1e-7);
}

template <typename T>
ValuePtrT<T> bce_loss(TapeT<T>& tape, const ValuePtrT<T>& pred,
                      const TensorT<T>& target) {
  if (!(pred->value.shape == target.shape)) {
    raise(ErrorCode::ShapeMismatch, "bce target shape mismatch");
  }
  const std::size_t n = pred->value.numel();
  if (n == 0) raise(ErrorCode::ShapeMismatch, "bce on empty tensor");
  const T lo = kBceClampLo<T>;
  const T hi = T(1) - lo;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::clamp(pred->value.data[i], lo, hi);
    const double t = target.data[i];
    acc += t * std::log(c) + (1.0 - t) * std::log(1.0 - c);
  }
  TensorT<T> out(Shape::scalar());
  out.data[0] = static_cast<T>(-acc / static_cast<double>(n));
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  auto tgt = std::make_shared<TensorT<T>>(target);
  node->backprop = [self, pred, tgt, n, lo, hi]() {
    if (!pred->requires_grad) return;
    pred->ensure_grad();
    const T g = self->grad.data[0];
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const T v = pred->value.data[i];
      if (v <= lo || v >= hi) continue;  // clamp region has zero slope
      const T t = tgt->data[i];
      pred->grad.data[i] += g * inv_n * (-(t / v) + (T(1) - t) / (T(1) - v));
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> bce_loss(TapeT<T>& tape, const ValuePtrT<T>& pred, T target_fill) {
  TensorT<T> target(pred->value.shape, target_fill);
  return bce_loss(tape, pred, target);
}

template <typename T>
ValuePtrT<T> l1_loss(TapeT<T>& tape, const ValuePtrT<T>& a, const ValuePtrT<T>& b) {
  if (!(a->value.shape == b->value.shape)) {
    raise(ErrorCode::ShapeMismatch, "l1 shapes differ");
  }
  const std::size_t n = a->value.numel();
  if (n == 0) raise(ErrorCode::ShapeMismatch, "l1 on empty tensor");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::abs(static_cast<double>(a->value.data[i]) - b->value.data[i]);
  }
  TensorT<T> out(Shape::scalar());
  out.data[0] = static_cast<T>(acc / static_cast<double>(n));
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  node->backprop = [self, a, b, n]() {
    const T g = self->grad.data[0];
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const T d = a->value.data[i] - b->value.data[i];
      const T s = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
      if (a->requires_grad) {
        a->ensure_grad();
        a->grad.data[i] += g * inv_n * s;
      }
      if (b->requires_grad) {
        b->ensure_grad();
        b->grad.data[i] -= g * inv_n * s;
      }
    }
  };
  return node;
}

template <typename T>
ValuePtrT<T> softmax_cross_entropy(TapeT<T>& tape, const ValuePtrT<T>& logits,
                                   const std::vector<int>& labels) {
  const Shape ls = logits->value.shape;
  if (ls.rank != 2) raise(ErrorCode::ShapeMismatch, "logits must be [N,K]");
  const int N = ls.n(), K = ls.c();
  if (static_cast<int>(labels.size()) != N) {
    raise(ErrorCode::ShapeMismatch, "label count != batch size");
  }
  for (int lbl : labels) {
    if (lbl < 0 || lbl >= K) {
      raise(ErrorCode::LabelOutOfRange, "label " + std::to_string(lbl));
    }
  }
  auto probs = std::make_shared<TensorT<T>>(ls);
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    const T* row = logits->value.data.data() + static_cast<std::size_t>(i) * K;
    T* prow = probs->data.data() + static_cast<std::size_t>(i) * K;
    T mx = row[0];
    for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k] - mx));
    const double lse = std::log(denom);
    for (int k = 0; k < K; ++k) {
      prow[k] = static_cast<T>(std::exp(static_cast<double>(row[k] - mx)) / denom);
    }
    acc += lse - static_cast<double>(row[labels[i]] - mx);
  }
  TensorT<T> out(Shape::scalar());
  out.data[0] = static_cast<T>(acc / N);
  auto node = tape.record(std::move(out));
  if (!tape.grad_enabled()) return node;
  ValueT<T>* self = node.get();
  auto lbls = std::make_shared<std::vector<int>>(labels);
  node->backprop = [self, logits, probs, lbls, N, K]() {
    if (!logits->requires_grad) return;
    logits->ensure_grad();
    const T g = self->grad.data[0];
    const T inv_n = T(1) / static_cast<T>(N);
    for (int i = 0; i < N; ++i) {
      const T* prow = probs->data.data() + static_cast<std::size_t>(i) * K;
      T* grow = logits->grad.data.data() + static_cast<std::size_t>(i) * K;
      for (int k = 0; k < K; ++k) {
        const T onehot = k == (*lbls)[i] ? T(1) : T(0);
        grow[k] += g * inv_n * (prow[k] - onehot);
      }
    }
  };
  return node;
}

template <typename T>
TensorT<T> softmax_rows(const TensorT<T>& logits) {
  const int N = logits.shape.n(), K = logits.shape.c();
  TensorT<T> probs(logits.shape);
  for (int i = 0; i < N; ++i) {
    const T* row = logits.data.data() + static_cast<std::size_t>(i) * K;
    T* prow = probs.data.data() + static_cast<std::size_t>(i) * K;
    T mx = row[0];
    for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k] - mx));
    for (int k = 0; k < K; ++k) {
      prow[k] = static_cast<T>(std::exp(static_cast<double>(row[k] - mx)) / denom);
    }
  }
  return probs;
}

// ---------------------------------------------------------------------------
// explicit instantiations (float = production, double = gradient checking)
// ---------------------------------------------------------------------------

#define EVNAT_INSTANTIATE_OPS(T)                                                      \
  template ValuePtrT<T> constant<T>(TapeT<T>&, TensorT<T>);                           \
  template ValuePtrT<T> conv2d<T>(TapeT<T>&, const ValuePtrT<T>&, const ValuePtrT<T>&,\
                                  const ValuePtrT<T>&, int, int);                     \
  template ValuePtrT<T> conv_transpose2d<T>(TapeT<T>&, const ValuePtrT<T>&,           \
                                            const ValuePtrT<T>&, const ValuePtrT<T>&, \
                                            int, int);                                \
  template ValuePtrT<T> batch_norm<T>(TapeT<T>&, const ValuePtrT<T>&,                 \
                                      const ValuePtrT<T>&, const ValuePtrT<T>&,       \
                                      BnStateT<T>&, Mode, T, T);                      \
  template ValuePtrT<T> leaky_relu<T>(TapeT<T>&, const ValuePtrT<T>&, T);             \
  template ValuePtrT<T> relu<T>(TapeT<T>&, const ValuePtrT<T>&);                      \
  template ValuePtrT<T> tanh_act<T>(TapeT<T>&, const ValuePtrT<T>&);                  \
  template ValuePtrT<T> sigmoid_act<T>(TapeT<T>&, const ValuePtrT<T>&);               \
  template ValuePtrT<T> max_pool2d<T>(TapeT<T>&, const ValuePtrT<T>&, int, int);      \
  template ValuePtrT<T> dropout<T>(TapeT<T>&, const ValuePtrT<T>&, T, CounterRng&,    \
                                   Mode);                                             \
  template ValuePtrT<T> concat_channels<T>(TapeT<T>&, const ValuePtrT<T>&,            \
                                           const ValuePtrT<T>&);                      \
  template ValuePtrT<T> reshape<T>(TapeT<T>&, const ValuePtrT<T>&, Shape);            \
  template ValuePtrT<T> add<T>(TapeT<T>&, const ValuePtrT<T>&, const ValuePtrT<T>&);  \
  template ValuePtrT<T> scale_by<T>(TapeT<T>&, const ValuePtrT<T>&, T);               \
  template ValuePtrT<T> sum_all<T>(TapeT<T>&, const ValuePtrT<T>&);                   \
  template ValuePtrT<T> bce_loss<T>(TapeT<T>&, const ValuePtrT<T>&,                   \
                                    const TensorT<T>&);                               \
  template ValuePtrT<T> bce_loss<T>(TapeT<T>&, const ValuePtrT<T>&, T);               \
  template ValuePtrT<T> l1_loss<T>(TapeT<T>&, const ValuePtrT<T>&,                    \
                                   const ValuePtrT<T>&);                              \
  template ValuePtrT<T> softmax_cross_entropy<T>(TapeT<T>&, const ValuePtrT<T>&,      \
                                                 const std::vector<int>&);            \
  template TensorT<T> softmax_rows<T>(const TensorT<T>&);

EVNAT_INSTANTIATE_OPS(float)
EVNAT_INSTANTIATE_OPS(double)

#undef EVNAT_INSTANTIATE_OPS

}  // namespace evnat::nn
