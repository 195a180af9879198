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

// The pipeline runs in double with a fixed tap order. tests/oracle/
// canny_reference.py mirrors these loops operation-for-operation; the golden
// fixture comparison relies on both sides making identical IEEE decisions.

#include "evnat/edge/canny.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "evnat/core/error.hpp"
#include "evnat/io/pnm.hpp"

namespace evnat {

namespace {

// reflect without repeating the border sample: -1 -> 1, n -> n-2
int reflect(int idx, int n) {
  if (n == 1) return 0;
  while (idx < 0 || idx >= n) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * n - 2 - idx;
  }
  return idx;
}

std::vector<double> to_double_gray(const ImageBuffer& image) {
  const ImageBuffer gray = image.channels() == 3 ? image.luminance() : image;
  std::vector<double> out(static_cast<std::size_t>(gray.height()) * gray.width());
  if (gray.kind() == ImageBuffer::Kind::U8) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = gray.u8_data()[i] / 255.0;
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<double>(gray.real_data()[i]);
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

void blur_d(const std::vector<double>& src, int h, int w, double sigma,
            std::vector<double>& dst) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * src[static_cast<std::size_t>(y) * w + reflect(x + i, w)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  dst.resize(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * tmp[static_cast<std::size_t>(reflect(y + i, h)) * w + x];
      }
      dst[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
}

struct Tap {
  int dy, dx;
  double coeff;
};

// zero-coefficient taps omitted; the reference script lists the same taps in
// the same order
constexpr Tap kSobelX[] = {{-1, -1, -1}, {-1, 1, 1}, {0, -1, -2},
                           {0, 1, 2},    {1, -1, -1}, {1, 1, 1}};
constexpr Tap kSobelY[] = {{-1, -1, -1}, {-1, 0, -2}, {-1, 1, -1},
                           {1, -1, 1},   {1, 0, 2},   {1, 1, 1}};

void sobel_d(const std::vector<double>& src, int h, int w,
             std::vector<double>& gx, std::vector<double>& gy) {
  gx.assign(src.size(), 0.0);
  gy.assign(src.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double ax = 0.0, ay = 0.0;
      for (const Tap& t : kSobelX) {
        ax += t.coeff *
              src[static_cast<std::size_t>(reflect(y + t.dy, h)) * w + reflect(x + t.dx, w)];
      }
      for (const Tap& t : kSobelY) {
        ay += t.coeff *
              src[static_cast<std::size_t>(reflect(y + t.dy, h)) * w + reflect(x + t.dx, w)];
      }
      gx[static_cast<std::size_t>(y) * w + x] = ax;
      gy[static_cast<std::size_t>(y) * w + x] = ay;
    }
  }
}

// Direction bins by comparing |gy| against |gx|*tan(22.5/67.5 deg); libm-free
// so both implementations quantize identically.
constexpr double kTan22 = 0.41421356237309503;
constexpr double kTan67 = 2.414213562373095;

int quantize_bin(double gx, double gy) {
  const double ax = std::abs(gx);
  const double ay = std::abs(gy);
  if (ay <= ax * kTan22) return 0;
  if (ay > ax * kTan67) return 90;
  return gx * gy >= 0.0 ? 45 : 135;
}

}  // namespace

ImageBuffer gaussian_blur(const ImageBuffer& image, float sigma) {
  if (image.channels() != 1) {
    raise(ErrorCode::MultiChannelInput, "gaussian_blur expects a single channel");
  }
  if (!(sigma > 0.0f)) raise(ErrorCode::BadConfig, "sigma must be positive");
  const std::vector<double> src = to_double_gray(image);
  std::vector<double> blurred;
  blur_d(src, image.height(), image.width(), sigma, blurred);
  std::vector<float> out(blurred.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(static_cast<float>(blurred[i]), 0.0f, 1.0f);
  }
  return ImageBuffer::real(image.height(), image.width(), 1, std::move(out));
}

SobelGradients sobel_gradients(const ImageBuffer& image) {
  if (image.channels() != 1) {
    raise(ErrorCode::MultiChannelInput, "sobel_gradients expects a single channel");
  }
  const int h = image.height(), w = image.width();
  const std::vector<double> src = to_double_gray(image);
  std::vector<double> gx, gy;
  sobel_d(src, h, w, gx, gy);

  // 4*sqrt(2) bounds the magnitude for [0,1] inputs; dividing by it keeps the
  // buffer within the real-image invariant without changing relative structure
  const double mag_scale = 1.0 / (4.0 * std::sqrt(2.0));
  SobelGradients result;
  result.height = h;
  result.width = w;
  result.direction.resize(src.size());
  std::vector<float> mag(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    mag[i] = static_cast<float>(std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]) * mag_scale);
    result.direction[i] = static_cast<float>(std::atan2(gy[i], gx[i]));
  }
  result.magnitude = ImageBuffer::real(h, w, 1, std::move(mag));
  return result;
}

ImageBuffer canny(const ImageBuffer& image, const CannyParams& params) {
  if (params.low_threshold >= params.high_threshold) {
    raise(ErrorCode::ThresholdOrder, "low threshold must be below high threshold");
  }
  if (!(params.low_threshold > 0.0f) || !(params.high_threshold <= 1.0f) ||
      !(params.sigma > 0.0f)) {
    raise(ErrorCode::BadConfig, "canny parameters out of range");
  }
  const int h = image.height(), w = image.width();
  const std::vector<double> src = to_double_gray(image);

  std::vector<double> blurred;
  blur_d(src, h, w, params.sigma, blurred);
  std::vector<double> gx, gy;
  sobel_d(blurred, h, w, gx, gy);

  std::vector<double> mag(src.size());
  double max_mag = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    mag[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
    max_mag = std::max(max_mag, mag[i]);
  }
  std::vector<float> out(src.size(), 0.0f);
  if (max_mag == 0.0) {
    return ImageBuffer::real(h, w, 1, std::move(out));
  }

  // non-maximum suppression; ties keep the "before" neighbor side
  auto mag_at = [&](int y, int x) -> double {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return mag[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<double> nms(src.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int bin = quantize_bin(gx[i], gy[i]);
      double before = 0.0, after = 0.0;
      switch (bin) {
        case 0: before = mag_at(y, x - 1); after = mag_at(y, x + 1); break;
        case 45: before = mag_at(y - 1, x - 1); after = mag_at(y + 1, x + 1); break;
        case 90: before = mag_at(y - 1, x); after = mag_at(y + 1, x); break;
        default: before = mag_at(y - 1, x + 1); after = mag_at(y + 1, x - 1); break;
      }
      if (mag[i] > before && mag[i] >= after) nms[i] = mag[i];
    }
  }

  const double high = static_cast<double>(params.high_threshold) * max_mag;
  const double low = static_cast<double>(params.low_threshold) * max_mag;
  // 0 = out, 1 = weak candidate, 2 = edge
  std::vector<std::uint8_t> mark(src.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (nms[i] >= high) {
      mark[i] = 2;
      stack.push_back(i);
    } else if (nms[i] >= low) {
      mark[i] = 1;
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int y = static_cast<int>(i / w);
    const int x = static_cast<int>(i % w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
        if (mark[ni] == 1) {
          mark[ni] = 2;
          stack.push_back(ni);
        }
      }
    }
  }
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = mark[i] == 2 ? 1.0f : 0.0f;
  return ImageBuffer::real(h, w, 1, std::move(out));
}

ImageBuffer load_soft_edges(const std::string& path) {
  return read_pnm_file(path).luminance().to_real();
}

}  // namespace evnat
