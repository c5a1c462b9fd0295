// Copyright (c) 2026, the cocodist authors. All rights reserved.
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

#ifndef COCODIST_IMAGE_HPP_
#define COCODIST_IMAGE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cocodist/error.hpp"

namespace cocodist {

inline constexpr int kChannels = 3;  // interleaved RGB throughout

// External 8-bit form: row-major, channel-interleaved, values in [0,255].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * kChannels) {}

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  bool same_shape(const Image& o) const { return width == o.width && height == o.height; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height && a.data == b.data;
  }
};

// Internal working form: float samples in [0,1], same layout.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  FloatImage() = default;
  FloatImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * kChannels) {}

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  bool same_shape(const FloatImage& o) const { return width == o.width && height == o.height; }
};

inline FloatImage to_float(const Image& img) {
  FloatImage out(img.width, img.height);
  const std::size_t n = img.data.size();
  for (std::size_t i = 0; i < n; ++i) out.data[i] = img.data[i] * (1.0f / 255.0f);
  return out;
}

// Clip to [0,1] then round half up. Round-trips every 8-bit value exactly.
inline Image to_u8(const FloatImage& img) {
  Image out(img.width, img.height);
  const std::size_t n = img.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const float v = std::min(1.0f, std::max(0.0f, img.data[i]));
    out.data[i] = static_cast<std::uint8_t>(std::floor(v * 255.0f + 0.5f));
  }
  return out;
}

// 10*log10(1/MSE) over all samples in float form; +inf for identical inputs.
inline double psnr(const FloatImage& a, const FloatImage& b) {
  if (!a.same_shape(b)) throw ShapeError("psnr: image dimensions differ");
  double sum = 0.0;
  const std::size_t n = a.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sum += d * d;
  }
  if (n == 0 || sum == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sum / static_cast<double>(n);
  return 10.0 * std::log10(1.0 / mse);
}

inline double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("psnr: image dimensions differ");
  return psnr(to_float(a), to_float(b));
}

// Mean Rec.601 luminance of the float form.
inline double mean_luminance(const FloatImage& img) {
  double sum = 0.0;
  const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* s = &img.data[p * kChannels];
    sum += 0.299 * s[0] + 0.587 * s[1] + 0.114 * s[2];
  }
  return pixels == 0 ? 0.0 : sum / static_cast<double>(pixels);
}

}  // namespace cocodist

#endif  // COCODIST_IMAGE_HPP_
