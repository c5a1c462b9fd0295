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

#ifndef COCODIST_CONVOLVE_HPP_
#define COCODIST_CONVOLVE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "cocodist/error.hpp"
#include "cocodist/image.hpp"

namespace cocodist {

// Normalized non-negative weights on an odd-sided grid.
struct Kernel {
  int width = 1;
  int height = 1;
  std::vector<double> weights{1.0};

  double at(int x, int y) const { return weights[static_cast<std::size_t>(y) * width + x]; }
};

inline Kernel identity_kernel() { return Kernel{}; }

namespace detail {

// Integer Bresenham between two points; collects every visited cell.
inline void bresenham_cells(int x0, int y0, int x1, int y1,
                            std::vector<std::pair<int, int>>& cells) {
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    cells.emplace_back(x, y);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace detail

// Uniform weights on the Bresenham segment through the kernel center with
// the given direction, realizing a straight-line motion PSF.
inline Kernel motion_kernel(int length, double angle_radians) {
  if (length < 1 || length % 2 == 0) {
    throw ParameterError("motion_kernel: length must be odd and positive");
  }
  const int r = (length - 1) / 2;
  Kernel k;
  k.width = length;
  k.height = length;
  k.weights.assign(static_cast<std::size_t>(length) * length, 0.0);
  const int ex = static_cast<int>(std::lround(r * std::cos(angle_radians)));
  const int ey = static_cast<int>(std::lround(r * std::sin(angle_radians)));
  std::vector<std::pair<int, int>> cells;
  detail::bresenham_cells(-ex, -ey, ex, ey, cells);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  const double w = 1.0 / static_cast<double>(cells.size());
  for (const auto& [cx, cy] : cells) {
    k.weights[static_cast<std::size_t>(cy + r) * length + (cx + r)] = w;
  }
  return k;
}

// Side 2r+1; weight 1/N on cells whose center distance from the kernel
// center is at most r + 0.5.
inline Kernel disk_kernel(int radius) {
  if (radius < 0) throw ParameterError("disk_kernel: negative radius");
  const int side = 2 * radius + 1;
  Kernel k;
  k.width = side;
  k.height = side;
  k.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
  const double limit = (radius + 0.5) * (radius + 0.5);
  int n = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= limit) ++n;
  const double w = 1.0 / n;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= limit)
        k.weights[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] = w;
  return k;
}

inline Kernel box_kernel(int radius) {
  if (radius < 0) throw ParameterError("box_kernel: negative radius");
  const int side = 2 * radius + 1;
  Kernel k;
  k.width = side;
  k.height = side;
  k.weights.assign(static_cast<std::size_t>(side) * side, 1.0 / (static_cast<double>(side) * side));
  return k;
}

// Per-channel 2-D correlation with replicate padding. Accumulates in double;
// only non-zero taps are visited, which is exact for any summation order at
// double precision against the float data.
inline FloatImage convolve2d(const FloatImage& img, const Kernel& k) {
  if (k.width % 2 == 0 || k.height % 2 == 0) {
    throw ShapeError("convolve2d: kernel sides must be odd");
  }
  const int rx = k.width / 2, ry = k.height / 2;
  struct Tap {
    int dx, dy;
    double w;
  };
  std::vector<Tap> taps;
  taps.reserve(k.weights.size());
  for (int dy = -ry; dy <= ry; ++dy)
    for (int dx = -rx; dx <= rx; ++dx) {
      const double w = k.at(dx + rx, dy + ry);
      if (w != 0.0) taps.push_back({dx, dy, w});
    }

  const int w = img.width, h = img.height;
  FloatImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const bool y_interior = (y - ry >= 0) && (y + ry < h);
    for (int x = 0; x < w; ++x) {
      const bool interior = y_interior && (x - rx >= 0) && (x + rx < w);
      double acc[kChannels] = {0.0, 0.0, 0.0};
      if (interior) {
        for (const Tap& t : taps) {
          const float* s = &img.data[(static_cast<std::size_t>(y + t.dy) * w + (x + t.dx)) * kChannels];
          acc[0] += t.w * s[0];
          acc[1] += t.w * s[1];
          acc[2] += t.w * s[2];
        }
      } else {
        for (const Tap& t : taps) {
          const int sx = std::clamp(x + t.dx, 0, w - 1);
          const int sy = std::clamp(y + t.dy, 0, h - 1);
          const float* s = &img.data[(static_cast<std::size_t>(sy) * w + sx) * kChannels];
          acc[0] += t.w * s[0];
          acc[1] += t.w * s[1];
          acc[2] += t.w * s[2];
        }
      }
      float* d = &out.data[(static_cast<std::size_t>(y) * w + x) * kChannels];
      d[0] = static_cast<float>(acc[0]);
      d[1] = static_cast<float>(acc[1]);
      d[2] = static_cast<float>(acc[2]);
    }
  }
  return out;
}

// Normalized box blur of a single plane, separable with replicate padding.
// Zero stays exactly zero outside the support, which the blend feathering
// relies on.
inline std::vector<float> box_blur_plane(const std::vector<float>& plane, int w, int h,
                                         int radius) {
  if (radius < 0) throw ParameterError("box_blur_plane: negative radius");
  if (radius == 0) return plane;
  const double inv = 1.0 / (2 * radius + 1);
  std::vector<float> tmp(plane.size()), out(plane.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d) {
        acc += plane[static_cast<std::size_t>(y) * w + std::clamp(x + d, 0, w - 1)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc * inv);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d) {
        acc += tmp[static_cast<std::size_t>(std::clamp(y + d, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc * inv);
    }
  }
  return out;
}

}  // namespace cocodist

#endif  // COCODIST_CONVOLVE_HPP_
