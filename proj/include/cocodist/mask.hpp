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

#ifndef COCODIST_MASK_HPP_
#define COCODIST_MASK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cocodist/error.hpp"

namespace cocodist {

// One byte per pixel (0/1), row-major. RLE interchange uses the COCO
// column-major pixel order; only the codec below cares about that.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool test(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }
  bool same_shape(const BinaryMask& o) const { return width == o.width && height == o.height; }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.width == b.width && a.height == b.height && a.bits == b.bits;
  }
};

// Runs alternate starting with background; pixel index p maps to
// row p mod h, column p div h (COCO column-major convention).
inline BinaryMask decode_rle(int h, int w, const std::vector<std::uint32_t>& counts) {
  std::uint64_t total = 0;
  for (std::uint32_t c : counts) total += c;
  if (total != static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w)) {
    throw LengthError("decode_rle: run lengths cover " + std::to_string(total) +
                      " pixels, mask has " + std::to_string(static_cast<std::uint64_t>(h) * w));
  }
  BinaryMask mask(w, h);
  std::uint64_t p = 0;
  std::uint8_t v = 0;
  for (std::uint32_t c : counts) {
    for (std::uint32_t i = 0; i < c; ++i, ++p) {
      const int row = static_cast<int>(p % h);
      const int col = static_cast<int>(p / h);
      mask.bits[static_cast<std::size_t>(row) * w + col] = v;
    }
    v = !v;
  }
  return mask;
}

// Canonical form: leading zero run only when pixel 0 is set, no zero-length
// interior runs, trailing run included.
inline std::vector<std::uint32_t> encode_rle(const BinaryMask& mask) {
  std::vector<std::uint32_t> counts;
  const std::uint64_t total = static_cast<std::uint64_t>(mask.width) * mask.height;
  if (total == 0) return counts;
  std::uint8_t prev = 0;
  std::uint32_t run = 0;
  for (std::uint64_t p = 0; p < total; ++p) {
    const int row = static_cast<int>(p % mask.height);
    const int col = static_cast<int>(p / mask.height);
    const std::uint8_t v = mask.bits[static_cast<std::size_t>(row) * mask.width + col] ? 1 : 0;
    if (v != prev) {
      counts.push_back(run);
      run = 0;
      prev = v;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

// COCO compressed counts string: LEB128-like, 5 payload bits per char,
// chars offset by 48, runs at index >= 2 stored as deltas to two back.
inline std::string rle_counts_to_string(const std::vector<std::uint32_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = static_cast<std::int64_t>(counts[i]);
    if (i > 2) x -= static_cast<std::int64_t>(counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

inline std::vector<std::uint32_t> rle_counts_from_string(const std::string& s) {
  std::vector<std::uint32_t> counts;
  std::size_t k = 0;
  while (k < s.size()) {
    std::int64_t x = 0;
    int m = 0;
    bool more = true;
    while (more) {
      if (k >= s.size()) throw ParseError("rle string: truncated varint");
      const char c = static_cast<char>(s[k] - 48);
      x |= static_cast<std::int64_t>(c & 0x1f) << (5 * m);
      more = (c & 0x20) != 0;
      ++k;
      ++m;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << (5 * m));
    }
    if (counts.size() > 2) x += static_cast<std::int64_t>(counts[counts.size() - 2]);
    if (x < 0) throw ParseError("rle string: negative run length");
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  return counts;
}

// Pixel (r,c) is set iff its center (c+0.5, r+0.5) is inside any polygon by
// the even-odd rule. Scanline crossings with half-open vertex handling give
// exactly that predicate per row.
inline BinaryMask rasterize_polygons(const std::vector<std::vector<double>>& polygons,
                                     int width, int height) {
  for (const auto& poly : polygons) {
    if (poly.size() < 6 || poly.size() % 2 != 0) {
      throw GeometryError("rasterize_polygons: polygon needs at least 3 (x,y) vertices");
    }
  }
  BinaryMask mask(width, height);
  std::vector<double> xs;
  for (const auto& poly : polygons) {
    const std::size_t n = poly.size() / 2;
    for (int r = 0; r < height; ++r) {
      const double y = r + 0.5;
      xs.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const double x1 = poly[2 * i], y1 = poly[2 * i + 1];
        const std::size_t j = (i + 1) % n;
        const double x2 = poly[2 * j], y2 = poly[2 * j + 1];
        if ((y1 <= y && y < y2) || (y2 <= y && y < y1)) {
          xs.push_back(x1 + (y - y1) * (x2 - x1) / (y2 - y1));
        }
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
        // centers with xs[i] <= c+0.5 < xs[i+1]
        int c0 = static_cast<int>(std::ceil(xs[i] - 0.5));
        int c1 = static_cast<int>(std::ceil(xs[i + 1] - 0.5));  // exclusive
        c0 = std::max(c0, 0);
        c1 = std::min(c1, width);
        for (int c = c0; c < c1; ++c) mask.set(c, r);
      }
    }
  }
  return mask;
}

// Pixels whose centers fall in the half-open rect [x,x+w) x [y,y+h),
// clamped to the canvas.
inline BinaryMask filled_rect(double x, double y, double w, double h, int width, int height) {
  BinaryMask mask(width, height);
  if (w <= 0 || h <= 0) return mask;
  const int c0 = std::max(0, static_cast<int>(std::ceil(x - 0.5)));
  const int c1 = std::min(width, static_cast<int>(std::ceil(x + w - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(y - 0.5)));
  const int r1 = std::min(height, static_cast<int>(std::ceil(y + h - 0.5)));
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) mask.set(c, r);
  return mask;
}

// Square structuring element of side 2r+1 (a Chebyshev ball), run as two
// separable 1-D passes.
inline BinaryMask dilate(const BinaryMask& mask, int r) {
  if (r < 0) throw ParameterError("dilate: negative radius");
  if (r == 0) return mask;
  const int w = mask.width, h = mask.height;
  BinaryMask tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dx = -r; dx <= r && !v; ++dx) {
        const int xx = x + dx;
        if (xx >= 0 && xx < w) v = mask.bits[static_cast<std::size_t>(y) * w + xx];
      }
      tmp.bits[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dy = -r; dy <= r && !v; ++dy) {
        const int yy = y + dy;
        if (yy >= 0 && yy < h) v = tmp.bits[static_cast<std::size_t>(yy) * w + x];
      }
      out.bits[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  return out;
}

// dilate(mask, r) minus mask.
inline BinaryMask ring(const BinaryMask& mask, int r) {
  BinaryMask out = dilate(mask, r);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    if (mask.bits[i]) out.bits[i] = 0;
  }
  return out;
}

inline BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw ShapeError("mask_union: dimensions differ");
  BinaryMask out = a;
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = out.bits[i] | b.bits[i];
  return out;
}

}  // namespace cocodist

#endif  // COCODIST_MASK_HPP_
