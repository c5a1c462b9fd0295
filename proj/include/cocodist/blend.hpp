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

#ifndef COCODIST_BLEND_HPP_
#define COCODIST_BLEND_HPP_

#include <vector>

#include "cocodist/convolve.hpp"
#include "cocodist/error.hpp"
#include "cocodist/image.hpp"
#include "cocodist/mask.hpp"

namespace cocodist {

// output = alpha*modified + (1-alpha)*base, where alpha is the mask softened
// by a normalized box blur of the given radius. alpha is exactly 0 outside
// the blurred support, so pixels there reproduce base bit-for-bit.
inline FloatImage blend_masked(const FloatImage& base, const FloatImage& modified,
                               const BinaryMask& mask, int feather) {
  if (!base.same_shape(modified) || base.width != mask.width || base.height != mask.height) {
    throw ShapeError("blend_masked: dimensions differ");
  }
  const int w = base.width, h = base.height;
  std::vector<float> alpha(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = mask.bits[i] ? 1.0f : 0.0f;
  alpha = box_blur_plane(alpha, w, h, feather);

  FloatImage out(w, h);
  for (std::size_t p = 0; p < alpha.size(); ++p) {
    const float a = alpha[p];
    const float* b = &base.data[p * kChannels];
    const float* m = &modified.data[p * kChannels];
    float* d = &out.data[p * kChannels];
    if (a == 0.0f) {
      d[0] = b[0];
      d[1] = b[1];
      d[2] = b[2];
    } else if (a == 1.0f) {
      d[0] = m[0];
      d[1] = m[1];
      d[2] = m[2];
    } else {
      d[0] = a * m[0] + (1.0f - a) * b[0];
      d[1] = a * m[1] + (1.0f - a) * b[1];
      d[2] = a * m[2] + (1.0f - a) * b[2];
    }
  }
  return out;
}

}  // namespace cocodist

#endif  // COCODIST_BLEND_HPP_
