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

#ifndef COCODIST_DISTORTIONS_HPP_
#define COCODIST_DISTORTIONS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cocodist/blend.hpp"
#include "cocodist/coco.hpp"
#include "cocodist/convolve.hpp"
#include "cocodist/image.hpp"
#include "cocodist/image_io.hpp"
#include "cocodist/mask.hpp"
#include "cocodist/rng.hpp"

namespace cocodist {

// 7 global kinds followed by 3 local kinds. Enum order is the kind index
// used by derive_seed and by manifests, so it must stay stable.
enum class DistortionKind : int {
  kNoise = 0,
  kContrast = 1,
  kCompression = 2,
  kRain = 3,
  kHaze = 4,
  kMotionBlur = 5,
  kDefocusBlur = 6,
  kLocMotionBlur = 7,
  kLocDefocus = 8,
  kBackLight = 9,
};

inline constexpr std::array<DistortionKind, 10> kAllKinds = {
    DistortionKind::kNoise,        DistortionKind::kContrast,
    DistortionKind::kCompression,  DistortionKind::kRain,
    DistortionKind::kHaze,         DistortionKind::kMotionBlur,
    DistortionKind::kDefocusBlur,  DistortionKind::kLocMotionBlur,
    DistortionKind::kLocDefocus,   DistortionKind::kBackLight,
};

inline constexpr int kind_index(DistortionKind k) { return static_cast<int>(k); }

inline constexpr bool is_local(DistortionKind k) {
  return k == DistortionKind::kLocMotionBlur || k == DistortionKind::kLocDefocus ||
         k == DistortionKind::kBackLight;
}

inline std::string_view kind_name(DistortionKind k) {
  switch (k) {
    case DistortionKind::kNoise: return "noise";
    case DistortionKind::kContrast: return "contrast";
    case DistortionKind::kCompression: return "compression";
    case DistortionKind::kRain: return "rain";
    case DistortionKind::kHaze: return "haze";
    case DistortionKind::kMotionBlur: return "motion-blur";
    case DistortionKind::kDefocusBlur: return "defocus-blur";
    case DistortionKind::kLocMotionBlur: return "loc-mblur";
    case DistortionKind::kLocDefocus: return "loc-defocus";
    case DistortionKind::kBackLight: return "backlight";
  }
  return "?";
}

inline std::optional<DistortionKind> kind_from_name(std::string_view name) {
  for (DistortionKind k : kAllKinds) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

// Local-target selection parameters; see select_targets.
struct TargetPolicy {
  double min_area_fraction = 0.01;
  int max_targets = 5;
  bool include_crowd = false;
};

// Complete, deterministic recipe for one corruption of one image.
struct DistortionSpec {
  DistortionKind kind = DistortionKind::kNoise;
  int level = 0;  // 0..10; 0 is the identity
  std::uint64_t seed = 0;
  TargetPolicy targets;
};

// Deterministic policy: drop crowds (unless included), keep annotations
// covering at least min_area_fraction of the image, take the max_targets
// largest; if nothing qualifies fall back to the single largest eligible
// annotation. Area ties break toward the lower annotation id. The seed is
// unused by this policy and reserved for sampling policies.
inline std::vector<Annotation> select_targets(const std::vector<Annotation>& anns,
                                              const TargetPolicy& policy, std::uint64_t /*seed*/,
                                              int image_width, int image_height) {
  const double image_area = static_cast<double>(image_width) * image_height;
  auto effective_area = [](const Annotation& a) {
    return a.area > 0 ? a.area : a.bbox[2] * a.bbox[3];
  };
  std::vector<const Annotation*> eligible;
  for (const Annotation& a : anns) {
    if (a.iscrowd == 1 && !policy.include_crowd) continue;
    eligible.push_back(&a);
  }
  if (eligible.empty()) return {};

  auto larger = [&](const Annotation* a, const Annotation* b) {
    const double aa = effective_area(*a), ab = effective_area(*b);
    if (aa != ab) return aa > ab;
    return a->id < b->id;
  };
  std::sort(eligible.begin(), eligible.end(), larger);

  std::vector<Annotation> out;
  for (const Annotation* a : eligible) {
    if (effective_area(*a) >= policy.min_area_fraction * image_area) {
      out.push_back(*a);
      if (static_cast<int>(out.size()) >= policy.max_targets) break;
    }
  }
  if (out.empty()) out.push_back(*eligible.front());
  return out;
}

namespace detail {

inline void clip01(FloatImage& img) {
  for (float& v : img.data) v = std::min(1.0f, std::max(0.0f, v));
}

// sigma(level) = 0.04*level, i.i.d. per sample in data order.
inline FloatImage apply_noise(const FloatImage& img, int level, SplitMix64& rng) {
  const double sigma = 0.04 * level;
  FloatImage out = img;
  for (float& v : out.data) v = static_cast<float>(v + sigma * rng.next_normal());
  clip01(out);
  return out;
}

// I' = mu + c*(I - mu) with c = 1 - 0.09*level and mu the scalar mean
// Rec.601 luminance of the input.
inline FloatImage apply_contrast(const FloatImage& img, int level) {
  const float c = static_cast<float>(1.0 - 0.09 * level);
  const float mu = static_cast<float>(mean_luminance(img));
  FloatImage out = img;
  for (float& v : out.data) v = mu + c * (v - mu);
  clip01(out);
  return out;
}

// Uniform-transmission scattering: I' = I*t + A*(1-t), A = 0.9,
// t = 1 - 0.085*level.
inline FloatImage apply_haze(const FloatImage& img, int level) {
  const float t = static_cast<float>(1.0 - 0.085 * level);
  const float air = 0.9f * (1.0f - t);
  FloatImage out = img;
  for (float& v : out.data) v = v * t + air;
  clip01(out);
  return out;
}

// Streak layer at intensity 0.25, one global angle within 30 degrees of
// vertical, softened by a 3x3 box blur, then added to all channels.
// Draw order per image: angle, then per streak x0, y0, length.
inline FloatImage apply_rain(const FloatImage& img, int level, SplitMix64& rng) {
  const int w = img.width, h = img.height;
  const double angle = (rng.next_double() * 60.0 - 30.0) * (3.14159265358979323846 / 180.0);
  const double dx = std::sin(angle), dy = std::cos(angle);
  const std::int64_t streaks =
      std::llround(static_cast<double>(level) * w * h / 10000.0);
  std::vector<float> layer(static_cast<std::size_t>(w) * h, 0.0f);
  for (std::int64_t s = 0; s < streaks; ++s) {
    const int x0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(w)));
    const int y0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(h)));
    const int len = rng.next_int(10 + level, 20 + 2 * level);
    for (int t = 0; t < len; ++t) {
      const int x = x0 + static_cast<int>(std::lround(t * dx));
      const int y = y0 + static_cast<int>(std::lround(t * dy));
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      layer[static_cast<std::size_t>(y) * w + x] = 0.25f;
    }
  }
  layer = box_blur_plane(layer, w, h, 1);
  FloatImage out = img;
  for (std::size_t p = 0; p < layer.size(); ++p) {
    const float add = layer[p];
    if (add == 0.0f) continue;
    float* d = &out.data[p * kChannels];
    d[0] += add;
    d[1] += add;
    d[2] += add;
  }
  clip01(out);
  return out;
}

// Union of the selected targets' masks; empty optional when no target.
inline std::optional<BinaryMask> target_mask(const Image& img, const DistortionSpec& spec,
                                             const std::vector<Annotation>& anns) {
  const std::vector<Annotation> targets =
      select_targets(anns, spec.targets, spec.seed, img.width, img.height);
  if (targets.empty()) return std::nullopt;
  BinaryMask mask(img.width, img.height);
  for (const Annotation& a : targets) {
    mask = mask_union(mask, annotation_mask(a, img.width, img.height));
  }
  return mask;
}

}  // namespace detail

inline constexpr int kBlendFeather = 2;

inline int backlight_ring_radius(int level) { return 2 + level / 2; }

// Applies one severity-parameterized corruption. Level 0 returns the input
// bit-exactly for every kind. Local kinds return nullopt when the target
// policy selects nothing; the caller decides how to proceed.
inline std::optional<Image> apply(const Image& img, const DistortionSpec& spec,
                                  const std::vector<Annotation>& anns = {}) {
  if (spec.level < 0 || spec.level > 10) {
    throw ParameterError("apply: level must be in 0..10");
  }
  if (spec.level == 0) return img;
  const int level = spec.level;
  SplitMix64 rng(spec.seed);

  switch (spec.kind) {
    case DistortionKind::kNoise:
      return to_u8(detail::apply_noise(to_float(img), level, rng));
    case DistortionKind::kContrast:
      return to_u8(detail::apply_contrast(to_float(img), level));
    case DistortionKind::kCompression:
      return jpeg_roundtrip(img, std::max(2, 100 - 10 * level));
    case DistortionKind::kRain:
      return to_u8(detail::apply_rain(to_float(img), level, rng));
    case DistortionKind::kHaze:
      return to_u8(detail::apply_haze(to_float(img), level));
    case DistortionKind::kMotionBlur: {
      const double phi = rng.next_double() * 3.14159265358979323846;
      return to_u8(convolve2d(to_float(img), motion_kernel(2 * level + 1, phi)));
    }
    case DistortionKind::kDefocusBlur:
      return to_u8(convolve2d(to_float(img), disk_kernel(level)));
    case DistortionKind::kLocMotionBlur: {
      const double phi = rng.next_double() * 3.14159265358979323846;
      const auto mask = detail::target_mask(img, spec, anns);
      if (!mask) return std::nullopt;
      const FloatImage base = to_float(img);
      const FloatImage blurred = convolve2d(base, motion_kernel(2 * level + 1, phi));
      return to_u8(blend_masked(base, blurred, *mask, kBlendFeather));
    }
    case DistortionKind::kLocDefocus: {
      const auto mask = detail::target_mask(img, spec, anns);
      if (!mask) return std::nullopt;
      const FloatImage base = to_float(img);
      const FloatImage blurred = convolve2d(base, disk_kernel(level));
      return to_u8(blend_masked(base, blurred, *mask, kBlendFeather));
    }
    case DistortionKind::kBackLight: {
      const auto mask = detail::target_mask(img, spec, anns);
      if (!mask) return std::nullopt;
      const float scale = static_cast<float>(1.0 - 0.09 * level);
      const float glow = static_cast<float>(0.05 * level);
      const FloatImage base = to_float(img);

      FloatImage darkened = base;
      for (float& v : darkened.data) v *= scale;
      FloatImage shaded = blend_masked(base, darkened, *mask, kBlendFeather);

      FloatImage glowed = shaded;
      for (float& v : glowed.data) v = std::min(1.0f, v + glow);
      const BinaryMask halo = ring(*mask, backlight_ring_radius(level));
      return to_u8(blend_masked(shaded, glowed, halo, kBlendFeather));
    }
  }
  throw ParameterError("apply: unknown distortion kind");
}

}  // namespace cocodist

#endif  // COCODIST_DISTORTIONS_HPP_
