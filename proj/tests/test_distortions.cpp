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

#include "cocodist/distortions.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "testutil.hpp"

namespace cocodist {
namespace {

Annotation make_ann(std::int64_t id, double x, double y, double w, double h, int iscrowd = 0) {
  Annotation a;
  a.id = id;
  a.image_id = 1;
  a.category_id = 1;
  a.bbox = {x, y, w, h};
  a.area = w * h;
  a.iscrowd = iscrowd;
  if (iscrowd) a.segmentation = RleSegmentation{1, 1, {1}};
  return a;
}

TEST(KindTest, NamesRoundTrip) {
  for (DistortionKind k : kAllKinds) {
    const auto back = kind_from_name(kind_name(k));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, k);
  }
  EXPECT_FALSE(kind_from_name("sparkles").has_value());
}

TEST(KindTest, IndicesAndLocality) {
  EXPECT_EQ(kind_index(DistortionKind::kNoise), 0);
  EXPECT_EQ(kind_index(DistortionKind::kBackLight), 9);
  EXPECT_FALSE(is_local(DistortionKind::kHaze));
  EXPECT_TRUE(is_local(DistortionKind::kLocMotionBlur));
  EXPECT_TRUE(is_local(DistortionKind::kLocDefocus));
  EXPECT_TRUE(is_local(DistortionKind::kBackLight));
}

TEST(ApplyTest, LevelZeroIsBitExactIdentityForEveryKind) {
  const Image img = testutil::synth_image(40, 30, 21);
  const std::vector<Annotation> anns = {make_ann(1, 5, 5, 20, 15)};
  for (DistortionKind k : kAllKinds) {
    DistortionSpec spec;
    spec.kind = k;
    spec.level = 0;
    spec.seed = 123;
    const auto out = apply(img, spec, anns);
    ASSERT_TRUE(out.has_value());
    EXPECT_EQ(*out, img) << kind_name(k);
  }
}

TEST(ApplyTest, LevelOutOfRangeThrows) {
  const Image img(8, 8);
  DistortionSpec spec;
  spec.level = -1;
  EXPECT_THROW(apply(img, spec), ParameterError);
  spec.level = 11;
  EXPECT_THROW(apply(img, spec), ParameterError);
}

TEST(ApplyTest, SameSpecIsReproducible) {
  const Image img = testutil::synth_image(32, 32, 5);
  const std::vector<Annotation> anns = {make_ann(1, 4, 4, 20, 20)};
  for (DistortionKind k : kAllKinds) {
    DistortionSpec spec;
    spec.kind = k;
    spec.level = 4;
    spec.seed = 99;
    const auto a = apply(img, spec, anns);
    const auto b = apply(img, spec, anns);
    ASSERT_TRUE(a.has_value());
    ASSERT_TRUE(b.has_value());
    EXPECT_EQ(*a, *b) << kind_name(k);
  }
}

TEST(ApplyTest, SeedChangesSeededKinds) {
  const Image img = testutil::synth_image(64, 64, 5);
  DistortionSpec a, b;
  a.kind = b.kind = DistortionKind::kNoise;
  a.level = b.level = 3;
  a.seed = 1;
  b.seed = 2;
  EXPECT_NE(*apply(img, a), *apply(img, b));
}

// Noise draws one normal per sample in data order; replaying the stream by
// hand must reproduce the output byte for byte.
TEST(NoiseTest, MatchesHandRolledStream) {
  const Image img = testutil::synth_image(17, 13, 77);
  DistortionSpec spec;
  spec.kind = DistortionKind::kNoise;
  spec.level = 6;
  spec.seed = 4242;
  const Image out = *apply(img, spec);

  SplitMix64 rng(4242);
  const double sigma = 0.04 * 6;
  FloatImage expected = to_float(img);
  for (float& v : expected.data) {
    v = static_cast<float>(v + sigma * rng.next_normal());
    v = std::min(1.0f, std::max(0.0f, v));
  }
  EXPECT_EQ(out, to_u8(expected));
}

TEST(NoiseTest, StrengthGrowsWithLevel) {
  const Image img = testutil::synth_image(48, 48, 9);
  DistortionSpec spec;
  spec.kind = DistortionKind::kNoise;
  spec.seed = 7;
  spec.level = 1;
  const double psnr1 = psnr(img, *apply(img, spec));
  spec.level = 5;
  const double psnr5 = psnr(img, *apply(img, spec));
  spec.level = 10;
  const double psnr10 = psnr(img, *apply(img, spec));
  EXPECT_GT(psnr1, psnr5);
  EXPECT_GT(psnr5, psnr10);
}

TEST(ContrastTest, ConstantGrayImageIsUnchanged) {
  Image img(12, 9);
  for (auto& v : img.data) v = 102;
  DistortionSpec spec;
  spec.kind = DistortionKind::kContrast;
  spec.level = 8;
  EXPECT_EQ(*apply(img, spec), img);
}

TEST(ContrastTest, CompressesTowardMeanLuminance) {
  const Image img = testutil::synth_image(32, 24, 3);
  const FloatImage f = to_float(img);
  const double mu = mean_luminance(f);
  DistortionSpec spec;
  spec.kind = DistortionKind::kContrast;
  spec.level = 5;
  const Image out = *apply(img, spec);
  // c = 0.55: every sample lands within a rounding step of the formula.
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double expected = mu + 0.55 * (f.data[i] - mu);
    const double got = out.data[i] / 255.0;
    EXPECT_NEAR(got, std::min(1.0, std::max(0.0, expected)), 1.5 / 255.0);
  }
}

TEST(ContrastTest, LevelTenNearlyFlattens) {
  const Image img = testutil::synth_image(32, 24, 3);
  DistortionSpec spec;
  spec.kind = DistortionKind::kContrast;
  spec.level = 10;
  const Image out = *apply(img, spec);
  const auto [lo, hi] = std::minmax_element(out.data.begin(), out.data.end());
  const auto [slo, shi] = std::minmax_element(img.data.begin(), img.data.end());
  // c = 0.1 shrinks the dynamic range to about a tenth.
  EXPECT_LT(*hi - *lo, (*shi - *slo) / 5);
}

TEST(CompressionTest, EqualsJpegRoundTripAtDerivedQuality) {
  const Image img = testutil::synth_image(40, 32, 14);
  for (int level : {1, 5, 9, 10}) {
    DistortionSpec spec;
    spec.kind = DistortionKind::kCompression;
    spec.level = level;
    const int quality = std::max(2, 100 - 10 * level);
    EXPECT_EQ(*apply(img, spec), jpeg_roundtrip(img, quality)) << level;
  }
}

TEST(HazeTest, MatchesScatteringFormula) {
  const Image img = testutil::synth_image(20, 20, 30);
  const FloatImage f = to_float(img);
  DistortionSpec spec;
  spec.kind = DistortionKind::kHaze;
  spec.level = 4;
  const Image out = *apply(img, spec);
  const double t = 1.0 - 0.085 * 4;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    const double expected = std::min(1.0, f.data[i] * t + 0.9 * (1.0 - t));
    EXPECT_NEAR(out.data[i] / 255.0, expected, 1.5 / 255.0);
  }
}

TEST(HazeTest, BrightensDarkScenes) {
  Image dark(16, 16);
  for (auto& v : dark.data) v = 20;
  DistortionSpec spec;
  spec.kind = DistortionKind::kHaze;
  spec.level = 10;
  const Image out = *apply(dark, spec);
  EXPECT_GT(mean_luminance(to_float(out)), mean_luminance(to_float(dark)));
}

// level * W * H / 10^4 streaks: a level-1 30x30 image rounds to zero and the
// output must be the untouched input.
TEST(RainTest, TinyImageAtLevelOneIsIdentity) {
  const Image img = testutil::synth_image(30, 30, 2);
  DistortionSpec spec;
  spec.kind = DistortionKind::kRain;
  spec.level = 1;
  spec.seed = 5;
  EXPECT_EQ(*apply(img, spec), img);
}

// Replays the pinned draw order: angle first, then x0, y0, length per streak.
TEST(RainTest, MatchesHandRolledStreakLayer) {
  const int w = 60, h = 50;
  const Image img = testutil::synth_image(w, h, 44);
  DistortionSpec spec;
  spec.kind = DistortionKind::kRain;
  spec.level = 7;
  spec.seed = 31337;
  const Image out = *apply(img, spec);

  SplitMix64 rng(31337);
  const double angle = (rng.next_double() * 60.0 - 30.0) * (3.14159265358979323846 / 180.0);
  const double dx = std::sin(angle), dy = std::cos(angle);
  const std::int64_t streaks = std::llround(7.0 * w * h / 10000.0);
  ASSERT_EQ(streaks, 2);
  std::vector<float> layer(static_cast<std::size_t>(w) * h, 0.0f);
  for (std::int64_t s = 0; s < streaks; ++s) {
    const int x0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(w)));
    const int y0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(h)));
    const int len = rng.next_int(10 + 7, 20 + 14);
    for (int t = 0; t < len; ++t) {
      const int x = x0 + static_cast<int>(std::lround(t * dx));
      const int y = y0 + static_cast<int>(std::lround(t * dy));
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      layer[static_cast<std::size_t>(y) * w + x] = 0.25f;
    }
  }
  layer = box_blur_plane(layer, w, h, 1);
  FloatImage expected = to_float(img);
  for (std::size_t p = 0; p < layer.size(); ++p) {
    if (layer[p] == 0.0f) continue;
    for (int c = 0; c < kChannels; ++c) {
      float& v = expected.data[p * kChannels + c];
      v = std::min(1.0f, std::max(0.0f, v + layer[p]));
    }
  }
  EXPECT_EQ(out, to_u8(expected));
}

TEST(RainTest, StreaksOnlyBrighten) {
  const Image img = testutil::synth_image(100, 80, 3);
  DistortionSpec spec;
  spec.kind = DistortionKind::kRain;
  spec.level = 6;
  spec.seed = 9;
  const Image out = *apply(img, spec);
  EXPECT_NE(out, img);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    EXPECT_GE(static_cast<int>(out.data[i]) + 1, static_cast<int>(img.data[i]));
  }
}

TEST(MotionBlurTest, MatchesConvolutionWithDrawnAngle) {
  const Image img = testutil::synth_image(36, 28, 19);
  DistortionSpec spec;
  spec.kind = DistortionKind::kMotionBlur;
  spec.level = 3;
  spec.seed = 555;
  const Image out = *apply(img, spec);

  SplitMix64 rng(555);
  const double phi = rng.next_double() * 3.14159265358979323846;
  EXPECT_EQ(out, to_u8(convolve2d(to_float(img), motion_kernel(7, phi))));
}

TEST(DefocusBlurTest, MatchesDiskConvolution) {
  const Image img = testutil::synth_image(36, 28, 19);
  DistortionSpec spec;
  spec.kind = DistortionKind::kDefocusBlur;
  spec.level = 2;
  EXPECT_EQ(*apply(img, spec), to_u8(convolve2d(to_float(img), disk_kernel(2))));
}

TEST(BlurTest, HigherLevelBlursMore) {
  const Image img = testutil::synth_image(64, 48, 23);
  DistortionSpec spec;
  spec.kind = DistortionKind::kDefocusBlur;
  spec.level = 1;
  const double p1 = psnr(img, *apply(img, spec));
  spec.level = 6;
  const double p6 = psnr(img, *apply(img, spec));
  EXPECT_GT(p1, p6);
}

TEST(SelectTargetsTest, OrdersByAreaThenId) {
  const std::vector<Annotation> anns = {
      make_ann(3, 0, 0, 10, 10), make_ann(1, 0, 0, 30, 30), make_ann(2, 0, 0, 10, 10)};
  const auto targets = select_targets(anns, TargetPolicy{}, 0, 100, 100);
  ASSERT_EQ(targets.size(), 3u);
  EXPECT_EQ(targets[0].id, 1);
  EXPECT_EQ(targets[1].id, 2);  // tie with id 3 breaks to the lower id
  EXPECT_EQ(targets[2].id, 3);
}

TEST(SelectTargetsTest, CapsAtMaxTargets) {
  std::vector<Annotation> anns;
  for (int i = 1; i <= 8; ++i) anns.push_back(make_ann(i, 0, 0, 20 + i, 20));
  const auto targets = select_targets(anns, TargetPolicy{}, 0, 100, 100);
  ASSERT_EQ(targets.size(), 5u);
  EXPECT_EQ(targets[0].id, 8);
}

TEST(SelectTargetsTest, FiltersSmallAnnotationsWithLargestFallback) {
  // 100x100 image, 1% threshold = 100 px²; both below it.
  const std::vector<Annotation> anns = {make_ann(1, 0, 0, 5, 5), make_ann(2, 0, 0, 9, 9)};
  const auto targets = select_targets(anns, TargetPolicy{}, 0, 100, 100);
  ASSERT_EQ(targets.size(), 1u);
  EXPECT_EQ(targets[0].id, 2);
}

TEST(SelectTargetsTest, ExcludesCrowdsUnlessAsked) {
  const std::vector<Annotation> anns = {make_ann(1, 0, 0, 50, 50, 1), make_ann(2, 0, 0, 20, 20)};
  const auto normal = select_targets(anns, TargetPolicy{}, 0, 100, 100);
  ASSERT_EQ(normal.size(), 1u);
  EXPECT_EQ(normal[0].id, 2);

  TargetPolicy inclusive;
  inclusive.include_crowd = true;
  const auto with_crowds = select_targets(anns, inclusive, 0, 100, 100);
  ASSERT_EQ(with_crowds.size(), 2u);
  EXPECT_EQ(with_crowds[0].id, 1);
}

TEST(SelectTargetsTest, EmptyInputGivesNoTargets) {
  EXPECT_TRUE(select_targets({}, TargetPolicy{}, 0, 100, 100).empty());
  const std::vector<Annotation> only_crowd = {make_ann(1, 0, 0, 50, 50, 1)};
  EXPECT_TRUE(select_targets(only_crowd, TargetPolicy{}, 0, 100, 100).empty());
}

TEST(SelectTargetsTest, UsesBboxAreaWhenAreaFieldIsZero) {
  Annotation a = make_ann(1, 0, 0, 40, 40);
  a.area = 0.0;
  const auto targets = select_targets({a}, TargetPolicy{}, 0, 100, 100);
  ASSERT_EQ(targets.size(), 1u);
}

TEST(LocalKindsTest, NoTargetReturnsNullopt) {
  const Image img = testutil::synth_image(32, 32, 8);
  for (DistortionKind k :
       {DistortionKind::kLocMotionBlur, DistortionKind::kLocDefocus, DistortionKind::kBackLight}) {
    DistortionSpec spec;
    spec.kind = k;
    spec.level = 5;
    spec.seed = 3;
    EXPECT_FALSE(apply(img, spec, {}).has_value()) << kind_name(k);
  }
}

TEST(LocalKindsTest, GlobalKindsIgnoreMissingAnnotations) {
  const Image img = testutil::synth_image(32, 32, 8);
  DistortionSpec spec;
  spec.kind = DistortionKind::kHaze;
  spec.level = 5;
  EXPECT_TRUE(apply(img, spec, {}).has_value());
}

TEST(LocalKindsTest, BlurIsConfinedToFeatheredMask) {
  const Image img = testutil::synth_image(48, 40, 13);
  const Annotation target = make_ann(1, 10, 10, 16, 12);
  DistortionSpec spec;
  spec.level = 5;
  spec.seed = 21;
  for (DistortionKind k : {DistortionKind::kLocMotionBlur, DistortionKind::kLocDefocus}) {
    spec.kind = k;
    const auto out = apply(img, spec, {target});
    ASSERT_TRUE(out.has_value());
    EXPECT_NE(*out, img);
    const BinaryMask mask = annotation_mask(target, 48, 40);
    const BinaryMask support = dilate(mask, kBlendFeather);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 48; ++x) {
        if (support.test(x, y)) continue;
        for (int c = 0; c < kChannels; ++c) {
          ASSERT_EQ(out->at(x, y, c), img.at(x, y, c)) << kind_name(k) << " " << x << "," << y;
        }
      }
    }
  }
}

TEST(LocalKindsTest, DeepInsideMaskMatchesGlobalBlur) {
  const Image img = testutil::synth_image(64, 48, 29);
  const Annotation target = make_ann(1, 8, 8, 40, 30);
  DistortionSpec spec;
  spec.kind = DistortionKind::kLocDefocus;
  spec.level = 2;
  const auto local = apply(img, spec, {target});
  ASSERT_TRUE(local.has_value());
  const Image global = to_u8(convolve2d(to_float(img), disk_kernel(2)));
  // Alpha saturates at 1 once the pixel is more than the feather radius
  // inside the mask, so the interior equals the full-frame blur.
  for (int y = 12; y < 34; ++y) {
    for (int x = 12; x < 44; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        ASSERT_EQ(local->at(x, y, c), global.at(x, y, c)) << x << "," << y;
      }
    }
  }
}

TEST(BackLightTest, DarkensTargetAndGlowsAroundIt) {
  const Image img = testutil::synth_image(60, 50, 41);
  const Annotation target = make_ann(1, 20, 15, 20, 20);
  DistortionSpec spec;
  spec.kind = DistortionKind::kBackLight;
  spec.level = 6;
  const auto out = apply(img, spec, {target});
  ASSERT_TRUE(out.has_value());

  const BinaryMask mask = annotation_mask(target, 60, 50);
  double in_before = 0.0, in_after = 0.0;
  for (int y = 15; y < 35; ++y) {
    for (int x = 20; x < 40; ++x) {
      in_before += img.at(x, y, 1);
      in_after += out->at(x, y, 1);
    }
  }
  EXPECT_LT(in_after, in_before * 0.75);

  // The halo ring gains the glow; sample a band just outside the mask but
  // inside the ring radius, away from the feather transitions.
  const int rr = backlight_ring_radius(6);
  ASSERT_EQ(rr, 5);
  double ring_before = 0.0, ring_after = 0.0;
  int n = 0;
  const BinaryMask halo = ring(mask, rr);
  const BinaryMask near_mask = dilate(mask, kBlendFeather + 1);
  for (int y = 0; y < 50; ++y) {
    for (int x = 0; x < 60; ++x) {
      if (!halo.test(x, y) || near_mask.test(x, y)) continue;
      ring_before += img.at(x, y, 1);
      ring_after += out->at(x, y, 1);
      ++n;
    }
  }
  ASSERT_GT(n, 0);
  EXPECT_GT(ring_after, ring_before);
}

TEST(BackLightTest, ChangesConfinedToMaskPlusRing) {
  const Image img = testutil::synth_image(60, 50, 43);
  const Annotation target = make_ann(1, 22, 18, 14, 14);
  DistortionSpec spec;
  spec.kind = DistortionKind::kBackLight;
  spec.level = 9;
  const auto out = apply(img, spec, {target});
  ASSERT_TRUE(out.has_value());
  const BinaryMask mask = annotation_mask(target, 60, 50);
  const BinaryMask bound = dilate(mask, backlight_ring_radius(9) + kBlendFeather);
  for (int y = 0; y < 50; ++y) {
    for (int x = 0; x < 60; ++x) {
      if (bound.test(x, y)) continue;
      for (int c = 0; c < kChannels; ++c) {
        ASSERT_EQ(out->at(x, y, c), img.at(x, y, c)) << x << "," << y;
      }
    }
  }
}

TEST(BackLightTest, RingRadiusFormula) {
  EXPECT_EQ(backlight_ring_radius(1), 2);
  EXPECT_EQ(backlight_ring_radius(2), 3);
  EXPECT_EQ(backlight_ring_radius(3), 3);
  EXPECT_EQ(backlight_ring_radius(10), 7);
}

}  // namespace
}  // namespace cocodist
