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

#ifndef COCODIST_EVAL_HPP_
#define COCODIST_EVAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cocodist/coco.hpp"
#include "cocodist/error.hpp"

namespace cocodist {

inline constexpr int kDetectionCapPerImage = 100;
inline constexpr int kNumIouThresholds = 10;

inline double iou_threshold(int i) { return (50 + 5 * i) / 100.0; }

using BBox = std::array<double, 4>;  // x, y, w, h

inline double iou_bbox(const BBox& a, const BBox& b) {
  const double aw = std::max(0.0, a[2]), ah = std::max(0.0, a[3]);
  const double bw = std::max(0.0, b[2]), bh = std::max(0.0, b[3]);
  const double ix = std::max(0.0, std::min(a[0] + aw, b[0] + bw) - std::max(a[0], b[0]));
  const double iy = std::max(0.0, std::min(a[1] + ah, b[1] + bh) - std::max(a[1], b[1]));
  const double inter = ix * iy;
  const double uni = aw * ah + bw * bh - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct DetectionOutcome {
  double score = 0.0;
  bool tp = false;
  bool ignored = false;  // overlapped a crowd region instead of counting as FP
  std::int64_t gt_id = -1;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<DetectionOutcome> detections;  // descending score
  std::int64_t num_gt = 0;                   // non-crowd ground truths
};

// COCO greedy matching for one image/category partition. Detections are
// taken in descending score order (stable on ties); each claims the still
// unmatched ground truth of highest IoU at or above the threshold, earliest
// ground truth on IoU ties. Failing that, a detection whose overlap with a
// crowd region (intersection over detection area) reaches the threshold is
// ignored rather than counted as a false positive.
inline MatchResult match_detections(const std::vector<Detection>& dets,
                                    const std::vector<Annotation>& gts, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  if (order.size() > static_cast<std::size_t>(kDetectionCapPerImage)) {
    order.resize(kDetectionCapPerImage);
  }

  MatchResult result;
  for (const Annotation& g : gts) result.num_gt += g.iscrowd == 0 ? 1 : 0;

  std::vector<bool> taken(gts.size(), false);
  for (std::size_t oi : order) {
    const Detection& d = dets[oi];
    DetectionOutcome out;
    out.score = d.score;

    std::size_t best = gts.size();
    double best_iou = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gts[gi].iscrowd != 0 || taken[gi]) continue;
      const double iou = iou_bbox(d.bbox, gts[gi].bbox);
      if (iou > best_iou) {
        best_iou = iou;
        best = gi;
      }
    }
    if (best < gts.size() && best_iou >= iou_threshold) {
      taken[best] = true;
      out.tp = true;
      out.gt_id = gts[best].id;
      out.iou = best_iou;
    } else {
      const double det_area = std::max(0.0, d.bbox[2]) * std::max(0.0, d.bbox[3]);
      double crowd_overlap = 0.0;
      for (const Annotation& g : gts) {
        if (g.iscrowd == 0 || det_area <= 0.0) continue;
        const double gw = std::max(0.0, g.bbox[2]), gh = std::max(0.0, g.bbox[3]);
        const double ix = std::max(
            0.0, std::min(d.bbox[0] + d.bbox[2], g.bbox[0] + gw) - std::max(d.bbox[0], g.bbox[0]));
        const double iy = std::max(
            0.0, std::min(d.bbox[1] + d.bbox[3], g.bbox[1] + gh) - std::max(d.bbox[1], g.bbox[1]));
        crowd_overlap = std::max(crowd_overlap, ix * iy / det_area);
      }
      if (crowd_overlap >= iou_threshold) {
        out.ignored = true;
        out.iou = crowd_overlap;
      }
    }
    result.detections.push_back(out);
  }
  return result;
}

// Concatenates per-image results and restores the global descending-score
// order (stable, so per-image ordering breaks ties).
inline MatchResult merge_matches(const std::vector<MatchResult>& parts) {
  MatchResult merged;
  for (const MatchResult& p : parts) {
    merged.num_gt += p.num_gt;
    merged.detections.insert(merged.detections.end(), p.detections.begin(), p.detections.end());
  }
  std::stable_sort(merged.detections.begin(), merged.detections.end(),
                   [](const DetectionOutcome& a, const DetectionOutcome& b) {
                     return a.score > b.score;
                   });
  return merged;
}

// 101-point interpolated AP: mean over the recall grid {0.00, 0.01, ..., 1.00}
// of the maximum precision at recall >= r. With no ground truths the value is
// 0 when detections exist and NaN (no evidence either way) when none do.
inline double average_precision(const MatchResult& match) {
  if (match.num_gt == 0) {
    return match.detections.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  }
  std::vector<double> recall, precision;
  std::int64_t tp = 0, fp = 0;
  for (const DetectionOutcome& d : match.detections) {
    if (d.ignored) continue;
    d.tp ? ++tp : ++fp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(match.num_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  for (std::size_t i = precision.size(); i > 1; --i) {
    precision[i - 2] = std::max(precision[i - 2], precision[i - 1]);
  }
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) {
      sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
  }
  return sum / 101.0;
}

struct EvalResult {
  std::vector<std::int64_t> category_ids;  // categories entering the mean, ascending
  std::vector<std::array<double, kNumIouThresholds>> ap;  // parallel to category_ids
  double map = 0.0;
  double ap50 = 0.0;
  double miou = 0.0;  // mean IoU of true positives at threshold 0.50; 0 with no TPs
};

// Full COCO-style scoring pass: per-image top-100 detections (across
// categories), greedy matching per category and IoU threshold 0.50:0.05:0.95,
// 101-point AP, mAP averaged over categories with at least one non-crowd
// ground truth. Unknown category or image ids are integrity errors.
inline EvalResult coco_map(const std::vector<Detection>& dets, const CocoDataset& dataset) {
  for (const Detection& d : dets) {
    if (!dataset.has_category(d.category_id)) {
      throw IntegrityError("detection references unknown category id " +
                           std::to_string(d.category_id));
    }
    if (dataset.find_image(d.image_id) == nullptr) {
      throw IntegrityError("detection references unknown image id " +
                           std::to_string(d.image_id));
    }
  }

  // Top-100 per image by score (stable ties), before splitting by category.
  std::map<std::int64_t, std::vector<Detection>> dets_by_image;
  for (const Detection& d : dets) dets_by_image[d.image_id].push_back(d);
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Detection>> dets_by_img_cat;
  for (auto& [image_id, list] : dets_by_image) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    if (list.size() > static_cast<std::size_t>(kDetectionCapPerImage)) {
      list.resize(kDetectionCapPerImage);
    }
    for (const Detection& d : list) dets_by_img_cat[{d.image_id, d.category_id}].push_back(d);
  }

  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Annotation>> gts_by_img_cat;
  std::map<std::int64_t, std::int64_t> gt_count_by_cat;
  for (const Annotation& a : dataset.annotations) {
    gts_by_img_cat[{a.image_id, a.category_id}].push_back(a);
    if (a.iscrowd == 0) ++gt_count_by_cat[a.category_id];
  }

  std::vector<std::int64_t> category_ids;
  for (const Category& c : dataset.categories) {
    if (gt_count_by_cat.count(c.id)) category_ids.push_back(c.id);
  }
  std::sort(category_ids.begin(), category_ids.end());

  std::vector<std::int64_t> image_ids;
  for (const ImageInfo& img : dataset.images) image_ids.push_back(img.id);
  std::sort(image_ids.begin(), image_ids.end());

  EvalResult result;
  result.category_ids = category_ids;
  static const std::vector<Detection> kNoDets;
  static const std::vector<Annotation> kNoGts;
  double iou_sum = 0.0;
  std::int64_t iou_count = 0;
  for (std::int64_t cat : category_ids) {
    std::array<double, kNumIouThresholds> row{};
    for (int t = 0; t < kNumIouThresholds; ++t) {
      std::vector<MatchResult> parts;
      for (std::int64_t img : image_ids) {
        const auto di = dets_by_img_cat.find({img, cat});
        const auto gi = gts_by_img_cat.find({img, cat});
        const auto& d = di != dets_by_img_cat.end() ? di->second : kNoDets;
        const auto& g = gi != gts_by_img_cat.end() ? gi->second : kNoGts;
        if (d.empty() && g.empty()) continue;
        parts.push_back(match_detections(d, g, iou_threshold(t)));
      }
      const MatchResult merged = merge_matches(parts);
      row[t] = average_precision(merged);
      if (t == 0) {
        for (const DetectionOutcome& d : merged.detections) {
          if (d.tp) {
            iou_sum += d.iou;
            ++iou_count;
          }
        }
      }
    }
    result.ap.push_back(row);
  }

  if (!category_ids.empty()) {
    double total = 0.0, total50 = 0.0;
    for (const auto& row : result.ap) {
      for (double v : row) total += v;
      total50 += row[0];
    }
    result.map = total / static_cast<double>(result.ap.size() * kNumIouThresholds);
    result.ap50 = total50 / static_cast<double>(result.ap.size());
  }
  result.miou = iou_count > 0 ? iou_sum / static_cast<double>(iou_count) : 0.0;
  return result;
}

inline double robustness_rate(double map_cell, double map_clean) {
  if (!(map_clean > 0.0)) {
    throw UndefinedRateError("robustness rate undefined: clean mAP is not positive");
  }
  return map_cell / map_clean;
}

inline double relative_improvement(double score_aug, double score_base) {
  if (!(score_base > 0.0)) {
    throw UndefinedRateError("relative improvement undefined: base score is not positive");
  }
  return 100.0 * (score_aug - score_base) / score_base;
}

inline constexpr int kHistogramBins = 20;

struct AggregateStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  double histogram_max = 0.0;  // upper edge of the last bin; bins span [0, max]
  std::array<std::int64_t, kHistogramBins> histogram{};
};

// Median takes the lower of the two middle elements for even counts; the
// quartiles and tail percentiles use the nearest-rank rule rank = ceil(p*n).
inline AggregateStats aggregate_stats(std::vector<double> values) {
  if (values.empty()) throw StatsError("aggregate_stats: empty input");
  AggregateStats stats;
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(n);

  std::sort(values.begin(), values.end());
  stats.median = values[(n - 1) / 2];
  const auto nearest_rank = [&](double p) {
    const auto rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(n)));
    return values[std::max<std::size_t>(rank, 1) - 1];
  };
  stats.q1 = nearest_rank(0.25);
  stats.q3 = nearest_rank(0.75);
  stats.p5 = nearest_rank(0.05);
  stats.p95 = nearest_rank(0.95);

  stats.histogram_max = values.back();
  for (double v : values) {
    int bin = 0;
    if (stats.histogram_max > 0.0) {
      bin = std::min(kHistogramBins - 1,
                     static_cast<int>(std::floor(v / stats.histogram_max * kHistogramBins)));
    }
    ++stats.histogram[static_cast<std::size_t>(bin)];
  }
  return stats;
}

}  // namespace cocodist

#endif  // COCODIST_EVAL_HPP_
