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

#ifndef COCODIST_COCO_HPP_
#define COCODIST_COCO_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cocodist/error.hpp"
#include "cocodist/mask.hpp"

namespace cocodist {

using json = nlohmann::json;

struct ImageInfo {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
};

// COCO RLE segmentation with plain (uncompressed) counts in memory. Files
// may carry counts either as the compressed string or as an integer array;
// writes always emit the compressed string for compatibility.
struct RleSegmentation {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleSegmentation&, const RleSegmentation&) = default;
};

using PolygonList = std::vector<std::vector<double>>;
using Segmentation = std::variant<std::monostate, PolygonList, RleSegmentation>;

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::array<double, 4> bbox{0, 0, 0, 0};  // x, y, w, h in pixels
  double area = 0.0;
  int iscrowd = 0;
  Segmentation segmentation;
};

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::array<double, 4> bbox{0, 0, 0, 0};
  double score = 0.0;
};

// Parsed, validated annotation graph. Immutable after construction and
// safe to share across threads.
struct CocoDataset {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;

  const ImageInfo* find_image(std::int64_t id) const {
    auto it = image_index_.find(id);
    return it == image_index_.end() ? nullptr : &images[it->second];
  }
  const std::vector<std::size_t>& annotations_for_image(std::int64_t id) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = image_annotations_.find(id);
    return it == image_annotations_.end() ? kEmpty : it->second;
  }
  bool has_category(std::int64_t id) const { return category_ids_.count(id) != 0; }

  // Rebuild lookup tables and check referential integrity.
  void reindex() {
    image_index_.clear();
    image_annotations_.clear();
    category_ids_.clear();
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (!image_index_.emplace(images[i].id, i).second) {
        throw IntegrityError("duplicate image id " + std::to_string(images[i].id));
      }
    }
    for (const Category& c : categories) {
      if (!category_ids_.insert(c.id).second) {
        throw IntegrityError("duplicate category id " + std::to_string(c.id));
      }
    }
    std::unordered_set<std::int64_t> ann_ids;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      const Annotation& a = annotations[i];
      if (!ann_ids.insert(a.id).second) {
        throw IntegrityError("duplicate annotation id " + std::to_string(a.id));
      }
      if (image_index_.find(a.image_id) == image_index_.end()) {
        throw IntegrityError("annotation " + std::to_string(a.id) +
                             " references missing image id " + std::to_string(a.image_id));
      }
      if (category_ids_.find(a.category_id) == category_ids_.end()) {
        throw IntegrityError("annotation " + std::to_string(a.id) +
                             " references missing category id " + std::to_string(a.category_id));
      }
      image_annotations_[a.image_id].push_back(i);
    }
  }

 private:
  std::unordered_map<std::int64_t, std::size_t> image_index_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> image_annotations_;
  std::unordered_set<std::int64_t> category_ids_;
};

namespace detail {

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

inline Segmentation parse_segmentation(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_array()) {
    if (j.empty()) return std::monostate{};
    PolygonList polys;
    for (const auto& p : j) {
      if (!p.is_array()) throw ParseError("segmentation: expected polygon arrays");
      polys.push_back(p.get<std::vector<double>>());
    }
    return polys;
  }
  if (j.is_object()) {
    RleSegmentation rle;
    const auto& size = j.at("size");
    rle.height = size.at(0).get<int>();
    rle.width = size.at(1).get<int>();
    const auto& counts = j.at("counts");
    if (counts.is_string()) {
      rle.counts = rle_counts_from_string(counts.get<std::string>());
    } else {
      rle.counts = counts.get<std::vector<std::uint32_t>>();
    }
    return rle;
  }
  throw ParseError("segmentation: expected array or RLE object");
}

inline json segmentation_to_json(const Segmentation& seg) {
  if (std::holds_alternative<PolygonList>(seg)) {
    return json(std::get<PolygonList>(seg));
  }
  if (std::holds_alternative<RleSegmentation>(seg)) {
    const auto& rle = std::get<RleSegmentation>(seg);
    return json{{"size", {rle.height, rle.width}}, {"counts", rle_counts_to_string(rle.counts)}};
  }
  return json();
}

inline std::array<double, 4> parse_bbox(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) throw ParseError(std::string(what) + ": bbox must have 4 numbers");
  std::array<double, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = j.at(i).get<double>();
  if (b[2] < 0 || b[3] < 0) {
    throw RangeError(std::string(what) + ": bbox has negative extent");
  }
  return b;
}

}  // namespace detail

// Parses a COCO instances file. Unknown fields are ignored; all referential
// invariants are checked before returning.
inline CocoDataset parse_dataset(const std::string& json_text) {
  const json j = detail::parse_json(json_text);
  if (!j.is_object() || !j.contains("images") || !j.contains("annotations") ||
      !j.contains("categories")) {
    throw ParseError("dataset: missing images/annotations/categories arrays");
  }
  CocoDataset ds;
  try {
    for (const auto& ji : j.at("images")) {
      ImageInfo info;
      info.id = ji.at("id").get<std::int64_t>();
      info.file_name = ji.at("file_name").get<std::string>();
      info.width = ji.at("width").get<int>();
      info.height = ji.at("height").get<int>();
      if (info.width <= 0 || info.height <= 0) {
        throw RangeError("image " + std::to_string(info.id) + ": non-positive dimensions");
      }
      ds.images.push_back(std::move(info));
    }
    for (const auto& ja : j.at("annotations")) {
      Annotation a;
      a.id = ja.at("id").get<std::int64_t>();
      a.image_id = ja.at("image_id").get<std::int64_t>();
      a.category_id = ja.at("category_id").get<std::int64_t>();
      a.bbox = detail::parse_bbox(ja.at("bbox"), "annotation");
      a.iscrowd = ja.value("iscrowd", 0);
      if (a.iscrowd != 0 && a.iscrowd != 1) {
        throw RangeError("annotation " + std::to_string(a.id) + ": iscrowd must be 0 or 1");
      }
      if (ja.contains("segmentation")) a.segmentation = detail::parse_segmentation(ja.at("segmentation"));
      if (a.iscrowd == 1 && !std::holds_alternative<RleSegmentation>(a.segmentation)) {
        throw IntegrityError("annotation " + std::to_string(a.id) +
                             ": iscrowd=1 requires RLE segmentation");
      }
      a.area = ja.value("area", a.bbox[2] * a.bbox[3]);
      ds.annotations.push_back(std::move(a));
    }
    for (const auto& jc : j.at("categories")) {
      ds.categories.push_back(Category{jc.at("id").get<std::int64_t>(),
                                       jc.value("name", std::string{})});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  ds.reindex();
  return ds;
}

// Emits the retained fields; parse(write(parse(x))) is a fixpoint.
inline std::string write_dataset(const CocoDataset& ds) {
  json j;
  j["images"] = json::array();
  for (const ImageInfo& i : ds.images) {
    j["images"].push_back({{"id", i.id},
                           {"file_name", i.file_name},
                           {"width", i.width},
                           {"height", i.height}});
  }
  j["annotations"] = json::array();
  for (const Annotation& a : ds.annotations) {
    json ja{{"id", a.id},         {"image_id", a.image_id}, {"category_id", a.category_id},
            {"bbox", a.bbox},     {"area", a.area},         {"iscrowd", a.iscrowd}};
    if (!std::holds_alternative<std::monostate>(a.segmentation)) {
      ja["segmentation"] = detail::segmentation_to_json(a.segmentation);
    }
    j["annotations"].push_back(std::move(ja));
  }
  j["categories"] = json::array();
  for (const Category& c : ds.categories) {
    j["categories"].push_back({{"id", c.id}, {"name", c.name}});
  }
  return j.dump();
}

// COCO results format: flat array of {image_id, category_id, bbox, score}.
inline std::vector<Detection> parse_detections(const std::string& json_text) {
  const json j = detail::parse_json(json_text);
  if (!j.is_array()) throw ParseError("detections: expected a flat array");
  std::vector<Detection> dets;
  dets.reserve(j.size());
  try {
    for (const auto& jd : j) {
      Detection d;
      d.image_id = jd.at("image_id").get<std::int64_t>();
      d.category_id = jd.at("category_id").get<std::int64_t>();
      d.bbox = detail::parse_bbox(jd.at("bbox"), "detection");
      d.score = jd.at("score").get<double>();
      if (d.score < 0.0 || d.score > 1.0) {
        throw RangeError("detection score " + std::to_string(d.score) + " outside [0,1]");
      }
      dets.push_back(d);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("detections: ") + e.what());
  }
  return dets;
}

inline std::string write_detections(const std::vector<Detection>& dets) {
  json j = json::array();
  for (const Detection& d : dets) {
    j.push_back({{"image_id", d.image_id},
                 {"category_id", d.category_id},
                 {"bbox", d.bbox},
                 {"score", d.score}});
  }
  return j.dump();
}

// Rasterized object support: polygons or RLE when present, filled bbox as
// the fallback.
inline BinaryMask annotation_mask(const Annotation& ann, int width, int height) {
  if (std::holds_alternative<PolygonList>(ann.segmentation)) {
    return rasterize_polygons(std::get<PolygonList>(ann.segmentation), width, height);
  }
  if (std::holds_alternative<RleSegmentation>(ann.segmentation)) {
    const auto& rle = std::get<RleSegmentation>(ann.segmentation);
    BinaryMask m = decode_rle(rle.height, rle.width, rle.counts);
    if (m.width != width || m.height != height) {
      throw ShapeError("annotation " + std::to_string(ann.id) + ": RLE size differs from image");
    }
    return m;
  }
  return filled_rect(ann.bbox[0], ann.bbox[1], ann.bbox[2], ann.bbox[3], width, height);
}

}  // namespace cocodist

#endif  // COCODIST_COCO_HPP_
