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

#ifndef COCODIST_BUILDER_HPP_
#define COCODIST_BUILDER_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cocodist/coco.hpp"
#include "cocodist/distortions.hpp"
#include "cocodist/error.hpp"
#include "cocodist/image_io.hpp"
#include "cocodist/rng.hpp"

namespace cocodist {

inline constexpr double kDefaultKindFraction = 0.05;

struct PlanEntry {
  std::int64_t image_id = 0;
  std::optional<DistortionKind> kind;  // nullopt marks a clean image
  int level = 0;
  std::uint64_t seed = 0;
};

struct MixingPlan {
  std::uint64_t global_seed = 0;
  std::vector<PlanEntry> entries;  // ascending image_id

  std::int64_t count(DistortionKind k) const {
    std::int64_t n = 0;
    for (const PlanEntry& e : entries) n += (e.kind && *e.kind == k) ? 1 : 0;
    return n;
  }
  std::int64_t clean_count() const {
    std::int64_t n = 0;
    for (const PlanEntry& e : entries) n += e.kind ? 0 : 1;
    return n;
  }
};

// Shuffles the sorted ids with a seeded Fisher-Yates pass, slices one
// contiguous run per kind (count = round(fraction * N)), leaves the rest
// clean. Per-image severity comes from the derived seed stream so the plan
// is a pure function of (ids, fractions, seed).
inline MixingPlan build_plan(std::vector<std::int64_t> ids,
                             const std::array<double, 10>& fractions, std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0 || f > 1.0) throw PlanError("build_plan: fraction outside [0, 1]");
    total += f;
  }
  if (total > 1.0 + 1e-9) throw PlanError("build_plan: fractions sum above 1");

  std::sort(ids.begin(), ids.end());
  SplitMix64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(ids[i - 1], ids[j]);
  }

  const auto n = static_cast<std::int64_t>(ids.size());
  std::array<std::int64_t, 10> counts{};
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    counts[k] = std::llround(fractions[k] * static_cast<double>(n));
    assigned += counts[k];
  }
  // Rounding can overshoot N by a few images; trim from the last kinds.
  for (std::size_t k = counts.size(); assigned > n && k > 0; --k) {
    const std::int64_t trim = std::min(counts[k - 1], assigned - n);
    counts[k - 1] -= trim;
    assigned -= trim;
  }

  MixingPlan plan;
  plan.global_seed = seed;
  plan.entries.reserve(ids.size());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const DistortionKind kind = kAllKinds[k];
    for (std::int64_t taken = 0; taken < counts[k]; ++taken, ++cursor) {
      PlanEntry e;
      e.image_id = ids[cursor];
      e.kind = kind;
      e.level = 1 + static_cast<int>(derive_seed(seed, e.image_id, kind_index(kind), 0) % 10);
      e.seed = derive_seed(seed, e.image_id, kind_index(kind), e.level);
      plan.entries.push_back(e);
    }
  }
  for (; cursor < ids.size(); ++cursor) {
    plan.entries.push_back(PlanEntry{ids[cursor], std::nullopt, 0, 0});
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.image_id < b.image_id; });
  return plan;
}

inline MixingPlan build_plan(const CocoDataset& dataset, const std::array<double, 10>& fractions,
                             std::uint64_t seed) {
  std::vector<std::int64_t> ids;
  ids.reserve(dataset.images.size());
  for (const ImageInfo& img : dataset.images) ids.push_back(img.id);
  return build_plan(std::move(ids), fractions, seed);
}

struct ManifestEntry {
  std::int64_t image_id = 0;
  std::string kind;  // "clean" or a distortion kind name
  int level = 0;
  std::uint64_t seed = 0;
  std::string path;      // relative to the manifest's directory; empty if nothing written
  bool skipped = false;  // local kind with no eligible target, emitted clean
};

struct BuildManifest {
  std::uint64_t global_seed = 0;
  std::vector<ManifestEntry> entries;  // ascending image_id
};

inline nlohmann::json manifest_to_json(const BuildManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const ManifestEntry& e : m.entries) {
    nlohmann::json je = {
        {"image_id", e.image_id}, {"kind", e.kind},          {"level", e.level},
        {"seed", e.seed},         {"path", e.path},
    };
    if (e.skipped) je["skipped"] = true;
    entries.push_back(std::move(je));
  }
  return nlohmann::json{{"global_seed", m.global_seed}, {"entries", std::move(entries)}};
}

inline BuildManifest manifest_from_json(const nlohmann::json& j) {
  BuildManifest m;
  m.global_seed = j.at("global_seed").get<std::uint64_t>();
  for (const auto& je : j.at("entries")) {
    ManifestEntry e;
    e.image_id = je.at("image_id").get<std::int64_t>();
    e.kind = je.at("kind").get<std::string>();
    e.level = je.at("level").get<int>();
    e.seed = je.at("seed").get<std::uint64_t>();
    e.path = je.at("path").get<std::string>();
    e.skipped = je.value("skipped", false);
    m.entries.push_back(std::move(e));
  }
  return m;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("short write: " + path.string());
}

inline void write_binary_file(const std::filesystem::path& path,
                              const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write: " + path.string());
}

// Runs fn(i) for i in [0, n) on `threads` workers pulling from a shared
// counter. The first exception wins and is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const int workers =
      std::max(1, std::min<int>(threads, n > 0 ? static_cast<int>(n) : 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::string output_file_name(const std::string& src_file_name, bool as_jpeg) {
  std::filesystem::path p(src_file_name);
  p.replace_extension(as_jpeg ? ".jpg" : ".png");
  return p.generic_string();
}

// Distorts one plan entry into dst_dir and reports the written path and
// whether the NoTarget fallback fired. Clean entries write nothing.
inline std::pair<std::string, bool> materialize_entry(const PlanEntry& entry,
                                                      const CocoDataset& dataset,
                                                      const std::filesystem::path& src_dir,
                                                      const std::filesystem::path& dst_dir) {
  if (!entry.kind) return {"", false};
  const ImageInfo* info = dataset.find_image(entry.image_id);
  if (info == nullptr) {
    throw IntegrityError("materialize: plan references unknown image id " +
                         std::to_string(entry.image_id));
  }
  const Image img = read_image(src_dir / info->file_name);

  std::vector<Annotation> anns;
  for (std::size_t idx : dataset.annotations_for_image(entry.image_id)) {
    anns.push_back(dataset.annotations[idx]);
  }

  DistortionSpec spec;
  spec.kind = *entry.kind;
  spec.level = entry.level;
  spec.seed = entry.seed;

  // Level 0 is the identity for every kind, so it always goes out lossless.
  const bool as_jpeg = spec.kind == DistortionKind::kCompression && spec.level > 0;
  const std::string rel = output_file_name(info->file_name, as_jpeg);
  const std::filesystem::path out_path = dst_dir / rel;
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());

  if (as_jpeg) {
    // One codec pass is the distortion itself, so the encoded bytes are
    // stored directly instead of re-encoding the round-tripped pixels.
    write_binary_file(out_path, encode_jpeg(img, std::max(2, 100 - 10 * spec.level)));
    return {rel, false};
  }
  const std::optional<Image> out = apply(img, spec, anns);
  if (!out) {
    write_png(out_path, img);
    return {rel, true};
  }
  write_png(out_path, *out);
  return {rel, false};
}

}  // namespace detail

// Writes the distorted copies, a manifest.json covering every plan entry,
// and an unmodified annotations.json into dst_dir. Clean images are not
// copied; NoTarget images are written clean and flagged as skipped.
inline BuildManifest materialize(const MixingPlan& plan, const CocoDataset& dataset,
                                 const std::filesystem::path& src_dir,
                                 const std::filesystem::path& dst_dir, int threads = 1) {
  std::filesystem::create_directories(dst_dir);
  BuildManifest manifest;
  manifest.global_seed = plan.global_seed;
  manifest.entries.resize(plan.entries.size());

  detail::parallel_for(plan.entries.size(), threads, [&](std::size_t i) {
    const PlanEntry& e = plan.entries[i];
    auto [rel, skipped] = detail::materialize_entry(e, dataset, src_dir, dst_dir);
    ManifestEntry& me = manifest.entries[i];
    me.image_id = e.image_id;
    me.kind = e.kind ? std::string(kind_name(*e.kind)) : "clean";
    me.level = e.level;
    me.seed = e.seed;
    me.path = rel;
    me.skipped = skipped;
  });

  detail::write_text_file(dst_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
  detail::write_text_file(dst_dir / "annotations.json", write_dataset(dataset) + "\n");
  return manifest;
}

struct GridSpec {
  std::vector<DistortionKind> kinds;
  std::vector<int> levels;  // each in 1..10; the clean set is the source itself
  std::uint64_t global_seed = 0;
};

// One complete distorted copy of the dataset per (kind, level) cell, laid
// out as dst_root/<kind>/<level>/. Returns the cell manifests in kind-major
// order.
inline std::vector<BuildManifest> build_eval_grid(const CocoDataset& dataset,
                                                  const GridSpec& grid,
                                                  const std::filesystem::path& src_dir,
                                                  const std::filesystem::path& dst_root,
                                                  int threads = 1) {
  for (int level : grid.levels) {
    if (level < 1 || level > 10) {
      throw ParameterError("build_eval_grid: levels must be in 1..10");
    }
  }
  std::vector<BuildManifest> manifests;
  for (DistortionKind kind : grid.kinds) {
    for (int level : grid.levels) {
      MixingPlan plan;
      plan.global_seed = grid.global_seed;
      for (const ImageInfo& img : dataset.images) {
        PlanEntry e;
        e.image_id = img.id;
        e.kind = kind;
        e.level = level;
        e.seed = derive_seed(grid.global_seed, img.id, kind_index(kind), level);
        plan.entries.push_back(e);
      }
      std::sort(plan.entries.begin(), plan.entries.end(),
                [](const PlanEntry& a, const PlanEntry& b) { return a.image_id < b.image_id; });
      const std::filesystem::path cell =
          dst_root / std::string(kind_name(kind)) / std::to_string(level);
      manifests.push_back(materialize(plan, dataset, src_dir, cell, threads));
    }
  }
  return manifests;
}

struct SubsetEntry {
  std::int64_t image_id = 0;
  DistortionKind kind = DistortionKind::kNoise;
  std::vector<std::int64_t> retained_annotation_ids;
};

struct SubsetManifest {
  std::vector<SubsetEntry> entries;
};

inline SubsetManifest subset_manifest_from_json(const nlohmann::json& j) {
  SubsetManifest m;
  for (const auto& je : j.at("entries")) {
    SubsetEntry e;
    e.image_id = je.at("image_id").get<std::int64_t>();
    const auto name = je.at("kind").get<std::string>();
    const auto kind = kind_from_name(name);
    if (!kind) throw ParseError("subset manifest: unknown kind \"" + name + "\"");
    e.kind = *kind;
    for (const auto& id : je.at("retained_annotation_ids")) {
      e.retained_annotation_ids.push_back(id.get<std::int64_t>());
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline nlohmann::json subset_manifest_to_json(const SubsetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const SubsetEntry& e : m.entries) {
    entries.push_back(nlohmann::json{{"image_id", e.image_id},
                                     {"kind", std::string(kind_name(e.kind))},
                                     {"retained_annotation_ids", e.retained_annotation_ids}});
  }
  return nlohmann::json{{"entries", std::move(entries)}};
}

struct KindRatio {
  std::int64_t retained = 0;
  std::int64_t total = 0;
  double ratio = 0.0;
};

struct SubsetResult {
  CocoDataset dataset;
  std::map<DistortionKind, KindRatio> ratios;  // kinds with ≥1 annotation in scope
};

// Keeps the listed images; for local kinds only the retained annotations
// survive, for global kinds all of the image's annotations do. Ratio per
// kind = surviving / original annotations over that kind's images.
inline SubsetResult subset_from_manifest(const CocoDataset& dataset, const SubsetManifest& m) {
  std::map<std::int64_t, const SubsetEntry*> by_image;
  for (const SubsetEntry& e : m.entries) {
    if (dataset.find_image(e.image_id) == nullptr) {
      throw IntegrityError("subset manifest references unknown image id " +
                           std::to_string(e.image_id));
    }
    if (!by_image.emplace(e.image_id, &e).second) {
      throw IntegrityError("subset manifest lists image id " + std::to_string(e.image_id) +
                           " more than once");
    }
  }

  SubsetResult result;
  for (const ImageInfo& img : dataset.images) {
    if (by_image.count(img.id)) result.dataset.images.push_back(img);
  }
  result.dataset.categories = dataset.categories;

  for (const auto& [image_id, entry] : by_image) {
    std::map<std::int64_t, const Annotation*> anns;
    for (std::size_t idx : dataset.annotations_for_image(image_id)) {
      const Annotation& a = dataset.annotations[idx];
      anns.emplace(a.id, &a);
    }
    std::vector<std::int64_t> kept;
    if (is_local(entry->kind)) {
      for (std::int64_t id : entry->retained_annotation_ids) {
        if (!anns.count(id)) {
          throw IntegrityError("subset manifest retains unknown annotation id " +
                               std::to_string(id) + " for image " + std::to_string(image_id));
        }
        kept.push_back(id);
      }
      std::sort(kept.begin(), kept.end());
      kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    } else {
      for (const auto& [id, ann] : anns) {
        (void)ann;
        kept.push_back(id);
      }
    }
    for (std::int64_t id : kept) result.dataset.annotations.push_back(*anns.at(id));

    KindRatio& r = result.ratios.try_emplace(entry->kind).first->second;
    r.retained += static_cast<std::int64_t>(kept.size());
    r.total += static_cast<std::int64_t>(anns.size());
  }

  for (auto it = result.ratios.begin(); it != result.ratios.end();) {
    if (it->second.total == 0) {
      it = result.ratios.erase(it);
    } else {
      it->second.ratio =
          static_cast<double>(it->second.retained) / static_cast<double>(it->second.total);
      ++it;
    }
  }

  std::sort(result.dataset.annotations.begin(), result.dataset.annotations.end(),
            [](const Annotation& a, const Annotation& b) { return a.id < b.id; });
  result.dataset.reindex();
  return result;
}

}  // namespace cocodist

#endif  // COCODIST_BUILDER_HPP_
