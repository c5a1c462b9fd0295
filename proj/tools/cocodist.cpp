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

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cocodist/cocodist.hpp"

namespace fs = std::filesystem;

namespace {

using namespace cocodist;

std::vector<std::string> all_kind_names() {
  std::vector<std::string> names;
  for (DistortionKind k : kAllKinds) names.emplace_back(kind_name(k));
  return names;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("DISTORT_BENCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// Every run leaves its fully resolved configuration next to its outputs so
// a result directory is self-describing.
void write_audit(const fs::path& out_dir, const std::string& command,
                 nlohmann::json config) {
  fs::create_directories(out_dir);
  const nlohmann::json audit = {
      {"command", command},
      {"config", std::move(config)},
      {"version", COCODIST_VERSION},
      {"timestamp", utc_timestamp()},
  };
  std::ofstream out(out_dir / "audit.json", std::ios::binary);
  if (!out) throw IoError("cannot write audit record in " + out_dir.string());
  out << audit.dump(2) << "\n";
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

CocoDataset load_dataset(const fs::path& path) { return parse_dataset(read_text_file(path)); }

struct DistortConfig {
  std::string images;
  std::string out;
  std::string annotations;
  std::string kind;
  int level = 0;
  std::uint64_t seed = 0;
  int threads = 0;
};

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void run_distort(const DistortConfig& cfg) {
  const DistortionKind kind = *kind_from_name(cfg.kind);
  const int threads = resolve_threads(cfg.threads);

  std::optional<CocoDataset> dataset;
  if (!cfg.annotations.empty()) dataset = load_dataset(cfg.annotations);

  std::vector<fs::path> files;
  if (fs::is_directory(cfg.images)) {
    for (const auto& entry : fs::directory_iterator(cfg.images)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(cfg.images);
  }

  // Files that match a dataset image by file name use its id and
  // annotations; the rest fall back to their position in the listing.
  struct Job {
    fs::path src;
    std::int64_t image_id;
    std::vector<Annotation> anns;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < files.size(); ++i) {
    Job job;
    job.src = files[i];
    job.image_id = static_cast<std::int64_t>(i);
    if (dataset) {
      const std::string name = files[i].filename().string();
      for (const ImageInfo& info : dataset->images) {
        if (info.file_name == name) {
          job.image_id = info.id;
          for (std::size_t idx : dataset->annotations_for_image(info.id)) {
            job.anns.push_back(dataset->annotations[idx]);
          }
          break;
        }
      }
    }
    jobs.push_back(std::move(job));
  }

  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  BuildManifest manifest;
  manifest.global_seed = cfg.seed;
  manifest.entries.resize(jobs.size());
  std::mutex log_mutex;

  cocodist::detail::parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    DistortionSpec spec;
    spec.kind = kind;
    spec.level = cfg.level;
    spec.seed = derive_seed(cfg.seed, job.image_id, kind_index(kind), cfg.level);

    const Image img = read_image(job.src);
    const bool as_jpeg = kind == DistortionKind::kCompression && cfg.level > 0;
    const std::string rel = cocodist::detail::output_file_name(
        job.src.filename().string(), as_jpeg);

    ManifestEntry& me = manifest.entries[i];
    me.image_id = job.image_id;
    me.kind = std::string(kind_name(kind));
    me.level = cfg.level;
    me.seed = spec.seed;
    me.path = rel;

    if (as_jpeg) {
      cocodist::detail::write_binary_file(out_dir / rel,
                                          encode_jpeg(img, std::max(2, 100 - 10 * cfg.level)));
      return;
    }
    const std::optional<Image> result = apply(img, spec, job.anns);
    if (!result) {
      write_png(out_dir / rel, img);
      me.skipped = true;
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cout << "skip (no target): " << job.src.string() << "\n";
      return;
    }
    write_png(out_dir / rel, *result);
  });

  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.image_id < b.image_id; });
  cocodist::detail::write_text_file(out_dir / "manifest.json",
                                    manifest_to_json(manifest).dump(2) + "\n");
  write_audit(out_dir, "distort",
              {{"images", cfg.images},
               {"out", cfg.out},
               {"annotations", cfg.annotations},
               {"kind", cfg.kind},
               {"level", cfg.level},
               {"seed", cfg.seed},
               {"threads", threads}});
  std::cout << "distorted " << jobs.size() << " image(s) -> " << cfg.out << "\n";
}

struct BuildConfig {
  std::string annotations;
  std::string images;
  std::string out;
  std::uint64_t seed = 0;
  double fraction = kDefaultKindFraction;
  std::vector<std::string> kinds;
  int threads = 0;
};

void run_build(const BuildConfig& cfg) {
  const CocoDataset dataset = load_dataset(cfg.annotations);
  std::array<double, 10> fractions{};
  const std::vector<std::string> selected =
      cfg.kinds.empty() ? all_kind_names() : cfg.kinds;
  for (const std::string& name : selected) {
    fractions[static_cast<std::size_t>(kind_index(*kind_from_name(name)))] = cfg.fraction;
  }

  const MixingPlan plan = build_plan(dataset, fractions, cfg.seed);
  const int threads = resolve_threads(cfg.threads);
  const BuildManifest manifest = materialize(plan, dataset, cfg.images, cfg.out, threads);

  std::int64_t skipped = 0;
  for (const ManifestEntry& e : manifest.entries) skipped += e.skipped ? 1 : 0;
  write_audit(cfg.out, "build",
              {{"annotations", cfg.annotations},
               {"images", cfg.images},
               {"out", cfg.out},
               {"seed", cfg.seed},
               {"fraction", cfg.fraction},
               {"kinds", selected},
               {"threads", threads}});
  std::cout << "plan: " << plan.entries.size() << " images, " << plan.clean_count()
            << " clean, " << skipped << " skipped (no target)\n";
}

struct GridConfig {
  std::string annotations;
  std::string images;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<std::string> kinds;
  std::vector<int> levels;
  int threads = 0;
};

void run_grid(const GridConfig& cfg) {
  const CocoDataset dataset = load_dataset(cfg.annotations);
  GridSpec grid;
  grid.global_seed = cfg.seed;
  const std::vector<std::string> selected =
      cfg.kinds.empty() ? all_kind_names() : cfg.kinds;
  for (const std::string& name : selected) grid.kinds.push_back(*kind_from_name(name));
  grid.levels = cfg.levels;
  if (grid.levels.empty()) {
    for (int level = 1; level <= 10; ++level) grid.levels.push_back(level);
  }

  const int threads = resolve_threads(cfg.threads);
  const auto manifests = build_eval_grid(dataset, grid, cfg.images, cfg.out, threads);
  write_audit(cfg.out, "grid",
              {{"annotations", cfg.annotations},
               {"images", cfg.images},
               {"out", cfg.out},
               {"seed", cfg.seed},
               {"kinds", selected},
               {"levels", grid.levels},
               {"threads", threads}});
  std::cout << "wrote " << manifests.size() << " grid cell(s) -> " << cfg.out << "\n";
}

struct SubsetConfig {
  std::string manifest;
  std::string annotations;
  std::string out;
};

void run_subset(const SubsetConfig& cfg) {
  const CocoDataset dataset = load_dataset(cfg.annotations);
  const SubsetManifest manifest = subset_manifest_from_json(load_json_file(cfg.manifest));
  const SubsetResult result = subset_from_manifest(dataset, manifest);

  std::string csv = "kind,retained,total,ratio\n";
  for (const auto& [kind, ratio] : result.ratios) {
    csv += std::string(kind_name(kind)) + "," + std::to_string(ratio.retained) + "," +
           std::to_string(ratio.total) + "," + cocodist::detail::fixed6(ratio.ratio) + "\n";
  }
  std::cout << csv;

  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  cocodist::detail::write_text_file(out_dir / "annotations.json",
                                    write_dataset(result.dataset) + "\n");
  cocodist::detail::write_text_file(out_dir / "ratios.csv", csv);
  write_audit(out_dir, "subset",
              {{"manifest", cfg.manifest}, {"annotations", cfg.annotations}, {"out", cfg.out}});
}

struct EvaluateConfig {
  std::string annotations;
  std::string images;  // grid root produced by the grid subcommand
  std::string detections;
  std::string out;
};

// Cells are discovered from the grid directory layout <root>/<kind>/<level>/,
// detections are expected at <detections>/clean.json for the clean set and
// <detections>/<kind>/<level>.json per cell.
void run_evaluate(const EvaluateConfig& cfg) {
  const CocoDataset dataset = load_dataset(cfg.annotations);

  const fs::path clean_file = fs::path(cfg.detections) / "clean.json";
  const EvalResult clean = coco_map(parse_detections(read_text_file(clean_file)), dataset);

  RobustnessReport report;
  report.clean_map = clean.map;
  report.clean_ap50 = clean.ap50;
  report.clean_miou = clean.miou;
  const bool rates_defined = clean.map > 0.0;
  if (!rates_defined) {
    report.errors.push_back("robustness rate undefined: clean mAP is 0");
  }

  int warnings = 0;
  for (DistortionKind kind : kAllKinds) {
    const fs::path kind_dir = fs::path(cfg.images) / std::string(kind_name(kind));
    if (!fs::is_directory(kind_dir)) continue;
    std::vector<int> levels;
    for (const auto& entry : fs::directory_iterator(kind_dir)) {
      if (!entry.is_directory()) continue;
      const std::string name = entry.path().filename().string();
      char* end = nullptr;
      const long level = std::strtol(name.c_str(), &end, 10);
      if (end && *end == '\0' && level >= 1 && level <= 10 &&
          fs::exists(entry.path() / "manifest.json")) {
        levels.push_back(static_cast<int>(level));
      }
    }
    std::sort(levels.begin(), levels.end());
    for (int level : levels) {
      const fs::path det_file = fs::path(cfg.detections) / std::string(kind_name(kind)) /
                                (std::to_string(level) + ".json");
      if (!fs::exists(det_file)) {
        report.missing.push_back(GridCellRef{kind, level});
        std::cerr << "warning: missing detections for " << kind_name(kind) << "/" << level
                  << "\n";
        ++warnings;
        continue;
      }
      const EvalResult cell = coco_map(parse_detections(read_text_file(det_file)), dataset);
      CellScore score;
      score.kind = kind;
      score.level = level;
      score.map = cell.map;
      score.ap50 = cell.ap50;
      score.miou = cell.miou;
      if (rates_defined) score.rate = robustness_rate(cell.map, clean.map);
      report.cells.push_back(score);
    }
  }

  std::vector<double> rates;
  for (const CellScore& c : report.cells) {
    if (c.rate) rates.push_back(*c.rate);
  }
  if (!rates.empty()) report.stats = aggregate_stats(rates);

  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  cocodist::detail::write_text_file(out_dir / "robustness.json",
                                    report_to_json(report).dump(2) + "\n");
  cocodist::detail::write_text_file(out_dir / "robustness.csv", report_to_csv(report));
  write_audit(out_dir, "evaluate",
              {{"annotations", cfg.annotations},
               {"images", cfg.images},
               {"detections", cfg.detections},
               {"out", cfg.out}});
  std::cout << "evaluated " << report.cells.size() << " cell(s), " << warnings
            << " warning(s)\n";
}

struct ReportConfig {
  std::string report;
  std::string out;
};

void run_report(const ReportConfig& cfg) {
  const RobustnessReport report = report_from_json(load_json_file(cfg.report));

  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  int charts = 0;
  for (DistortionKind kind : kAllKinds) {
    const bool present =
        std::any_of(report.cells.begin(), report.cells.end(),
                    [&](const CellScore& c) { return c.kind == kind; });
    if (!present) continue;
    cocodist::detail::write_text_file(
        out_dir / ("chart_" + std::string(kind_name(kind)) + ".svg"),
        render_kind_chart_svg(report, kind));
    ++charts;
  }
  cocodist::detail::write_text_file(out_dir / "summary.json",
                                    violin_summary_json(report).dump(2) + "\n");
  cocodist::detail::write_text_file(out_dir / "report.csv", report_to_csv(report));
  write_audit(out_dir, "report", {{"report", cfg.report}, {"out", cfg.out}});
  std::cout << "wrote " << charts << " chart(s) -> " << cfg.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic image-distortion benchmark toolkit for COCO-style datasets"};
  app.set_version_flag("--version", COCODIST_VERSION);
  app.require_subcommand(1);
  const std::vector<std::string> kind_names = all_kind_names();

  DistortConfig distort_cfg;
  CLI::App* distort = app.add_subcommand("distort", "Distort a single image or a directory");
  distort->add_option("--images", distort_cfg.images, "Input image file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  distort->add_option("--out", distort_cfg.out, "Output directory")->required();
  distort->add_option("--kind", distort_cfg.kind, "Distortion kind")
      ->required()
      ->check(CLI::IsMember(kind_names));
  distort->add_option("--level", distort_cfg.level, "Severity level (0 = identity)")
      ->required()
      ->check(CLI::Range(0, 10));
  distort->add_option("--seed", distort_cfg.seed, "Global seed")->capture_default_str();
  distort->add_option("--annotations", distort_cfg.annotations,
                      "COCO annotations enabling local kinds")
      ->check(CLI::ExistingFile);
  distort->add_option("--threads", distort_cfg.threads, "Worker threads (0 = auto)");
  distort->callback([&] { run_distort(distort_cfg); });

  BuildConfig build_cfg;
  CLI::App* build = app.add_subcommand("build", "Materialize a mixed training set");
  build->add_option("--annotations", build_cfg.annotations, "COCO annotations JSON")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--images", build_cfg.images, "Source image directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  build->add_option("--out", build_cfg.out, "Output directory")->required();
  build->add_option("--seed", build_cfg.seed, "Global seed")->capture_default_str();
  build->add_option("--fraction", build_cfg.fraction, "Fraction of images per kind")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  build->add_option("--kinds", build_cfg.kinds, "Kinds to include (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember(kind_names));
  build->add_option("--threads", build_cfg.threads, "Worker threads (0 = auto)");
  build->callback([&] { run_build(build_cfg); });

  GridConfig grid_cfg;
  CLI::App* grid = app.add_subcommand("grid", "Materialize the full evaluation grid");
  grid->add_option("--annotations", grid_cfg.annotations, "COCO annotations JSON")
      ->required()
      ->check(CLI::ExistingFile);
  grid->add_option("--images", grid_cfg.images, "Source image directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  grid->add_option("--out", grid_cfg.out, "Grid root output directory")->required();
  grid->add_option("--seed", grid_cfg.seed, "Global seed")->capture_default_str();
  grid->add_option("--kinds", grid_cfg.kinds, "Kinds to include (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember(kind_names));
  grid->add_option("--levels", grid_cfg.levels, "Levels to include (default: 1..10)")
      ->delimiter(',')
      ->check(CLI::Range(1, 10));
  grid->add_option("--threads", grid_cfg.threads, "Worker threads (0 = auto)");
  grid->callback([&] { run_grid(grid_cfg); });

  SubsetConfig subset_cfg;
  CLI::App* subset = app.add_subcommand(
      "subset", "Filter a dataset to a curated natural-distortion subset");
  subset->add_option("manifest", subset_cfg.manifest, "Subset manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);
  subset->add_option("--annotations", subset_cfg.annotations, "COCO annotations JSON")
      ->required()
      ->check(CLI::ExistingFile);
  subset->add_option("--out", subset_cfg.out, "Output directory")->required();
  subset->callback([&] { run_subset(subset_cfg); });

  EvaluateConfig evaluate_cfg;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score detections over the clean set and each grid cell");
  evaluate->add_option("--annotations", evaluate_cfg.annotations, "COCO annotations JSON")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--images", evaluate_cfg.images, "Grid root directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate
      ->add_option("--detections", evaluate_cfg.detections,
                   "Directory with clean.json and <kind>/<level>.json results")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--out", evaluate_cfg.out, "Output directory")->required();
  evaluate->callback([&] { run_evaluate(evaluate_cfg); });

  ReportConfig report_cfg;
  CLI::App* report = app.add_subcommand("report", "Render charts and summaries from a report");
  report->add_option("report", report_cfg.report, "Robustness report JSON")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--out", report_cfg.out, "Output directory")->required();
  report->callback([&] { run_report(report_cfg); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
