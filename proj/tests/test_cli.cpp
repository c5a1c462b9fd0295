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

#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cocodist/cocodist.hpp"
#include "testutil.hpp"

namespace cocodist {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("COCODIST_CLI");
  if (bin == nullptr) {
    throw std::runtime_error("COCODIST_CLI is not set; run through ctest");
  }
  testutil::TempDir capture;
  const fs::path out_file = capture.path() / "stdout.txt";
  const fs::path err_file = capture.path() / "stderr.txt";
  const std::string cmd = std::string("\"") + bin + "\" " + args + " >" + quoted(out_file) +
                          " 2>" + quoted(err_file);
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = testutil::read_file(out_file);
  result.err = testutil::read_file(err_file);
  return result;
}

TEST(CliTest, VersionExitsCleanly) {
  const CliResult r = run_cli("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find('.'), std::string::npos);
}

TEST(CliTest, MissingSubcommandIsUsageError) {
  EXPECT_EQ(run_cli("").code, 2);
}

TEST(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli("--no-such-flag").code, 2);
}

TEST(CliTest, MissingRequiredOptionsIsUsageError) {
  EXPECT_EQ(run_cli("distort").code, 2);
}

TEST(CliTest, NonexistentInputPathIsUsageError) {
  testutil::TempDir tmp;
  const CliResult r = run_cli("distort --images " + quoted(tmp.path() / "nope.png") + " --out " +
                              quoted(tmp.path() / "out") + " --kind noise --level 3");
  EXPECT_EQ(r.code, 2);
}

TEST(CliTest, InvalidLevelIsUsageError) {
  testutil::TempDir tmp;
  const fs::path src = tmp.path() / "a.png";
  write_png(src, testutil::synth_image(16, 16, 1));
  const CliResult r = run_cli("distort --images " + quoted(src) + " --out " +
                              quoted(tmp.path() / "out") + " --kind noise --level 11");
  EXPECT_EQ(r.code, 2);
}

TEST(CliTest, DistortLevelZeroCopiesPixels) {
  testutil::TempDir tmp;
  const Image src = testutil::synth_image(40, 30, 5);
  const fs::path src_path = tmp.path() / "sample.png";
  write_png(src_path, src);
  const fs::path out_dir = tmp.path() / "out";

  const CliResult r = run_cli("distort --images " + quoted(src_path) + " --out " +
                              quoted(out_dir) + " --kind noise --level 0 --seed 7");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("distorted 1 image(s)"), std::string::npos);

  EXPECT_EQ(read_image(out_dir / "sample.png"), src);

  const BuildManifest manifest = manifest_from_json(
      nlohmann::json::parse(testutil::read_file(out_dir / "manifest.json")));
  EXPECT_EQ(manifest.global_seed, 7u);
  ASSERT_EQ(manifest.entries.size(), 1u);
  EXPECT_EQ(manifest.entries[0].kind, "noise");
  EXPECT_EQ(manifest.entries[0].level, 0);
  EXPECT_EQ(manifest.entries[0].path, "sample.png");
  EXPECT_FALSE(manifest.entries[0].skipped);
  EXPECT_TRUE(fs::exists(out_dir / "audit.json"));
}

TEST(CliTest, DistortLocalKindWithoutTargetsSkips) {
  testutil::TempDir tmp;
  const fs::path src_dir = tmp.path() / "src";
  fs::create_directories(src_dir);
  const Image a = testutil::synth_image(32, 24, 11);
  const Image b = testutil::synth_image(32, 24, 12);
  write_png(src_dir / "a.png", a);
  write_png(src_dir / "b.png", b);
  const fs::path out_dir = tmp.path() / "out";

  const CliResult r = run_cli("distort --images " + quoted(src_dir) + " --out " +
                              quoted(out_dir) + " --kind backlight --level 5 --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("skip (no target)"), std::string::npos);
  EXPECT_NE(r.out.find("distorted 2 image(s)"), std::string::npos);

  EXPECT_EQ(read_image(out_dir / "a.png"), a);
  EXPECT_EQ(read_image(out_dir / "b.png"), b);
  const BuildManifest manifest = manifest_from_json(
      nlohmann::json::parse(testutil::read_file(out_dir / "manifest.json")));
  ASSERT_EQ(manifest.entries.size(), 2u);
  EXPECT_TRUE(manifest.entries[0].skipped);
  EXPECT_TRUE(manifest.entries[1].skipped);
}

TEST(CliTest, BuildWritesDatasetTree) {
  testutil::TempDir tmp;
  const testutil::MiniCoco mini = testutil::make_mini_coco(tmp.path(), 6, 48, 36, 21);
  const fs::path out_dir = tmp.path() / "built";

  const CliResult r = run_cli("build --annotations " + quoted(mini.annotations_path) +
                              " --images " + quoted(mini.images_dir) + " --out " +
                              quoted(out_dir) +
                              " --seed 3 --fraction 0.5 --kinds noise,contrast");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("plan: 6 images, 0 clean, 0 skipped (no target)"), std::string::npos);

  const BuildManifest manifest = manifest_from_json(
      nlohmann::json::parse(testutil::read_file(out_dir / "manifest.json")));
  EXPECT_EQ(manifest.entries.size(), 6u);
  for (const ManifestEntry& e : manifest.entries) {
    EXPECT_TRUE(e.kind == "noise" || e.kind == "contrast");
    EXPECT_TRUE(fs::exists(out_dir / e.path));
  }

  EXPECT_EQ(testutil::read_file(out_dir / "annotations.json"),
            write_dataset(mini.dataset) + "\n");

  const nlohmann::json audit =
      nlohmann::json::parse(testutil::read_file(out_dir / "audit.json"));
  EXPECT_EQ(audit.at("command").get<std::string>(), "build");
  EXPECT_TRUE(audit.contains("config"));
  EXPECT_TRUE(audit.contains("version"));
  EXPECT_TRUE(audit.contains("timestamp"));
}

TEST(CliTest, GridWritesOneDirectoryPerCell) {
  testutil::TempDir tmp;
  const testutil::MiniCoco mini = testutil::make_mini_coco(tmp.path(), 3, 48, 36, 9);
  const fs::path grid_root = tmp.path() / "grid";

  const CliResult r = run_cli("grid --annotations " + quoted(mini.annotations_path) +
                              " --images " + quoted(mini.images_dir) + " --out " +
                              quoted(grid_root) + " --seed 64 --kinds noise --levels 2,5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 2 grid cell(s)"), std::string::npos);
  EXPECT_TRUE(fs::exists(grid_root / "noise" / "2" / "manifest.json"));
  EXPECT_TRUE(fs::exists(grid_root / "noise" / "5" / "manifest.json"));
  EXPECT_TRUE(fs::exists(grid_root / "noise" / "2" / "img_000001.png"));
  EXPECT_TRUE(fs::exists(grid_root / "audit.json"));
}

TEST(CliTest, EvaluateFailsWithoutCleanDetections) {
  testutil::TempDir tmp;
  const testutil::MiniCoco mini = testutil::make_mini_coco(tmp.path(), 2, 32, 24, 4);
  const fs::path grid_root = tmp.path() / "grid";
  const fs::path det_root = tmp.path() / "dets";
  fs::create_directories(grid_root);
  fs::create_directories(det_root);

  const CliResult r = run_cli("evaluate --annotations " + quoted(mini.annotations_path) +
                              " --images " + quoted(grid_root) + " --detections " +
                              quoted(det_root) + " --out " + quoted(tmp.path() / "eval"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(CliTest, EvaluateScoresCellsAndFlagsMissingOnes) {
  testutil::TempDir tmp;
  const testutil::MiniCoco mini = testutil::make_mini_coco(tmp.path(), 3, 48, 36, 17);
  const fs::path grid_root = tmp.path() / "grid";
  const CliResult g = run_cli("grid --annotations " + quoted(mini.annotations_path) +
                              " --images " + quoted(mini.images_dir) + " --out " +
                              quoted(grid_root) + " --seed 5 --kinds noise --levels 2,5");
  ASSERT_EQ(g.code, 0) << g.err;

  const std::string dets_json = write_detections(testutil::perfect_detections(mini.dataset));
  const fs::path det_root = tmp.path() / "dets";
  testutil::write_file(det_root / "clean.json", dets_json);
  testutil::write_file(det_root / "noise" / "2.json", dets_json);

  const fs::path eval_dir = tmp.path() / "eval";
  const CliResult r = run_cli("evaluate --annotations " + quoted(mini.annotations_path) +
                              " --images " + quoted(grid_root) + " --detections " +
                              quoted(det_root) + " --out " + quoted(eval_dir));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("evaluated 1 cell(s), 1 warning(s)"), std::string::npos);
  EXPECT_NE(r.err.find("missing detections for noise/5"), std::string::npos);

  const RobustnessReport report = report_from_json(
      nlohmann::json::parse(testutil::read_file(eval_dir / "robustness.json")));
  EXPECT_DOUBLE_EQ(report.clean_map, 1.0);
  ASSERT_EQ(report.cells.size(), 1u);
  EXPECT_EQ(report.cells[0].kind, DistortionKind::kNoise);
  EXPECT_EQ(report.cells[0].level, 2);
  ASSERT_TRUE(report.cells[0].rate.has_value());
  EXPECT_DOUBLE_EQ(*report.cells[0].rate, 1.0);
  ASSERT_EQ(report.missing.size(), 1u);
  EXPECT_EQ(report.missing[0].kind, DistortionKind::kNoise);
  EXPECT_EQ(report.missing[0].level, 5);
  ASSERT_TRUE(report.stats.has_value());

  const std::string csv = testutil::read_file(eval_dir / "robustness.csv");
  EXPECT_EQ(csv.rfind("kind,level,mAP,AP50,mIoU,rate\n", 0), 0u);
}

TEST(CliTest, ReportRendersChartsAndSummary) {
  testutil::TempDir tmp;
  RobustnessReport report;
  report.clean_map = 0.6;
  report.clean_ap50 = 0.7;
  report.clean_miou = 0.65;
  for (int level = 1; level <= 3; ++level) {
    CellScore c;
    c.kind = DistortionKind::kNoise;
    c.level = level;
    c.map = 0.6 - 0.1 * level;
    c.ap50 = 0.7 - 0.1 * level;
    c.miou = 0.6;
    c.rate = c.map / 0.6;
    report.cells.push_back(c);
  }
  const fs::path report_path = tmp.path() / "robustness.json";
  testutil::write_file(report_path, report_to_json(report).dump(2) + "\n");

  const fs::path out_dir = tmp.path() / "report";
  const CliResult r = run_cli("report " + quoted(report_path) + " --out " + quoted(out_dir));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 1 chart(s)"), std::string::npos);

  const std::string svg = testutil::read_file(out_dir / "chart_noise.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  const nlohmann::json summary =
      nlohmann::json::parse(testutil::read_file(out_dir / "summary.json"));
  EXPECT_EQ(summary.at("count").get<int>(), 3);
  const std::string csv = testutil::read_file(out_dir / "report.csv");
  EXPECT_EQ(csv.rfind("kind,level,mAP,AP50,mIoU,rate\n", 0), 0u);
  EXPECT_TRUE(fs::exists(out_dir / "audit.json"));
}

TEST(CliTest, SubsetFiltersAnnotationsAndReportsRatios) {
  testutil::TempDir tmp;
  const testutil::MiniCoco mini = testutil::make_mini_coco(tmp.path(), 3, 32, 24, 30);

  const nlohmann::json manifest = {
      {"entries",
       {{{"image_id", 1}, {"kind", "loc-defocus"}, {"retained_annotation_ids", {11}}},
        {{"image_id", 3}, {"kind", "noise"}, {"retained_annotation_ids", nlohmann::json::array()}}}},
  };
  const fs::path manifest_path = tmp.path() / "subset.json";
  testutil::write_file(manifest_path, manifest.dump(2));

  const fs::path out_dir = tmp.path() / "subset";
  const CliResult r = run_cli("subset " + quoted(manifest_path) + " --annotations " +
                              quoted(mini.annotations_path) + " --out " + quoted(out_dir));
  ASSERT_EQ(r.code, 0) << r.err;

  const std::string expected_csv =
      "kind,retained,total,ratio\n"
      "noise,2,2,1.000000\n"
      "loc-defocus,1,2,0.500000\n";
  EXPECT_EQ(r.out, expected_csv);
  EXPECT_EQ(testutil::read_file(out_dir / "ratios.csv"), expected_csv);

  const CocoDataset filtered = parse_dataset(testutil::read_file(out_dir / "annotations.json"));
  ASSERT_EQ(filtered.images.size(), 2u);
  EXPECT_EQ(filtered.images[0].id, 1);
  EXPECT_EQ(filtered.images[1].id, 3);
  ASSERT_EQ(filtered.annotations.size(), 3u);
  EXPECT_EQ(filtered.annotations[0].id, 11);
  EXPECT_EQ(filtered.annotations[1].id, 31);
  EXPECT_EQ(filtered.annotations[2].id, 32);
}

}  // namespace
}  // namespace cocodist
