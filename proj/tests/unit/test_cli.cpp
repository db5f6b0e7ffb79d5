// Copyright (c) 2026 The ptfuse Authors. All Rights Reserved.
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

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ptf/dataio.hpp"
#include "ptf/synth.hpp"

namespace fs = std::filesystem;
using namespace ptf;

#ifndef PTFUSE_CLI_PATH
#error "PTFUSE_CLI_PATH must point at the ptfuse executable"
#endif

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ptfuse_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Run run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + PTFUSE_CLI_PATH + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_text_file(out);
  r.err = read_text_file(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Small static-camera scene: a wall and the ground, rendered at 48 x 64.
SceneSpec tiny_scene(double speed, std::size_t frames) {
  SceneSpec s;
  s.intrinsics = {60, 60, 31.5, 20.5, 64, 48};
  s.cam_from_ego = kitti_cam_from_ego();
  s.frame_count = frames;
  s.path.velocity = {0, 0, speed};
  s.boxes.push_back({{-3, -1, 12}, {3, 1.65, 12.4}, kClassBuilding});
  s.planes.push_back({1.65, 0.2, kClassRoad});
  return s;
}

fs::path write_scene(const SceneSpec& s, const fs::path& dir) {
  const fs::path p = dir / "scene.json";
  write_text_file(p, scene_to_json(s));
  return p;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || read_file(e.path()) != read_file(b / rel)) return false;
    ++n;
  }
  std::size_t m = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) m += e.is_regular_file();
  return n == m && n > 0;
}

std::size_t cloud_size(const fs::path& dir) {
  return nlohmann::json::parse(read_text_file(dir / "manifest.json")).at("points").get<std::size_t>();
}

}  // namespace

TEST_CASE("synth writes a reproducible sequence") {
  const fs::path d = scratch("synth");
  const Run a = run("synth --template oov-car --seed 0 --out " + q(d / "a"), d);
  REQUIRE(a.status == 0);
  REQUIRE(run("synth --template oov-car --seed 0 --out " + q(d / "b"), d).status == 0);
  CHECK(same_tree(d / "a", d / "b"));

  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(d / "a" / "depth")) pngs += e.path().extension() == ".png";
  CHECK(pngs == 4);
  std::istringstream poses(read_text_file(d / "a" / "poses.txt"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(poses, line)) lines += !line.empty();
  CHECK(lines == 4);

  const LabelGrid g = read_label_grid(read_file(d / "a" / "labels" / "000003.label"),
                                      read_file(d / "a" / "labels" / "000003.invalid"));
  CHECK(g == ground_truth_labels(make_oov_scenario({}), VoxelBounds::kitti_labels()));

  const auto manifest = nlohmann::json::parse(read_text_file(d / "a" / "manifest.json"));
  CHECK(manifest.at("config").at("template") == "oov-car");
  CHECK(manifest.at("config").at("seed") == 0);
}

TEST_CASE("synth rejects unknown templates and infeasible scenes") {
  const fs::path d = scratch("synth_bad");
  CHECK(run("synth --template nope --out " + q(d / "x"), d).status == 2);
  OovTemplate t;
  SceneSpec s = make_oov_scenario(t);
  s.path.velocity.setZero();
  // A scene file is taken as given; only templates are checked for feasibility.
  CHECK(run("synth --scene " + q(write_scene(s, d)) + " --out " + q(d / "y"), d).status == 0);
}

TEST_CASE("fuse cardinality and duplicated frames") {
  const fs::path d = scratch("fuse");
  REQUIRE(run("synth --scene " + q(write_scene(tiny_scene(0.0, 2), d)) + " --out " + q(d / "seq"), d).status == 0);
  const DepthMap depth = render_depth(tiny_scene(0.0, 2), 1);
  const auto valid = static_cast<std::size_t>(std::count_if(depth.data.begin(), depth.data.end(), is_valid_depth));
  REQUIRE(valid > 0);

  REQUIRE(run("fuse --seq " + q(d / "seq") + " --frames 1 --factor 1 --out " + q(d / "one"), d).status == 0);
  CHECK(cloud_size(d / "one") == valid);
  CHECK(load_cloud(d / "one").size() == valid);

  REQUIRE(run("fuse --seq " + q(d / "seq") + " --frames 2 --no-hcb --no-ccfd --out " + q(d / "two"), d).status == 0);
  CHECK(cloud_size(d / "two") == 2 * valid);

  REQUIRE(run("fuse --seq " + q(d / "seq") + " --frames 2 --factor 2 --ply --out " + q(d / "ply"), d).status == 0);
  CHECK(cloud_size(d / "ply") > 2 * valid);
  CHECK(fs::exists(d / "ply" / "cloud.ply"));
}

TEST_CASE("fuse reports missing inputs") {
  const fs::path d = scratch("missing");
  REQUIRE(run("synth --scene " + q(write_scene(tiny_scene(1.0, 3), d)) + " --out " + q(d / "seq"), d).status == 0);
  fs::remove(d / "seq" / "poses.txt");
  const Run r = run("fuse --seq " + q(d / "seq") + " --out " + q(d / "o"), d);
  CHECK(r.status != 0);
  CHECK(r.err.find("poses.txt") != std::string::npos);

  REQUIRE(run("synth --scene " + q(write_scene(tiny_scene(1.0, 3), d)) + " --out " + q(d / "seq2"), d).status == 0);
  fs::remove(d / "seq2" / "features" / "000001.tensor");
  fs::remove(d / "seq2" / "depth" / "000000.png");
  fs::remove(d / "seq2" / "depth" / "000000.tensor");
  const Run r2 = run("fuse --seq " + q(d / "seq2") + " --frames 3 --out " + q(d / "o2"), d);
  CHECK(r2.status == 2);
  CHECK(r2.err.find("000001.tensor") != std::string::npos);
  CHECK(r2.err.find("000000.{tensor,png}") != std::string::npos);
}

TEST_CASE("voxelize outputs, empty clouds and determinism") {
  const fs::path d = scratch("voxelize");
  REQUIRE(run("synth --scene " + q(write_scene(tiny_scene(1.0, 3), d)) + " --out " + q(d / "seq"), d).status == 0);
  REQUIRE(run("fuse --seq " + q(d / "seq") + " --frames 3 --out " + q(d / "cloud"), d).status == 0);
  for (const char* name : {"a", "b"}) {
    REQUIRE(run("voxelize --cloud " + q(d / "cloud") + " --deterministic --out " + q(d / name), d).status == 0);
  }
  for (const char* f : {"grid_features.tensor", "grid_counts.tensor", "cross_mask.tensor",
                        "self_mask.tensor", "stats.txt", "stats.json"}) {
    CHECK(read_file(d / "a" / f) == read_file(d / "b" / f));
  }
  const auto m = nlohmann::json::parse(read_text_file(d / "a" / "manifest.json"));
  CHECK(m.at("n_frames") == 3);
  CHECK(m.at("stats").at("rows").size() == 3);

  SceneSpec nothing = tiny_scene(1.0, 2);
  nothing.boxes.clear();
  nothing.planes.clear();
  const fs::path ed = d / "empty";
  fs::create_directories(ed);
  REQUIRE(run("synth --scene " + q(write_scene(nothing, ed)) + " --out " + q(d / "eseq"), d).status == 0);
  REQUIRE(run("voxelize --seq " + q(d / "eseq") + " --frames 2 --res 8,8,4 --out " + q(d / "ev"), d).status == 0);
  const auto counts = read_tensor(read_file(d / "ev" / "grid_counts.tensor")).values<std::uint32_t>();
  CHECK(counts.size() == 8 * 8 * 4);
  for (auto c : counts) CHECK(c == 0);
  for (float f : read_tensor(read_file(d / "ev" / "grid_features.tensor")).values<float>()) CHECK(f == 0.0F);
  const auto stats = nlohmann::json::parse(read_text_file(d / "ev" / "stats.json"));
  CHECK(stats.at("rows").empty());

  CHECK(run("voxelize --cloud " + q(d / "cloud") + " --bounds 0,0,-1,1,-1,1 --out " + q(d / "bad"), d).status == 2);
  CHECK(run("voxelize --cloud " + q(d / "cloud") + " --res 8,8 --out " + q(d / "bad"), d).status == 2);
  CHECK(run("voxelize --out " + q(d / "bad"), d).status == 2);
}

TEST_CASE("voxelize stats decline with offset on forward motion") {
  const fs::path d = scratch("trend");
  REQUIRE(run("synth --template corridor --out " + q(d / "seq"), d).status == 0);
  REQUIRE(run("voxelize --seq " + q(d / "seq") + " --frames 6 --out " + q(d / "v"), d).status == 0);
  const auto rows = nlohmann::json::parse(read_text_file(d / "v" / "stats.json")).at("rows");
  REQUIRE(rows.size() == 6);
  for (std::size_t k = 2; k < rows.size(); ++k) {
    CHECK(rows[k].at("surviving_fraction").get<double>() < rows[k - 1].at("surviving_fraction").get<double>());
  }
}

TEST_CASE("eval") {
  const fs::path d = scratch("eval");
  REQUIRE(run("synth --template oov-car --out " + q(d / "seq"), d).status == 0);
  const fs::path gt = d / "seq" / "labels" / "000003.label";

  const Run same = run("eval --pred " + q(gt) + " --gt " + q(gt) + " --json", d);
  REQUIRE(same.status == 0);
  CHECK(same.out.find("iou = 1\n") != std::string::npos);
  CHECK(same.out.find("miou = 1\n") != std::string::npos);

  REQUIRE(run("voxelize --seq " + q(d / "seq") + " --deterministic --pred-labels --out " + q(d / "v"), d).status == 0);
  const Run oov = run("eval --pred " + q(d / "v" / "pred.label") + " --gt " + q(gt) + " --seq " +
                          q(d / "seq") + " --region oov --out " + q(d / "m"),
                      d);
  REQUIRE(oov.status == 0);
  CHECK(oov.out.find("decomposition_check = pass") != std::string::npos);
  const auto report = nlohmann::json::parse(read_text_file(d / "m" / "metrics.json"));
  CHECK(report.at("oov").at("class_iou").at("1").get<double>() > 0.0);

  CHECK(run("eval --pred " + q(gt) + " --gt " + q(gt) + " --region oov", d).status == 2);
  CHECK(run("eval --pred " + q(gt) + " --gt " + q(gt) + " --region sideways", d).status != 0);
  CHECK(run("eval --pred " + q(d / "nope.label") + " --gt " + q(gt), d).status == 2);
}
