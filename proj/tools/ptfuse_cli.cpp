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

// ptfuse: temporal point-feature fusion, voxelization, evaluation and
// synthetic scene generation from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ptf/dataio.hpp"
#include "ptf/fusion.hpp"
#include "ptf/metrics.hpp"
#include "ptf/parallel.hpp"
#include "ptf/synth.hpp"
#include "ptf/voxel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_csv(const std::string& s, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + tok + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw UsageError(std::string(flag) + " expects " + std::to_string(expected) +
                     " comma-separated values");
  }
  return out;
}

ptf::VoxelIndex parse_res(const std::string& s, const char* flag) {
  const auto v = parse_csv(s, 3, flag);
  ptf::VoxelIndex r{};
  for (std::size_t a = 0; a < 3; ++a) {
    if (v[a] < 1 || v[a] != static_cast<double>(static_cast<std::size_t>(v[a]))) {
      throw UsageError(std::string(flag) + ": resolution must be positive integers");
    }
    r[a] = static_cast<std::size_t>(v[a]);
  }
  return r;
}

std::string res_string(const ptf::VoxelIndex& r) {
  return std::to_string(r[0]) + "," + std::to_string(r[1]) + "," + std::to_string(r[2]);
}

std::string bounds_string(const ptf::VoxelBounds& b) {
  std::ostringstream os;
  os << b.min_corner.x() << ',' << b.max_corner.x() << ',' << b.min_corner.y() << ','
     << b.max_corner.y() << ',' << b.min_corner.z() << ',' << b.max_corner.z();
  return os.str();
}

ptf::VoxelBounds make_bounds(const std::string& bounds, const std::string& res) {
  const auto v = parse_csv(bounds, 6, "--bounds");
  ptf::VoxelBounds b;
  b.min_corner = {v[0], v[2], v[4]};
  b.max_corner = {v[1], v[3], v[5]};
  b.resolution = parse_res(res, "--res");
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--bounds/--res: ") + e.what());
  }
  return b;
}

std::string scan_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void write_json(const fs::path& path, const json& j) { ptf::write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Options shared by fuse and voxelize

struct FuseOptions {
  std::string seq;
  long frame = -1;  // current scan index; -1 = last pose
  std::size_t frames = 4;
  std::size_t factor = 2;
  std::size_t stride = 1;
  bool no_hcb = false;
  bool no_ccfd = false;
  bool camera_frame = false;

  void add_to(CLI::App* app) {
    app->add_option("--seq", seq, "Sequence directory (calib.txt, poses.txt, depth/, features/)");
    app->add_option("--frame", frame, "Current scan index (default: last pose)");
    app->add_option("--frames", frames, "Number of fused frames n")->check(CLI::PositiveNumber);
    app->add_option("--factor", factor, "Current-frame densification factor")->check(CLI::PositiveNumber);
    app->add_option("--stride", stride, "Scan stride between fused frames")->check(CLI::PositiveNumber);
    app->add_flag("--no-hcb", no_hcb, "Disable historical depth weighting");
    app->add_flag("--no-ccfd", no_ccfd, "Disable current-frame densification");
    app->add_flag("--camera-frame", camera_frame,
                  "Keep points in the current camera frame instead of the ego frame");
  }

  json to_json() const {
    return {{"seq", seq},         {"frame", frame},        {"frames", frames},
            {"factor", factor},   {"stride", stride},      {"no_hcb", no_hcb},
            {"no_ccfd", no_ccfd}, {"camera_frame", camera_frame}};
  }
};

struct FuseRun {
  ptf::FeaturedPointCloud cloud;
  ptf::CalibSet calib;
  std::vector<std::size_t> scans;  // by offset
  std::size_t n_frames = 1;
};

ptf::DepthMap load_depth(const fs::path& stem) {
  const fs::path tensor = stem.string() + ".tensor";
  if (fs::exists(tensor)) return ptf::depth_map_from_tensor(ptf::read_tensor(ptf::read_file(tensor)));
  return ptf::read_depth_png(ptf::read_file(stem.string() + ".png"));
}

FuseRun run_fuse(const FuseOptions& o) {
  if (o.seq.empty()) throw UsageError("--seq is required");
  const fs::path seq = o.seq;
  std::vector<std::string> missing;
  const fs::path calib_path = seq / "calib.txt";
  const fs::path poses_path = seq / "poses.txt";
  if (!fs::exists(calib_path)) missing.push_back(calib_path.string());
  if (!fs::exists(poses_path)) missing.push_back(poses_path.string());
  const auto report_missing = [&] {
    std::string msg = "missing input files:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw std::runtime_error(msg);
  };
  if (!missing.empty()) report_missing();

  const ptf::PoseTrack poses = ptf::parse_poses(ptf::read_text_file(poses_path));
  const long last = static_cast<long>(poses.size()) - 1;
  const long current = o.frame < 0 ? last : o.frame;
  if (current > last) {
    throw UsageError("--frame " + std::to_string(current) + " beyond the " +
                     std::to_string(poses.size()) + " poses in " + poses_path.string());
  }

  FuseRun run;
  run.n_frames = o.frames;
  for (std::size_t k = 0; k < o.frames; ++k) {
    const long idx = std::max(0L, current - static_cast<long>(k * o.stride));  // clamp to first scan
    run.scans.push_back(static_cast<std::size_t>(idx));
  }
  for (std::size_t scan : run.scans) {
    const fs::path d = seq / "depth" / scan_name(scan);
    if (!fs::exists(d.string() + ".tensor") && !fs::exists(d.string() + ".png")) {
      missing.push_back(d.string() + ".{tensor,png}");
    }
    const fs::path f = seq / "features" / (scan_name(scan) + ".tensor");
    if (!fs::exists(f)) missing.push_back(f.string());
  }
  if (!missing.empty()) report_missing();

  std::vector<ptf::FrameBundle> frames;
  for (std::size_t k = 0; k < run.scans.size(); ++k) {
    const std::size_t scan = run.scans[k];
    ptf::FrameBundle b;
    b.depth = load_depth(seq / "depth" / scan_name(scan));
    b.features = ptf::feature_map_from_tensor(
        ptf::read_tensor(ptf::read_file(seq / "features" / (scan_name(scan) + ".tensor"))));
    if (k == 0) {
      run.calib = ptf::parse_calib(ptf::read_text_file(calib_path), b.depth.width, b.depth.height);
    }
    b.intrinsics = run.calib.intrinsics;
    b.pose = poses[scan];
    b.offset = static_cast<int>(k);
    frames.push_back(std::move(b));
  }

  ptf::FuseConfig cfg;
  cfg.n_frames = o.frames;
  cfg.densify_factor = o.factor;
  cfg.enable_hcb = !o.no_hcb;
  cfg.enable_ccfd = !o.no_ccfd;
  if (!o.camera_frame) cfg.output_from_camera = run.calib.cam_from_lidar.inverse();
  run.cloud = ptf::fuse(frames, cfg);
  return run;
}

json origin_counts(const ptf::FeaturedPointCloud& cloud) {
  std::map<int, std::size_t> counts;
  for (int o : cloud.origin) ++counts[o];
  json j = json::object();
  for (const auto& [o, n] : counts) j[std::to_string(o)] = n;
  return j;
}

// ---------------------------------------------------------------------------

struct Common {
  int threads = 0;
  bool deterministic = false;
  bool json_out = false;
  std::string out;

  void add_to(CLI::App* app, bool needs_out = true) {
    app->add_option("--threads", threads, "Worker threads (default: OpenMP default)");
    app->add_flag("--deterministic", deterministic, "Ordered accumulation, reproducible bytes");
    app->add_flag("--json", json_out, "Print a JSON summary on stdout");
    auto* o = app->add_option("--out", out, "Output directory");
    if (needs_out) o->required();
  }
  void apply() const {
    if (threads > 0) ptf::set_num_threads(threads);
  }
  json to_json() const {
    // The output directory is where the manifest lives, so it is not echoed.
    return {{"threads", threads}, {"deterministic", deterministic}};
  }
};

int cmd_fuse(const FuseOptions& fo, const Common& co, bool ply, std::size_t ply_channels) {
  co.apply();
  const auto t0 = std::chrono::steady_clock::now();
  const FuseRun run = run_fuse(fo);
  std::vector<std::string> failed;
  try {
    run.cloud.validate();
  } catch (const std::exception& e) {
    failed.push_back(e.what());
  }
  for (int o : run.cloud.origin) {
    if (o < 0 || static_cast<std::size_t>(o) >= run.n_frames) {
      failed.push_back("point origin outside [0, n_frames)");
      break;
    }
  }
  const fs::path out = co.out;
  ptf::save_cloud(out, run.cloud);
  json outputs = {"positions.tensor", "features.tensor", "origin.tensor", "source_pixel.tensor"};
  if (ply) {
    ptf::write_text_file(out / "cloud.ply", ptf::write_ply(run.cloud, ply_channels));
    outputs.push_back("cloud.ply");
  }
  json manifest = {{"command", "fuse"},
                   {"config", {{"fuse", fo.to_json()}, {"run", co.to_json()}, {"ply", ply},
                               {"ply_channels", ply_channels}}},
                   {"scans", run.scans},
                   {"n_frames", run.n_frames},
                   {"points", run.cloud.size()},
                   {"channels", run.cloud.channels},
                   {"points_per_origin", origin_counts(run.cloud)},
                   {"outputs", outputs},
                   {"checks_failed", failed}};
  write_json(out / "manifest.json", manifest);
  for (const auto& f : failed) std::cerr << "check failed: " << f << '\n';
  std::cerr << "fuse: " << run.cloud.size() << " points from scans";
  for (auto s : run.scans) std::cerr << ' ' << s;
  std::cerr << " -> " << out.string() << " (" << elapsed_ms(t0) << " ms)\n";
  if (co.json_out) std::cout << manifest.dump(2) << '\n';
  return failed.empty() ? kExitOk : kExitCheckFailed;
}

std::string stats_table(const ptf::CoverageStats& s) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "offset" << std::right << std::setw(14) << "lifted"
     << std::setw(14) << "surviving" << std::setw(10) << "(%)" << std::setw(12) << "voxels"
     << std::setw(10) << "(%)" << '\n';
  for (const auto& r : s.rows) {
    os << std::left << std::setw(8) << ("t-" + std::to_string(r.offset)) << std::right
       << std::setw(14) << r.lifted_points << std::setw(14) << r.surviving_points << std::setw(10)
       << std::fixed << std::setprecision(2) << 100.0 * r.surviving_fraction << std::setw(12)
       << r.touched_voxels << std::setw(10) << 100.0 * r.touched_fraction << '\n';
  }
  return os.str();
}

json stats_json(const ptf::CoverageStats& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"offset", r.offset},
                    {"lifted_points", r.lifted_points},
                    {"surviving_points", r.surviving_points},
                    {"surviving_fraction", r.surviving_fraction},
                    {"touched_voxels", r.touched_voxels},
                    {"touched_fraction", r.touched_fraction}});
  }
  return {{"total_voxels", s.total_voxels}, {"rows", rows}};
}

struct VoxelOptions {
  std::string cloud;
  std::string bounds = "0,51.2,-25.6,25.6,-2,4.4";
  std::string res = "128,128,16";
  bool pred_labels = false;
  std::string label_res = "256,256,32";
};

int cmd_voxelize(const FuseOptions& fo, const Common& co, const VoxelOptions& vo,
                 bool frames_given) {
  co.apply();
  const ptf::VoxelBounds bounds = make_bounds(vo.bounds, vo.res);
  const auto t0 = std::chrono::steady_clock::now();

  ptf::FeaturedPointCloud cloud;
  std::size_t n_frames = fo.frames;
  if (!vo.cloud.empty()) {
    cloud = ptf::load_cloud(vo.cloud);
    const fs::path m = fs::path(vo.cloud) / "manifest.json";
    if (!frames_given && fs::exists(m)) {
      n_frames = json::parse(ptf::read_text_file(m)).value("n_frames", fo.frames);
    }
  } else if (!fo.seq.empty()) {
    cloud = run_fuse(fo).cloud;
  } else {
    throw UsageError("voxelize needs --cloud or --seq");
  }

  const auto mode = co.deterministic ? ptf::Accumulation::kDeterministic : ptf::Accumulation::kSharded;
  const ptf::FeatureVoxelGrid grid = ptf::voxelize(cloud, bounds, n_frames, mode);
  const ptf::CoverageStats stats = ptf::coverage_stats(cloud, bounds);

  const fs::path out = co.out;
  ptf::save_grid(out, grid);
  ptf::write_text_file(out / "stats.txt", stats_table(stats));
  write_json(out / "stats.json", stats_json(stats));
  json outputs = {"grid_features.tensor", "grid_counts.tensor", "cross_mask.tensor",
                  "self_mask.tensor", "stats.txt", "stats.json"};

  if (vo.pred_labels) {
    const ptf::VoxelIndex lres = parse_res(vo.label_res, "--label-res");
    const auto up = ptf::trilinear_resize(grid.features, lres);
    ptf::LabelGrid pred(lres);
    pred.labels = ptf::argmax_labels(up);
    const auto bytes = ptf::write_label_grid(pred);
    ptf::write_file(out / "pred.label", bytes.labels);
    ptf::write_file(out / "pred.invalid", bytes.invalid);
    outputs.push_back("pred.label");
    outputs.push_back("pred.invalid");
  }

  std::size_t occupied = 0;
  std::uint64_t counted = 0;
  for (auto c : grid.counts) {
    occupied += c > 0;
    counted += c;
  }
  std::uint64_t surviving = 0;
  for (const auto& r : stats.rows) surviving += r.surviving_points;
  std::vector<std::string> failed;
  if (counted != surviving) failed.push_back("voxel counts do not add up to in-bounds points");
  json manifest = {{"command", "voxelize"},
                   {"config", {{"fuse", fo.to_json()},
                               {"run", co.to_json()},
                               {"cloud", vo.cloud},
                               {"bounds", vo.bounds},
                               {"res", vo.res},
                               {"pred_labels", vo.pred_labels},
                               {"label_res", vo.label_res}}},
                   {"n_frames", n_frames},
                   {"points", cloud.size()},
                   {"occupied_voxels", occupied},
                   {"stats", stats_json(stats)},
                   {"outputs", outputs},
                   {"checks_failed", failed}};
  write_json(out / "manifest.json", manifest);
  std::cerr << stats_table(stats) << "voxelize: " << elapsed_ms(t0) << " ms\n";
  for (const auto& f : failed) std::cerr << "check failed: " << f << '\n';
  if (co.json_out) std::cout << manifest.dump(2) << '\n';
  return failed.empty() ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

ptf::LabelGrid load_labels(const std::string& label_path, const ptf::VoxelIndex& dims,
                           bool want_invalid) {
  const fs::path lp = label_path;
  fs::path ip = lp;
  ip.replace_extension(".invalid");
  const ptf::Bytes labels = ptf::read_file(lp);
  ptf::Bytes invalid((dims[0] * dims[1] * dims[2] + 7) / 8, 0);
  if (want_invalid && fs::exists(ip)) invalid = ptf::read_file(ip);
  return ptf::read_label_grid(labels, invalid, dims);
}

json report_json(const ptf::MetricsReport& r) {
  json classes = json::object();
  for (std::size_t k = 1; k < r.class_iou.size(); ++k) {
    if (r.class_iou[k]) classes[std::to_string(k)] = *r.class_iou[k];
  }
  return {{"empty", r.empty}, {"iou", r.iou}, {"miou", r.miou}, {"class_iou", classes}};
}

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string dims = "256,256,32";
  std::size_t num_classes = ptf::kKittiClasses;
  std::string region = "all";
  std::string seq;
  std::string calib;
  std::string image_size;
  std::string bounds = "0,51.2,-25.6,25.6,-2,4.4";
};

int cmd_eval(const EvalOptions& eo, const Common& co) {
  co.apply();
  const ptf::VoxelIndex dims = parse_res(eo.dims, "--dims");
  const ptf::LabelGrid pred = load_labels(eo.pred, dims, false);
  const ptf::LabelGrid gt = load_labels(eo.gt, dims, true);

  ptf::ConfusionAccumulator all(eo.num_classes);
  all.accumulate(pred, gt);

  json report = {{"command", "eval"}, {"region", eo.region}};
  bool decomposition_ok = true;
  const bool have_camera = !eo.seq.empty() || !eo.calib.empty();
  ptf::ConfusionAccumulator selected = all;
  if (have_camera) {
    ptf::CalibSet calib;
    if (!eo.seq.empty()) {
      // Image size from the current scan's depth map.
      const fs::path seq = eo.seq;
      const auto poses = ptf::parse_poses(ptf::read_text_file(seq / "poses.txt"));
      const ptf::DepthMap d = load_depth(seq / "depth" / scan_name(poses.size() - 1));
      calib = ptf::parse_calib(ptf::read_text_file(seq / "calib.txt"), d.width, d.height);
    } else {
      const auto wh = parse_csv(eo.image_size, 2, "--image-size");
      calib = ptf::parse_calib(ptf::read_text_file(eo.calib), static_cast<std::size_t>(wh[0]),
                               static_cast<std::size_t>(wh[1]));
    }
    ptf::VoxelBounds b = make_bounds(eo.bounds, eo.dims);
    const ptf::ViewMask mask = ptf::oov_mask(b, calib.intrinsics, calib.cam_from_lidar);
    const auto oov = mask.out_of_view();
    ptf::ConfusionAccumulator in_view(eo.num_classes), out_view(eo.num_classes);
    in_view.accumulate(pred, gt, mask.in_view);
    out_view.accumulate(pred, gt, oov);
    ptf::ConfusionAccumulator sum = in_view;
    sum.merge(out_view);
    decomposition_ok = sum == all;
    report["inview"] = report_json(ptf::finalize(in_view));
    report["oov"] = report_json(ptf::finalize(out_view));
    if (eo.region == "inview") selected = in_view;
    if (eo.region == "oov") selected = out_view;
  } else if (eo.region != "all") {
    throw UsageError("--region " + eo.region + " needs --seq or --calib with --image-size");
  }
  report["all"] = report_json(ptf::finalize(all));
  const ptf::MetricsReport sel = ptf::finalize(selected);
  report["selected"] = report_json(sel);
  report["decomposition_check"] = have_camera ? (decomposition_ok ? "pass" : "fail") : "skipped";

  std::cout << "region = " << eo.region << '\n'
            << "empty = " << (sel.empty ? "true" : "false") << '\n'
            << std::setprecision(6) << "iou = " << sel.iou << '\n'
            << "miou = " << sel.miou << '\n';
  for (std::size_t k = 1; k < sel.class_iou.size(); ++k) {
    if (sel.class_iou[k]) std::cout << "class_" << k << "_iou = " << *sel.class_iou[k] << '\n';
  }
  std::cout << "decomposition_check = " << report["decomposition_check"].get<std::string>() << '\n';
  if (!co.out.empty()) {
    fs::create_directories(co.out);
    report["config"] = {{"pred", eo.pred}, {"gt", eo.gt}, {"dims", eo.dims},
                        {"num_classes", eo.num_classes}, {"region", eo.region},
                        {"seq", eo.seq}, {"calib", eo.calib}, {"image_size", eo.image_size},
                        {"bounds", eo.bounds}, {"run", co.to_json()}};
    write_json(fs::path(co.out) / "metrics.json", report);
  }
  if (co.json_out) std::cout << report.dump(2) << '\n';
  return decomposition_ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string template_name = "oov-car";
  std::string scene;
  std::uint64_t seed = 0;
  std::size_t frames = 4;
  double noise = 0.0;
  std::string label_bounds = "0,51.2,-25.6,25.6,-2,4.4";
  std::string label_res = "256,256,32";
};

int cmd_synth(const SynthOptions& so, const Common& co, bool frames_given, bool seed_given) {
  co.apply();
  ptf::SceneSpec spec;
  if (!so.scene.empty()) {
    spec = ptf::scene_from_json(ptf::read_text_file(so.scene));
  } else if (so.template_name == "oov-car") {
    ptf::OovTemplate t;
    t.history = so.frames - 1;
    t.seed = so.seed;
    spec = ptf::make_oov_scenario(t);
  } else if (so.template_name == "corridor") {
    spec = ptf::make_corridor_scenario(frames_given ? so.frames : 6);
  } else {
    throw UsageError("unknown template '" + so.template_name + "' (oov-car, corridor)");
  }
  if (seed_given) spec.seed = so.seed;
  if (so.noise > 0.0) spec.depth_noise_sigma = so.noise;

  const fs::path out = co.out;
  fs::create_directories(out / "depth");
  fs::create_directories(out / "features");
  fs::create_directories(out / "labels");

  ptf::CalibSet calib;
  const auto& K = spec.intrinsics;
  calib.projection << K.fx, 0, K.cx, 0, 0, K.fy, K.cy, 0, 0, 0, 1, 0;
  calib.cam_from_lidar = spec.cam_from_ego;
  ptf::write_text_file(out / "calib.txt", ptf::format_calib(calib));

  ptf::PoseTrack poses;
  for (std::size_t i = 0; i < spec.frame_count; ++i) {
    poses.push_back(spec.path.pose(i));
    const ptf::RenderedFrame r = ptf::render_frame(spec, i);
    const std::string name = scan_name(i);
    ptf::write_file(out / "depth" / (name + ".png"), ptf::write_depth_png(r.depth));
    ptf::write_file(out / "depth" / (name + ".tensor"), ptf::write_tensor(ptf::to_tensor(r.depth)));
    ptf::write_file(out / "features" / (name + ".tensor"),
                    ptf::write_tensor(ptf::to_tensor(ptf::one_hot_features(r, spec.num_classes))));
  }
  ptf::write_text_file(out / "poses.txt", ptf::format_poses(poses));

  const ptf::VoxelBounds lb = make_bounds(so.label_bounds, so.label_res);
  const ptf::LabelGrid gt = ptf::ground_truth_labels(spec, lb);
  const auto bytes = ptf::write_label_grid(gt);
  const std::string cur = scan_name(spec.current_frame());
  ptf::write_file(out / "labels" / (cur + ".label"), bytes.labels);
  ptf::write_file(out / "labels" / (cur + ".invalid"), bytes.invalid);
  ptf::write_text_file(out / "scene.json", ptf::scene_to_json(spec) + "\n");

  json manifest = {{"command", "synth"},
                   {"config", {{"template", so.template_name}, {"scene", so.scene},
                               {"seed", spec.seed}, {"frames", spec.frame_count},
                               {"noise", so.noise}, {"label_bounds", so.label_bounds},
                               {"label_res", so.label_res}, {"run", co.to_json()}}},
                   {"frame_count", spec.frame_count},
                   {"current_scan", spec.current_frame()}};
  write_json(out / "manifest.json", manifest);
  std::cerr << "synth: " << spec.frame_count << " scans -> " << out.string() << '\n';
  if (co.json_out) std::cout << manifest.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ptfuse: temporal point-feature fusion for semantic scene completion"};
  app.require_subcommand(1);

  FuseOptions fuse_opts;
  Common fuse_common;
  bool ply = false;
  std::size_t ply_channels = 3;
  auto* fuse = app.add_subcommand("fuse", "Lift, weight, densify and align frames into one cloud");
  fuse_opts.add_to(fuse);
  fuse_common.add_to(fuse);
  fuse->add_flag("--ply", ply, "Also write cloud.ply");
  fuse->add_option("--ply-channels", ply_channels, "Feature channels written to the PLY");

  FuseOptions vox_fuse;
  Common vox_common;
  VoxelOptions vox_opts;
  auto* vox = app.add_subcommand("voxelize", "Aggregate a fused cloud into a voxel feature grid");
  vox_fuse.add_to(vox);
  vox_common.add_to(vox);
  vox->add_option("--cloud", vox_opts.cloud, "Cloud directory written by 'fuse'");
  vox->add_option("--bounds", vox_opts.bounds, "x0,x1,y0,y1,z0,z1 in meters (ego frame)");
  vox->add_option("--res", vox_opts.res, "Grid resolution X,Y,Z");
  vox->add_flag("--pred-labels", vox_opts.pred_labels,
                "Upsample to --label-res and write argmax labels");
  vox->add_option("--label-res", vox_opts.label_res, "Label grid resolution X,Y,Z");

  EvalOptions eval_opts;
  Common eval_common;
  auto* eval = app.add_subcommand("eval", "IoU / mIoU of a label grid, optionally per view region");
  eval_common.add_to(eval, false);
  eval->add_option("--pred", eval_opts.pred, "Predicted .label file")->required();
  eval->add_option("--gt", eval_opts.gt, "Ground-truth .label file (.invalid next to it)")->required();
  eval->add_option("--dims", eval_opts.dims, "Grid dims X,Y,Z");
  eval->add_option("--num-classes", eval_opts.num_classes, "Number of classes including empty");
  eval->add_option("--region", eval_opts.region, "all, inview or oov")
      ->check(CLI::IsMember({"all", "inview", "oov"}));
  eval->add_option("--seq", eval_opts.seq, "Sequence directory providing calib and image size");
  eval->add_option("--calib", eval_opts.calib, "calib.txt for the view mask");
  eval->add_option("--image-size", eval_opts.image_size, "W,H of the camera image");
  eval->add_option("--bounds", eval_opts.bounds, "x0,x1,y0,y1,z0,z1 of the label grid");

  SynthOptions synth_opts;
  Common synth_common;
  auto* synth = app.add_subcommand("synth", "Write a synthetic sequence with ground truth");
  synth_common.add_to(synth);
  synth->add_option("--template", synth_opts.template_name, "oov-car or corridor");
  synth->add_option("--scene", synth_opts.scene, "Scene JSON instead of a template");
  auto* synth_seed = synth->add_option("--seed", synth_opts.seed, "Random seed");
  auto* synth_frames =
      synth->add_option("--frames", synth_opts.frames, "Scans in the sequence")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_opts.noise, "Gaussian depth noise sigma in meters");
  synth->add_option("--label-bounds", synth_opts.label_bounds, "Label grid bounds");
  synth->add_option("--label-res", synth_opts.label_res, "Label grid resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fuse) return cmd_fuse(fuse_opts, fuse_common, ply, ply_channels);
    if (*vox) return cmd_voxelize(vox_fuse, vox_common, vox_opts, vox->count("--frames") > 0);
    if (*eval) return cmd_eval(eval_opts, eval_common);
    if (*synth) return cmd_synth(synth_opts, synth_common, synth_frames->count() > 0,
                                synth_seed->count() > 0);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
