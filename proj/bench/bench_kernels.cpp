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


// Times the OpenMP kernels against their single-threaded reference versions.
//
//   ptfuse_bench [--reps N] [--threads T]
//
// Each row reports the best of N runs. "speedup" is reference / parallel at
// T threads; on a machine with fewer cores than T it can drop below 1.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "ptf/fusion.hpp"
#include "ptf/geometry.hpp"
#include "ptf/metrics.hpp"
#include "ptf/parallel.hpp"
#include "ptf/reference.hpp"
#include "ptf/resample.hpp"
#include "ptf/synth.hpp"
#include "ptf/voxel.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int g_reps = 3;

double best_of(const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < g_reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

// Runs `par` at one thread and at `threads`, and `ref` once per repetition.
void row(const char* name, int threads, const std::function<void()>& ref,
         const std::function<void()>& par) {
  const double t_ref = best_of(ref);
  ptf::set_num_threads(1);
  const double t_one = best_of(par);
  ptf::set_num_threads(threads);
  const double t_par = best_of(par);
  std::printf("%-28s %10.2f %10.2f %10.2f %8.2fx\n", name, t_ref * 1e3, t_one * 1e3, t_par * 1e3,
              t_ref / t_par);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark: reference vs OpenMP"};
  int threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  app.add_option("--reps", g_reps, "repetitions per measurement")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "thread count for the parallel column")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  using namespace ptf;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> uf(0.0F, 1.0F);
  std::uniform_real_distribution<double> ud(2.0, 50.0);

  // KITTI-sized inputs: 370x1226 image, 20 channels at half resolution.
  const CameraIntrinsics intr = kitti_like_intrinsics();
  const std::size_t H = intr.height, W = intr.width, C = 20;
  FeatureMap feat(H / 2, W / 2, C);
  for (auto& v : feat.data) v = uf(rng);
  DepthMap depth(H, W, 1);
  for (auto& v : depth.data) v = ud(rng);
  Volume3D<float> vol({128, 128, 16}, C);
  for (auto& v : vol.data) v = uf(rng);
  const PixelGrid grid = make_pixel_grid(H, W);
  const VoxelBounds fb = VoxelBounds::kitti_features();
  const VoxelBounds lb = VoxelBounds::kitti_labels();

  const SceneSpec spec = make_oov_scenario({});
  auto frames = make_sequence(spec, 4);
  for (auto& f : frames) {
    for (auto& v : f.depth.data) v = ud(rng);
  }
  FuseConfig cfg;
  cfg.n_frames = 4;
  cfg.densify_factor = 2;
  cfg.output_from_camera = spec.cam_from_ego.inverse();
  set_num_threads(threads);
  const FeaturedPointCloud cloud = fuse(frames, cfg);

  std::printf("threads=%d reps=%d hardware=%u points=%zu\n", threads, g_reps,
              std::thread::hardware_concurrency(), cloud.size());
  std::printf("%-28s %10s %10s %10s %9s\n", "kernel", "ref ms", "1T ms", "NT ms", "speedup");

  row("bilinear 185x613 -> x2", threads,
      [&] { (void)reference::bilinear_resize(feat, H, W); },
      [&] { (void)bilinear_resize(feat, H, W); });
  row("trilinear 128x128x16 -> x2", threads,
      [&] { (void)reference::trilinear_resize(vol, {256, 256, 32}); },
      [&] { (void)trilinear_resize(vol, {256, 256, 32}); });
  row("backproject 370x1226", threads,
      [&] { (void)reference::backproject(depth, grid, intr); },
      [&] { (void)backproject(depth, grid, intr); });
  row("voxelize sharded", threads,
      [&] { (void)reference::voxelize(cloud, fb, 4); },
      [&] { (void)voxelize(cloud, fb, 4, Accumulation::kSharded); });
  row("voxelize deterministic", threads,
      [&] { (void)reference::voxelize(cloud, fb, 4); },
      [&] { (void)voxelize(cloud, fb, 4, Accumulation::kDeterministic); });
  row("oov mask 256x256x32", threads,
      [&] { (void)reference::oov_mask(lb, intr, spec.cam_from_ego); },
      [&] { (void)oov_mask(lb, intr, spec.cam_from_ego); });

  // The full pipeline has no separate reference; report 1 vs N threads.
  set_num_threads(1);
  const double f1 = best_of([&] { (void)voxelize(fuse(frames, cfg), fb, 4); });
  set_num_threads(threads);
  const double fn = best_of([&] { (void)voxelize(fuse(frames, cfg), fb, 4); });
  std::printf("%-28s %10s %10.2f %10.2f %8.2fx\n", "fuse+voxelize n=4 f=2", "-", f1 * 1e3,
              fn * 1e3, f1 / fn);
  return 0;
}
