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

#include "ptf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <random>

namespace ptf {

RigidTransform CameraPath::pose(std::size_t frame) const {
  RigidTransform T = start;
  T.translation += static_cast<double>(frame) * velocity;
  return T;
}

void SceneSpec::validate() const {
  if (frame_count < 1) throw SceneError("scene: frame_count must be >= 1");
  intrinsics.validate();
  path.start.validate(1e-9);
  cam_from_ego.validate(1e-9);
  if (!(max_depth > 0.0)) throw SceneError("scene: max_depth must be positive");
  if (depth_noise_sigma < 0.0) throw SceneError("scene: depth noise sigma must be >= 0");
  for (const auto& b : boxes) {
    if (!(b.max.array() > b.min.array()).all()) throw SceneError("scene: degenerate box");
    if (b.class_id >= num_classes) throw SceneError("scene: box class id out of range");
  }
  for (const auto& p : planes) {
    if (!(p.thickness > 0.0)) throw SceneError("scene: ground thickness must be positive");
    if (p.class_id >= num_classes) throw SceneError("scene: ground class id out of range");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Entry distance of a ray into an axis-aligned box, +inf on a miss or when
// the origin is inside.
double ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const SceneBox& b) {
  double t_near = -kInf;
  double t_far = kInf;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return kInf;
      continue;
    }
    double t0 = (b.min[a] - o[a]) / d[a];
    double t1 = (b.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || !(t_near > 0.0)) return kInf;
  return t_near;
}

double ray_plane(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const GroundPlane& p) {
  if (d.y() == 0.0) return kInf;
  const double t = (p.height - o.y()) / d.y();
  return t > 0.0 ? t : kInf;
}

bool in_frustum(const Point3& world, const RigidTransform& world_from_cam,
                const CameraIntrinsics& intr) {
  const Point3 c = world_from_cam.inverse().apply(world);
  if (!(c.z() > 0.0)) return false;
  const double u = intr.fx * c.x() / c.z() + intr.cx;
  const double v = intr.fy * c.y() / c.z() + intr.cy;
  return u >= 0.0 && u < static_cast<double>(intr.width) && v >= 0.0 &&
         v < static_cast<double>(intr.height);
}

bool box_contains(const SceneBox& b, const Point3& p) {
  return (p.array() >= b.min.array()).all() && (p.array() <= b.max.array()).all();
}

SceneBox ego_box_to_world(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                          const RigidTransform& world_from_ego, std::uint16_t cls) {
  SceneBox b;
  b.min = Eigen::Vector3d::Constant(kInf);
  b.max = Eigen::Vector3d::Constant(-kInf);
  for (int k = 0; k < 8; ++k) {
    const Point3 corner{(k & 1) ? hi.x() : lo.x(), (k & 2) ? hi.y() : lo.y(),
                        (k & 4) ? hi.z() : lo.z()};
    const Point3 w = world_from_ego.apply(corner);
    b.min = b.min.cwiseMin(w);
    b.max = b.max.cwiseMax(w);
  }
  b.class_id = cls;
  return b;
}

// Corners plus a 5 x 5 lattice on every face.
std::vector<Point3> box_surface_samples(const SceneBox& b) {
  std::vector<Point3> pts;
  constexpr int kSteps = 5;
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (double side : {b.min[axis], b.max[axis]}) {
      for (int i = 0; i < kSteps; ++i) {
        for (int j = 0; j < kSteps; ++j) {
          Point3 p;
          p[axis] = side;
          p[a1] = b.min[a1] + (b.max[a1] - b.min[a1]) * i / (kSteps - 1);
          p[a2] = b.min[a2] + (b.max[a2] - b.min[a2]) * j / (kSteps - 1);
          pts.push_back(p);
        }
      }
    }
  }
  return pts;
}

}  // namespace

RenderedFrame render_frame(const SceneSpec& spec, std::size_t frame) {
  spec.validate();
  if (frame >= spec.frame_count) {
    throw SceneError("render: frame " + std::to_string(frame) + " out of range");
  }
  const CameraIntrinsics& K = spec.intrinsics;
  const RigidTransform pose = spec.path.pose(frame);
  const std::size_t H = K.height;
  const std::size_t W = K.width;

  RenderedFrame out{DepthMap(H, W, 1, std::numeric_limits<double>::quiet_NaN()),
                    std::vector<std::uint16_t>(H * W, 0)};
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(H); ++r) {
    std::mt19937_64 rng;
    std::normal_distribution<double> noise(0.0, spec.depth_noise_sigma);
    if (spec.depth_noise_sigma > 0.0) {
      std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                        static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(r)};
      rng.seed(seq);
    }
    for (std::size_t c = 0; c < W; ++c) {
      const Eigen::Vector3d dir_cam{(static_cast<double>(c) - K.cx) / K.fx,
                                    (static_cast<double>(r) - K.cy) / K.fy, 1.0};
      const Eigen::Vector3d d = pose.rotation * dir_cam;
      double best = kInf;
      std::uint16_t cls = 0;
      for (const auto& b : spec.boxes) {
        const double t = ray_box(pose.translation, d, b);
        if (t < best) {
          best = t;
          cls = b.class_id;
        }
      }
      for (const auto& p : spec.planes) {
        const double t = ray_plane(pose.translation, d, p);
        if (t < best) {
          best = t;
          cls = p.class_id;
        }
      }
      if (!(best <= spec.max_depth)) continue;
      // dir_cam has unit z, so the ray parameter is the z-depth.
      double depth = best;
      if (spec.depth_noise_sigma > 0.0) depth = std::max(depth + noise(rng), 1e-3);
      const std::size_t i = static_cast<std::size_t>(r) * W + c;
      out.depth.data[i] = depth;
      out.classes[i] = cls;
    }
  }
  return out;
}

DepthMap render_depth(const SceneSpec& spec, std::size_t frame) {
  return render_frame(spec, frame).depth;
}

FeatureMap one_hot_features(const RenderedFrame& frame, std::size_t num_classes) {
  FeatureMap f(frame.depth.height, frame.depth.width, num_classes, 0.0F);
  for (std::size_t i = 0; i < frame.classes.size(); ++i) {
    if (frame.classes[i] > 0 && frame.classes[i] < num_classes) {
      f.data[i * num_classes + frame.classes[i]] = 1.0F;
    }
  }
  return f;
}

FrameBundle make_frame_bundle(const SceneSpec& spec, std::size_t frame) {
  RenderedFrame r = render_frame(spec, frame);
  FrameBundle b;
  b.features = one_hot_features(r, spec.num_classes);
  b.depth = std::move(r.depth);
  b.intrinsics = spec.intrinsics;
  b.pose = spec.path.pose(frame);
  b.offset = static_cast<int>(spec.current_frame() - frame);
  return b;
}

std::vector<FrameBundle> make_sequence(const SceneSpec& spec, std::size_t n_frames) {
  std::vector<FrameBundle> frames;
  const std::size_t t = spec.current_frame();
  for (std::size_t k = 0; k < n_frames && k <= t; ++k) frames.push_back(make_frame_bundle(spec, t - k));
  return frames;
}

LabelGrid ground_truth_labels(const SceneSpec& spec, const VoxelBounds& bounds, std::size_t frame) {
  bounds.validate();
  const RigidTransform world_from_ego = spec.path.pose(frame) * spec.cam_from_ego;
  LabelGrid grid(bounds.resolution);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(grid.size()); ++f) {
    const Point3 w = world_from_ego.apply(bounds.voxel_center(bounds.unflatten(static_cast<std::size_t>(f))));
    std::uint16_t cls = 0;
    for (const auto& b : spec.boxes) {
      if (box_contains(b, w)) {
        cls = b.class_id;
        break;
      }
    }
    if (cls == 0) {
      for (const auto& p : spec.planes) {
        if (w.y() >= p.height && w.y() <= p.height + p.thickness) {
          cls = p.class_id;
          break;
        }
      }
    }
    grid.labels[static_cast<std::size_t>(f)] = cls;
  }
  return grid;
}

LabelGrid ground_truth_labels(const SceneSpec& spec, const VoxelBounds& bounds) {
  return ground_truth_labels(spec, bounds, spec.current_frame());
}

RigidTransform kitti_cam_from_ego() {
  RigidTransform T;
  T.rotation << 0, -1, 0,
                0, 0, -1,
                1, 0, 0;
  return T;
}

CameraIntrinsics kitti_like_intrinsics() {
  return {707.0912, 707.0912, 601.8873, 183.1104, 1226, 370};
}

SceneSpec make_oov_scenario(const OovTemplate& tmpl) {
  if (tmpl.history < 1) throw SceneError("oov scenario: needs at least one earlier scan");
  if (!(tmpl.box_max.array() > tmpl.box_min.array()).all()) {
    throw SceneError("oov scenario: degenerate hidden box");
  }
  SceneSpec spec;
  spec.intrinsics = tmpl.intrinsics;
  spec.cam_from_ego = kitti_cam_from_ego();
  spec.frame_count = tmpl.history + 1;
  spec.seed = tmpl.seed;
  spec.max_depth = tmpl.max_depth;
  spec.path.velocity = {0.0, 0.0, tmpl.speed};
  spec.validate();

  const std::size_t t = spec.current_frame();
  const RigidTransform world_from_cam_t = spec.path.pose(t);
  const RigidTransform world_from_ego = world_from_cam_t * spec.cam_from_ego;

  spec.boxes.push_back(ego_box_to_world(tmpl.box_min, tmpl.box_max, world_from_ego, kClassCar));
  spec.planes.push_back({tmpl.camera_height, 0.2, kClassRoad});
  if (tmpl.add_building) {
    spec.boxes.push_back(ego_box_to_world({6.0, -12.0, -tmpl.camera_height}, {30.0, -8.0, 4.0},
                                          world_from_ego, kClassBuilding));
  }

  const SceneBox& hidden = spec.boxes[kHiddenBox];
  const LabelGrid gt = ground_truth_labels(spec, tmpl.check_bounds, t);
  std::vector<Point3> hidden_points = box_surface_samples(hidden);
  std::size_t gt_voxels = 0;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    if (gt.labels[f] != kClassCar) continue;
    ++gt_voxels;
    hidden_points.push_back(
        world_from_ego.apply(tmpl.check_bounds.voxel_center(tmpl.check_bounds.unflatten(f))));
  }
  if (gt_voxels == 0) throw SceneError("oov scenario: hidden box covers no voxel center");
  for (const Point3& p : hidden_points) {
    if (in_frustum(p, world_from_cam_t, spec.intrinsics)) {
      throw SceneError("oov scenario: hidden box is inside the current frustum");
    }
  }
  const std::vector<Point3> surface = box_surface_samples(hidden);
  for (std::size_t j = 0; j < t; ++j) {
    const RigidTransform pose = spec.path.pose(j);
    const bool seen = std::any_of(surface.begin(), surface.end(),
                                  [&](const Point3& p) { return in_frustum(p, pose, spec.intrinsics); });
    if (!seen) {
      throw SceneError("oov scenario: hidden box is outside the frustum of scan " + std::to_string(j) +
                       " (offset " + std::to_string(t - j) + ")");
    }
  }
  return spec;
}

SceneSpec make_corridor_scenario(std::size_t frame_count, double speed) {
  SceneSpec spec;
  spec.intrinsics = kitti_like_intrinsics();
  spec.cam_from_ego = kitti_cam_from_ego();
  spec.frame_count = frame_count;
  spec.max_depth = 40.0;
  spec.path.velocity = {0.0, 0.0, speed};
  const double ground = 1.65;
  // World frame: +X right, +Y down, +Z forward.
  spec.boxes.push_back({{-1.9, ground - 2.0, -200.0}, {-1.5, ground, 400.0}, kClassFence});
  spec.boxes.push_back({{1.5, ground - 2.0, -200.0}, {1.9, ground, 400.0}, kClassBuilding});
  spec.planes.push_back({ground, 0.2, kClassRoad});
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw SceneError("scene json: expected a 3-vector");
  return {v[0], v[1], v[2]};
}

json transform_json(const RigidTransform& T) {
  std::vector<double> v;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) v.push_back(T.rotation(r, c));
    v.push_back(T.translation(r));
  }
  return v;
}

RigidTransform json_transform(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 12) throw SceneError("scene json: transforms need 12 row-major values");
  return RigidTransform::from_row_major(v);
}

}  // namespace

std::string scene_to_json(const SceneSpec& spec) {
  json j;
  j["frame_count"] = spec.frame_count;
  j["seed"] = spec.seed;
  j["max_depth"] = spec.max_depth;
  j["depth_noise_sigma"] = spec.depth_noise_sigma;
  j["num_classes"] = spec.num_classes;
  const auto& K = spec.intrinsics;
  j["intrinsics"] = {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy},
                     {"width", K.width}, {"height", K.height}};
  j["cam_from_ego"] = transform_json(spec.cam_from_ego);
  j["camera_path"] = {{"start", transform_json(spec.path.start)},
                      {"velocity", vec_json(spec.path.velocity)}};
  j["boxes"] = json::array();
  for (const auto& b : spec.boxes) {
    j["boxes"].push_back({{"min", vec_json(b.min)}, {"max", vec_json(b.max)}, {"class", b.class_id}});
  }
  j["planes"] = json::array();
  for (const auto& p : spec.planes) {
    j["planes"].push_back({{"height", p.height}, {"thickness", p.thickness}, {"class", p.class_id}});
  }
  return j.dump(2);
}

SceneSpec scene_from_json(std::string_view text) {
  SceneSpec spec;
  try {
    const json j = json::parse(text);
    spec.frame_count = j.at("frame_count").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.max_depth = j.value("max_depth", 80.0);
    spec.depth_noise_sigma = j.value("depth_noise_sigma", 0.0);
    spec.num_classes = j.value("num_classes", kKittiClasses);
    const json& K = j.at("intrinsics");
    spec.intrinsics = {K.at("fx").get<double>(), K.at("fy").get<double>(),
                       K.at("cx").get<double>(), K.at("cy").get<double>(),
                       K.at("width").get<std::size_t>(), K.at("height").get<std::size_t>()};
    if (j.contains("cam_from_ego")) spec.cam_from_ego = json_transform(j.at("cam_from_ego"));
    const json& path = j.at("camera_path");
    if (path.contains("start")) spec.path.start = json_transform(path.at("start"));
    spec.path.velocity = json_vec(path.at("velocity"));
    for (const auto& b : j.value("boxes", json::array())) {
      spec.boxes.push_back({json_vec(b.at("min")), json_vec(b.at("max")), b.at("class").get<std::uint16_t>()});
    }
    for (const auto& p : j.value("planes", json::array())) {
      spec.planes.push_back(
          {p.at("height").get<double>(), p.value("thickness", 0.2), p.at("class").get<std::uint16_t>()});
    }
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene json: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace ptf
