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

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptf/fusion.hpp"
#include "ptf/geometry.hpp"
#include "ptf/metrics.hpp"
#include "ptf/voxel.hpp"

namespace ptf {

// SemanticKITTI class ids used by the built-in scenes.
inline constexpr std::uint16_t kClassCar = 1;
inline constexpr std::uint16_t kClassRoad = 9;
inline constexpr std::uint16_t kClassBuilding = 13;
inline constexpr std::uint16_t kClassFence = 14;
inline constexpr std::size_t kKittiClasses = 20;

/// World-frame axis-aligned box (world = camera frame of scan 0: +Y down).
struct SceneBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
  std::uint16_t class_id = 0;
};

/// Horizontal ground surface at world y = height. For labels it is a slab
/// reaching `thickness` meters below the surface.
struct GroundPlane {
  double height = 0.0;
  double thickness = 0.2;
  std::uint16_t class_id = 0;
};

/// Constant-velocity camera: pose(i) = start with translation + i * velocity.
struct CameraPath {
  RigidTransform start;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();

  RigidTransform pose(std::size_t frame) const;
};

struct SceneSpec {
  std::vector<SceneBox> boxes;
  std::vector<GroundPlane> planes;
  CameraPath path;
  CameraIntrinsics intrinsics;
  RigidTransform cam_from_ego;
  std::size_t frame_count = 1;
  std::uint64_t seed = 0;
  double max_depth = 80.0;         // hits beyond this are missing
  double depth_noise_sigma = 0.0;  // meters, seeded Gaussian, 0 = exact
  std::size_t num_classes = kKittiClasses;

  /// The last scan is the current frame t.
  std::size_t current_frame() const { return frame_count - 1; }
  void validate() const;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RenderedFrame {
  DepthMap depth;                      // z-depth in meters, NaN where nothing is hit
  std::vector<std::uint16_t> classes;  // class of the hit primitive, 0 for none
};

RenderedFrame render_frame(const SceneSpec& spec, std::size_t frame);
DepthMap render_depth(const SceneSpec& spec, std::size_t frame);

/// One-hot class coloring (H x W x num_classes); pixels without a hit are zero.
FeatureMap one_hot_features(const RenderedFrame& frame, std::size_t num_classes);

/// Depth, one-hot features, intrinsics and pose of one scan, tagged with its
/// offset from the current frame.
FrameBundle make_frame_bundle(const SceneSpec& spec, std::size_t frame);
/// Scans current, current-1, ... down to max(0, current-n+1), current first.
std::vector<FrameBundle> make_sequence(const SceneSpec& spec, std::size_t n_frames);

/// Labels ego-frame voxels of scan `frame` by the primitive containing their
/// center; boxes take precedence over ground slabs.
LabelGrid ground_truth_labels(const SceneSpec& spec, const VoxelBounds& bounds, std::size_t frame);
LabelGrid ground_truth_labels(const SceneSpec& spec, const VoxelBounds& bounds);

/// Camera-ego convention of KITTI: ego x forward, y left, z up.
RigidTransform kitti_cam_from_ego();
CameraIntrinsics kitti_like_intrinsics();

/// A car parked beside the current ego position: outside the current frustum,
/// seen by every earlier scan.
struct OovTemplate {
  CameraIntrinsics intrinsics = kitti_like_intrinsics();
  std::size_t history = 3;     // earlier scans; frame_count = history + 1
  double speed = 1.6;          // meters per scan along the viewing direction
  double camera_height = 1.65;
  // Hidden box in the current ego frame, faces placed mid-voxel for 0.2 m and 0.4 m grids.
  Eigen::Vector3d box_min{0.45, 4.05, -1.55};
  Eigen::Vector3d box_max{4.35, 4.35, 0.35};
  bool add_building = true;
  VoxelBounds check_bounds = VoxelBounds::kitti_features();
  std::uint64_t seed = 0;
  double max_depth = 80.0;
};

/// Index of the hidden box in SceneSpec::boxes for scenes from make_oov_scenario.
inline constexpr std::size_t kHiddenBox = 0;

/// Builds the scene and checks analytically that the hidden box is outside
/// the current frustum and inside the frustum of every earlier scan. Throws
/// SceneError when the geometry cannot satisfy that.
SceneSpec make_oov_scenario(const OovTemplate& tmpl);

/// Straight walled alley driven at constant speed.
SceneSpec make_corridor_scenario(std::size_t frame_count = 6, double speed = 2.0);

std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(std::string_view text);

}  // namespace ptf
