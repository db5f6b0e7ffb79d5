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
#include <Eigen/Geometry>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ptf/resample.hpp"

namespace ptf {

using Point3 = Eigen::Vector3d;
using Points3 = std::vector<Eigen::Vector3d>;
using Pixel = Eigen::Vector2d;

/// Pinhole camera. Camera frame is +X right, +Y down, +Z forward.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::size_t width = 1;
  std::size_t height = 1;

  void validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

/// SE(3) transform. `T * p = R p + t`; composition reads right to left.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  /// From a row-major 3x4 [R | t] block of 12 values.
  static RigidTransform from_row_major(std::span<const double> values);

  RigidTransform inverse() const;
  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  RigidTransform operator*(const RigidTransform& rhs) const;

  /// Throws std::invalid_argument unless R is orthonormal with det +1 within `tol`.
  void validate(double tol = 1e-9) const;
  bool is_valid(double tol = 1e-9) const;
};

/// H x W grid of (u, v) sample coordinates; a fresh grid holds (col, row).
struct PixelGrid {
  Plane2D<double> coords;  // H x W x 2

  std::size_t height() const { return coords.height; }
  std::size_t width() const { return coords.width; }
  Pixel at(std::size_t row, std::size_t col) const {
    return {coords.at(row, col, 0), coords.at(row, col, 1)};
  }
};

PixelGrid make_pixel_grid(std::size_t height, std::size_t width);

/// Depth values that are non-finite or <= 0 mark missing measurements.
inline bool is_valid_depth(double d) { return d > 0.0 && d < std::numeric_limits<double>::infinity(); }

struct Backprojection {
  Points3 points;
  std::vector<std::size_t> kept;  // flat pixel index of each point
};

/// Lifts every valid-depth grid sample to a camera-frame point.
Backprojection backproject(const DepthMap& depth, const PixelGrid& grid,
                           const CameraIntrinsics& intr);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
  bool behind = false;  // z <= 0, u/v undefined
};

std::vector<Projection> project(std::span<const Point3> points, const CameraIntrinsics& intr);

/// `dst^-1 * src`: maps frame_i coordinates into frame_t coordinates given
/// world<-frame_i (`src`) and world<-frame_t (`dst`).
RigidTransform relative_pose(const RigidTransform& src, const RigidTransform& dst);

Points3 transform_points(std::span<const Point3> points, const RigidTransform& T);
void transform_points_inplace(std::span<Point3> points, const RigidTransform& T);

}  // namespace ptf
