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

#include "ptf/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ptf {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw std::invalid_argument("camera intrinsics: focal lengths must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw std::invalid_argument("camera intrinsics: principal point must be finite");
  }
  if (width < 1 || height < 1) {
    throw std::invalid_argument("camera intrinsics: image size must be >= 1");
  }
}

RigidTransform RigidTransform::from_row_major(std::span<const double> v) {
  if (v.size() != 12) throw std::invalid_argument("rigid transform needs 12 values");
  RigidTransform T;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) T.rotation(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
    T.translation(r) = v[static_cast<std::size_t>(r * 4 + 3)];
  }
  return T;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

void RigidTransform::validate(double tol) const {
  if (!is_valid(tol)) {
    throw std::invalid_argument("rigid transform: rotation is not orthonormal with det +1");
  }
}

PixelGrid make_pixel_grid(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw std::invalid_argument("make_pixel_grid: dimensions must be >= 1");
  }
  PixelGrid grid{Plane2D<double>(height, width, 2)};
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      grid.coords.at(r, c, 0) = static_cast<double>(c);
      grid.coords.at(r, c, 1) = static_cast<double>(r);
    }
  }
  return grid;
}

Backprojection backproject(const DepthMap& depth, const PixelGrid& grid,
                           const CameraIntrinsics& intr) {
  if (depth.channels != 1) throw std::invalid_argument("backproject: depth must have one channel");
  if (depth.height != grid.height() || depth.width != grid.width()) {
    throw std::invalid_argument("backproject: depth " + std::to_string(depth.height) + "x" +
                                std::to_string(depth.width) + " does not match grid " +
                                std::to_string(grid.height()) + "x" +
                                std::to_string(grid.width()));
  }
  intr.validate();

  Backprojection out;
  out.kept.reserve(depth.data.size());
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    if (is_valid_depth(depth.data[i])) out.kept.push_back(i);
  }
  out.points.resize(out.kept.size());

  const double inv_fx = 1.0 / intr.fx;
  const double inv_fy = 1.0 / intr.fy;
  const double* uv = grid.coords.data.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(out.kept.size()); ++k) {
    const std::size_t i = out.kept[static_cast<std::size_t>(k)];
    const double d = depth.data[i];
    out.points[static_cast<std::size_t>(k)] = {(uv[2 * i] - intr.cx) * inv_fx * d,
                                               (uv[2 * i + 1] - intr.cy) * inv_fy * d, d};
  }
  return out;
}

std::vector<Projection> project(std::span<const Point3> points, const CameraIntrinsics& intr) {
  std::vector<Projection> out(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(points.size()); ++k) {
    const Point3& p = points[static_cast<std::size_t>(k)];
    Projection& q = out[static_cast<std::size_t>(k)];
    q.z = p.z();
    if (!(p.z() > 0.0)) {
      q.behind = true;
      continue;
    }
    q.u = intr.fx * p.x() / p.z() + intr.cx;
    q.v = intr.fy * p.y() / p.z() + intr.cy;
  }
  return out;
}

RigidTransform relative_pose(const RigidTransform& src, const RigidTransform& dst) {
  return dst.inverse() * src;
}

Points3 transform_points(std::span<const Point3> points, const RigidTransform& T) {
  Points3 out(points.begin(), points.end());
  transform_points_inplace(out, T);
  return out;
}

void transform_points_inplace(std::span<Point3> points, const RigidTransform& T) {
  const Eigen::Matrix3d R = T.rotation;
  const Eigen::Vector3d t = T.translation;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(points.size()); ++k) {
    Point3& p = points[static_cast<std::size_t>(k)];
    p = R * p + t;
  }
}

}  // namespace ptf
