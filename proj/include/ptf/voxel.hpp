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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ptf/fusion.hpp"
#include "ptf/resample.hpp"

namespace ptf {

using VoxelIndex = std::array<std::size_t, 3>;

/// Axis-aligned grid of half-open voxel boxes [min, max).
struct VoxelBounds {
  Eigen::Vector3d min_corner = Eigen::Vector3d::Zero();
  Eigen::Vector3d max_corner = Eigen::Vector3d::Ones();
  VoxelIndex resolution{1, 1, 1};

  /// SemanticKITTI ego-frame extent at label resolution (0.2 m voxels).
  static VoxelBounds kitti_labels();
  /// Same extent at half resolution (0.4 m voxels), the default feature grid.
  static VoxelBounds kitti_features();

  void validate() const;
  Eigen::Vector3d voxel_size() const;
  std::size_t voxel_count() const { return resolution[0] * resolution[1] * resolution[2]; }
  bool contains(const Point3& p) const;
  /// Voxel holding `p`, consistent with voxel_lower()/voxel_upper(); nullopt
  /// outside the bounds.
  std::optional<VoxelIndex> locate(const Point3& p) const;
  std::size_t flat_index(const VoxelIndex& v) const {
    return (v[0] * resolution[1] + v[1]) * resolution[2] + v[2];
  }
  VoxelIndex unflatten(std::size_t flat) const;
  Point3 voxel_lower(const VoxelIndex& v) const;
  Point3 voxel_upper(const VoxelIndex& v) const;
  Point3 voxel_center(const VoxelIndex& v) const;

  bool operator==(const VoxelBounds&) const = default;
};

/// Mean-over-frames voxel features: V(x,y,z) = sum(f) / n_frames.
struct FeatureVoxelGrid {
  VoxelBounds bounds;
  Volume3D<float> features;            // X x Y x Z x C'
  std::vector<std::uint32_t> counts;   // X x Y x Z
  std::size_t n_frames = 1;
};

struct OccupancyMasks {
  std::vector<std::uint8_t> cross;  // counts > 0
  std::vector<std::uint8_t> self;   // complement of cross
};

struct CoverageRow {
  int offset = 0;
  std::size_t lifted_points = 0;
  std::size_t surviving_points = 0;
  double surviving_fraction = 0.0;
  std::size_t touched_voxels = 0;
  double touched_fraction = 0.0;
};

struct CoverageStats {
  std::vector<CoverageRow> rows;  // ascending offset
  std::size_t total_voxels = 0;
};

enum class Accumulation {
  kSharded,        // threads own voxel ranges balanced by point count; one id pass per thread
  kDeterministic,  // per-voxel sums in point-index order; bit-reproducible
};

FeaturedPointCloud filter_bounds(const FeaturedPointCloud& cloud, const VoxelBounds& bounds);

/// Scatter-adds features of in-bounds points and divides by `n_frames`.
/// Out-of-bounds points are dropped.
FeatureVoxelGrid voxelize(const FeaturedPointCloud& cloud, const VoxelBounds& bounds,
                          std::size_t n_frames, Accumulation mode = Accumulation::kSharded);

OccupancyMasks occupancy_masks(const FeatureVoxelGrid& grid);

/// Per frame offset: how many lifted points survive the bounds filter and how
/// many distinct voxels they touch.
CoverageStats coverage_stats(const FeaturedPointCloud& cloud, const VoxelBounds& bounds);

/// Channel argmax per voxel. Channel 0 is the empty class; voxels whose best
/// value is <= `empty_threshold` are labeled 0 as well.
std::vector<std::uint16_t> argmax_labels(const Volume3D<float>& volume,
                                         float empty_threshold = 0.0F);

}  // namespace ptf
