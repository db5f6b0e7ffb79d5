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

#include "ptf/voxel.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ptf {

VoxelBounds VoxelBounds::kitti_labels() {
  VoxelBounds b;
  b.min_corner = {0.0, -25.6, -2.0};
  b.max_corner = {51.2, 25.6, 4.4};
  b.resolution = {256, 256, 32};
  return b;
}

VoxelBounds VoxelBounds::kitti_features() {
  VoxelBounds b = kitti_labels();
  b.resolution = {128, 128, 16};
  return b;
}

void VoxelBounds::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(min_corner[a]) || !std::isfinite(max_corner[a]) ||
        !(max_corner[a] > min_corner[a])) {
      throw std::invalid_argument("voxel bounds: axis " + std::to_string(a) +
                                  " has non-positive extent");
    }
    if (resolution[static_cast<std::size_t>(a)] < 1) {
      throw std::invalid_argument("voxel bounds: resolution must be >= 1 on every axis");
    }
  }
}

Eigen::Vector3d VoxelBounds::voxel_size() const {
  return {(max_corner.x() - min_corner.x()) / static_cast<double>(resolution[0]),
          (max_corner.y() - min_corner.y()) / static_cast<double>(resolution[1]),
          (max_corner.z() - min_corner.z()) / static_cast<double>(resolution[2])};
}

bool VoxelBounds::contains(const Point3& p) const {
  return (p.array() >= min_corner.array()).all() && (p.array() < max_corner.array()).all();
}

Point3 VoxelBounds::voxel_lower(const VoxelIndex& v) const {
  const Eigen::Vector3d s = voxel_size();
  return {min_corner.x() + static_cast<double>(v[0]) * s.x(),
          min_corner.y() + static_cast<double>(v[1]) * s.y(),
          min_corner.z() + static_cast<double>(v[2]) * s.z()};
}

Point3 VoxelBounds::voxel_upper(const VoxelIndex& v) const {
  return voxel_lower({v[0] + 1, v[1] + 1, v[2] + 1});
}

Point3 VoxelBounds::voxel_center(const VoxelIndex& v) const {
  const Eigen::Vector3d s = voxel_size();
  return {min_corner.x() + (static_cast<double>(v[0]) + 0.5) * s.x(),
          min_corner.y() + (static_cast<double>(v[1]) + 0.5) * s.y(),
          min_corner.z() + (static_cast<double>(v[2]) + 0.5) * s.z()};
}

VoxelIndex VoxelBounds::unflatten(std::size_t flat) const {
  const std::size_t z = flat % resolution[2];
  const std::size_t y = (flat / resolution[2]) % resolution[1];
  const std::size_t x = flat / (resolution[2] * resolution[1]);
  return {x, y, z};
}

std::optional<VoxelIndex> VoxelBounds::locate(const Point3& p) const {
  if (!contains(p)) return std::nullopt;
  const Eigen::Vector3d s = voxel_size();
  VoxelIndex v{};
  for (int a = 0; a < 3; ++a) {
    const std::size_t res = resolution[static_cast<std::size_t>(a)];
    auto i = static_cast<std::size_t>(std::floor((p[a] - min_corner[a]) / s[a]));
    i = std::min(i, res - 1);
    // Nudge so the box reconstructed by voxel_lower/upper holds the point.
    if (i > 0 && p[a] < min_corner[a] + static_cast<double>(i) * s[a]) --i;
    if (i + 1 < res && p[a] >= min_corner[a] + static_cast<double>(i + 1) * s[a]) ++i;
    v[static_cast<std::size_t>(a)] = i;
  }
  return v;
}

FeaturedPointCloud filter_bounds(const FeaturedPointCloud& cloud, const VoxelBounds& bounds) {
  cloud.validate();
  std::vector<std::size_t> keep;
  keep.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (bounds.contains(cloud.positions[i])) keep.push_back(i);
  }
  return cloud.select(keep);
}

namespace {

constexpr std::int64_t kOutside = -1;

std::vector<std::int64_t> voxel_ids(const FeaturedPointCloud& cloud, const VoxelBounds& bounds) {
  std::vector<std::int64_t> ids(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cloud.size()); ++i) {
    const auto v = bounds.locate(cloud.positions[static_cast<std::size_t>(i)]);
    ids[static_cast<std::size_t>(i)] =
        v ? static_cast<std::int64_t>(bounds.flat_index(*v)) : kOutside;
  }
  return ids;
}

}  // namespace

FeatureVoxelGrid voxelize(const FeaturedPointCloud& cloud, const VoxelBounds& bounds,
                          std::size_t n_frames, Accumulation mode) {
  if (n_frames == 0) throw std::invalid_argument("voxelize: n_frames must be >= 1");
  bounds.validate();
  cloud.validate();

  const std::size_t C = cloud.channels;
  const std::size_t V = bounds.voxel_count();
  FeatureVoxelGrid grid;
  grid.bounds = bounds;
  grid.n_frames = n_frames;
  grid.features = Volume3D<float>(bounds.resolution, C, 0.0F);
  grid.counts.assign(V, 0);

  const std::vector<std::int64_t> ids = voxel_ids(cloud, bounds);
  const double inv_n = 1.0 / static_cast<double>(n_frames);
  float* out = grid.features.data.data();

  if (mode == Accumulation::kDeterministic) {
    // Counting sort by voxel keeps point-index order inside each bucket.
    std::vector<std::size_t> start(V + 1, 0);
    for (auto id : ids) {
      if (id != kOutside) ++start[static_cast<std::size_t>(id) + 1];
    }
    for (std::size_t v = 0; v < V; ++v) {
      grid.counts[v] = static_cast<std::uint32_t>(start[v + 1]);
      start[v + 1] += start[v];
    }
    std::vector<std::size_t> order(start[V]);
    std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] != kOutside) order[cursor[static_cast<std::size_t>(ids[i])]++] = i;
    }
#pragma omp parallel
    {
      std::vector<double> acc(C);
#pragma omp for schedule(dynamic, 256)
      for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(V); ++v) {
        const std::size_t b = start[static_cast<std::size_t>(v)];
        const std::size_t e = start[static_cast<std::size_t>(v) + 1];
        if (b == e) continue;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = b; k < e; ++k) {
          const float* f = cloud.features.data() + order[k] * C;
          for (std::size_t c = 0; c < C; ++c) acc[c] += f[c];
        }
        float* dst = out + static_cast<std::size_t>(v) * C;
        for (std::size_t c = 0; c < C; ++c) dst[c] = static_cast<float>(acc[c] * inv_n);
      }
    }
    return grid;
  }

  // Voxel-range shards balanced by point count. Every thread scans the id
  // list and accumulates only its own voxels, so no two threads touch the
  // same output and no partial grids are needed.
  for (auto id : ids) {
    if (id != kOutside) ++grid.counts[static_cast<std::size_t>(id)];
  }
  std::vector<double> acc(V * C, 0.0);
#pragma omp parallel
  {
    const auto T = static_cast<std::size_t>(omp_get_num_threads());
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    std::uint64_t total = 0;
    for (auto c : grid.counts) total += c;
    // First voxel whose preceding point count reaches `pts`; shard t spans
    // [boundary(t), boundary(t + 1)), so shards tile the grid.
    auto boundary = [&](std::size_t k) -> std::size_t {
      if (k == 0) return 0;
      if (k >= T) return V;
      const std::uint64_t pts = total * k / T;
      std::uint64_t run = 0;
      std::size_t v = 0;
      while (v < V && run < pts) run += grid.counts[v++];
      return v;
    };
    const std::size_t lo = boundary(t);
    const std::size_t hi = boundary(t + 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::int64_t id = ids[i];
      if (id == kOutside) continue;
      const auto v = static_cast<std::size_t>(id);
      if (v < lo || v >= hi) continue;
      const float* f = cloud.features.data() + i * C;
      double* dst = acc.data() + v * C;
      for (std::size_t c = 0; c < C; ++c) dst[c] += f[c];
    }
#pragma omp barrier
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(V * C); ++k) {
      out[k] = static_cast<float>(acc[static_cast<std::size_t>(k)] * inv_n);
    }
  }
  return grid;
}

OccupancyMasks occupancy_masks(const FeatureVoxelGrid& grid) {
  OccupancyMasks m;
  m.cross.resize(grid.counts.size());
  m.self.resize(grid.counts.size());
  for (std::size_t i = 0; i < grid.counts.size(); ++i) {
    m.cross[i] = grid.counts[i] > 0 ? 1 : 0;
    m.self[i] = m.cross[i] ? 0 : 1;
  }
  return m;
}

CoverageStats coverage_stats(const FeaturedPointCloud& cloud, const VoxelBounds& bounds) {
  bounds.validate();
  cloud.validate();
  const std::vector<std::int64_t> ids = voxel_ids(cloud, bounds);

  std::vector<int> offsets(cloud.origin.begin(), cloud.origin.end());
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());

  CoverageStats stats;
  stats.total_voxels = bounds.voxel_count();
  for (int off : offsets) {
    CoverageRow row;
    row.offset = off;
    std::vector<std::uint8_t> touched(stats.total_voxels, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (cloud.origin[i] != off) continue;
      ++row.lifted_points;
      if (ids[i] == kOutside) continue;
      ++row.surviving_points;
      auto& t = touched[static_cast<std::size_t>(ids[i])];
      if (!t) {
        t = 1;
        ++row.touched_voxels;
      }
    }
    row.surviving_fraction = row.lifted_points
                                 ? static_cast<double>(row.surviving_points) /
                                       static_cast<double>(row.lifted_points)
                                 : 0.0;
    row.touched_fraction =
        static_cast<double>(row.touched_voxels) / static_cast<double>(stats.total_voxels);
    stats.rows.push_back(row);
  }
  return stats;
}

std::vector<std::uint16_t> argmax_labels(const Volume3D<float>& volume, float empty_threshold) {
  const std::size_t V = volume.voxel_count();
  const std::size_t C = volume.channels;
  std::vector<std::uint16_t> labels(V, 0);
  if (C == 0) return labels;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(V); ++v) {
    const float* f = volume.data.data() + static_cast<std::size_t>(v) * C;
    const auto best = static_cast<std::size_t>(std::max_element(f, f + C) - f);
    labels[static_cast<std::size_t>(v)] =
        f[best] > empty_threshold ? static_cast<std::uint16_t>(best) : std::uint16_t{0};
  }
  return labels;
}

}  // namespace ptf
