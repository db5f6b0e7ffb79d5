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
#include <span>
#include <vector>

#include "ptf/geometry.hpp"
#include "ptf/voxel.hpp"

namespace ptf {

/// Ground-truth ids equal to this value are skipped like invalid voxels.
inline constexpr std::uint16_t kIgnoreLabel = 255;

/// Semantic voxel labels (0 = empty) plus the voxels excluded from scoring.
struct LabelGrid {
  VoxelIndex dims{0, 0, 0};
  std::vector<std::uint16_t> labels;
  std::vector<std::uint8_t> invalid;

  LabelGrid() = default;
  explicit LabelGrid(VoxelIndex d)
      : dims(d), labels(d[0] * d[1] * d[2], 0), invalid(d[0] * d[1] * d[2], 0) {}

  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return (x * dims[1] + y) * dims[2] + z;
  }
  bool operator==(const LabelGrid&) const = default;
};

struct ViewMask {
  VoxelIndex dims{0, 0, 0};
  std::vector<std::uint8_t> in_view;

  /// Voxels outside the frustum.
  std::vector<std::uint8_t> out_of_view() const;
};

/// Per-class and occupancy confusion counters. Mergeable by addition.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(std::size_t num_classes);

  /// Scores every voxel that is valid in `gt` and, when given, set in `region`.
  void accumulate(const LabelGrid& pred, const LabelGrid& gt,
                  std::span<const std::uint8_t> region = {});
  void merge(const ConfusionAccumulator& other);

  std::size_t num_classes() const { return tp_.size(); }
  std::uint64_t scored() const { return scored_; }
  const std::vector<std::uint64_t>& tp() const { return tp_; }
  const std::vector<std::uint64_t>& fp() const { return fp_; }
  const std::vector<std::uint64_t>& fn() const { return fn_; }
  std::uint64_t occupancy_tp() const { return occ_tp_; }
  std::uint64_t occupancy_fp() const { return occ_fp_; }
  std::uint64_t occupancy_fn() const { return occ_fn_; }

  bool operator==(const ConfusionAccumulator&) const = default;

 private:
  std::vector<std::uint64_t> tp_, fp_, fn_;
  std::uint64_t occ_tp_ = 0, occ_fp_ = 0, occ_fn_ = 0;
  std::uint64_t scored_ = 0;
};

struct MetricsReport {
  bool empty = true;  // nothing was scored
  double iou = 0.0;
  double miou = 0.0;
  /// Index = class id; entry 0 (empty) is always nullopt. Classes with
  /// TP + FP + FN = 0 are nullopt and left out of the mean.
  std::vector<std::optional<double>> class_iou;
};

MetricsReport finalize(const ConfusionAccumulator& acc);

/// Voxel-center frustum test of the current camera over an ego-frame grid.
ViewMask oov_mask(const VoxelBounds& bounds, const CameraIntrinsics& intr,
                  const RigidTransform& cam_from_ego);

}  // namespace ptf
