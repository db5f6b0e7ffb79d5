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

#include "ptf/metrics.hpp"

#include <stdexcept>
#include <string>

namespace ptf {

std::vector<std::uint8_t> ViewMask::out_of_view() const {
  std::vector<std::uint8_t> out(in_view.size());
  for (std::size_t i = 0; i < in_view.size(); ++i) out[i] = in_view[i] ? 0 : 1;
  return out;
}

ConfusionAccumulator::ConfusionAccumulator(std::size_t num_classes)
    : tp_(num_classes, 0), fp_(num_classes, 0), fn_(num_classes, 0) {
  if (num_classes < 2) throw std::invalid_argument("need at least one semantic class besides empty");
}

void ConfusionAccumulator::accumulate(const LabelGrid& pred, const LabelGrid& gt,
                                      std::span<const std::uint8_t> region) {
  const std::size_t n = gt.size();
  if (pred.dims != gt.dims || pred.labels.size() != n || gt.labels.size() != n ||
      gt.invalid.size() != n) {
    throw std::invalid_argument("accumulate: prediction and ground-truth grids differ in shape");
  }
  if (!region.empty() && region.size() != n) {
    throw std::invalid_argument("accumulate: region mask has " + std::to_string(region.size()) +
                                " voxels, grid has " + std::to_string(n));
  }
  const std::size_t K = num_classes();
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.invalid[i] || gt.labels[i] == kIgnoreLabel) continue;
    if (!region.empty() && !region[i]) continue;
    const std::uint16_t g = gt.labels[i];
    const std::uint16_t p = pred.labels[i];
    if (g >= K || p >= K) {
      throw std::invalid_argument("accumulate: label " + std::to_string(g >= K ? g : p) +
                                  " at voxel " + std::to_string(i) + " exceeds " +
                                  std::to_string(K) + " classes");
    }
    ++scored_;
    if (p == g) {
      ++tp_[g];
    } else {
      ++fp_[p];
      ++fn_[g];
    }
    const bool po = p > 0;
    const bool go = g > 0;
    if (po && go) ++occ_tp_;
    else if (po) ++occ_fp_;
    else if (go) ++occ_fn_;
  }
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.num_classes() != num_classes()) {
    throw std::invalid_argument("merge: accumulators have different class counts");
  }
  for (std::size_t k = 0; k < num_classes(); ++k) {
    tp_[k] += other.tp_[k];
    fp_[k] += other.fp_[k];
    fn_[k] += other.fn_[k];
  }
  occ_tp_ += other.occ_tp_;
  occ_fp_ += other.occ_fp_;
  occ_fn_ += other.occ_fn_;
  scored_ += other.scored_;
}

MetricsReport finalize(const ConfusionAccumulator& acc) {
  MetricsReport r;
  r.class_iou.assign(acc.num_classes(), std::nullopt);
  r.empty = acc.scored() == 0;
  if (r.empty) return r;

  const auto occ_den = acc.occupancy_tp() + acc.occupancy_fp() + acc.occupancy_fn();
  r.iou = occ_den ? static_cast<double>(acc.occupancy_tp()) / static_cast<double>(occ_den) : 0.0;

  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 1; k < acc.num_classes(); ++k) {
    const auto den = acc.tp()[k] + acc.fp()[k] + acc.fn()[k];
    if (den == 0) continue;
    const double iou = static_cast<double>(acc.tp()[k]) / static_cast<double>(den);
    r.class_iou[k] = iou;
    sum += iou;
    ++present;
  }
  r.miou = present ? sum / static_cast<double>(present) : 0.0;
  return r;
}

ViewMask oov_mask(const VoxelBounds& bounds, const CameraIntrinsics& intr,
                  const RigidTransform& cam_from_ego) {
  bounds.validate();
  intr.validate();
  ViewMask mask{bounds.resolution, std::vector<std::uint8_t>(bounds.voxel_count(), 0)};
  const auto W = static_cast<double>(intr.width);
  const auto H = static_cast<double>(intr.height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(mask.in_view.size()); ++f) {
    const Point3 c = cam_from_ego.apply(bounds.voxel_center(bounds.unflatten(static_cast<std::size_t>(f))));
    if (!(c.z() > 0.0)) continue;
    const double u = intr.fx * c.x() / c.z() + intr.cx;
    const double v = intr.fy * c.y() / c.z() + intr.cy;
    mask.in_view[static_cast<std::size_t>(f)] = (u >= 0.0 && u < W && v >= 0.0 && v < H) ? 1 : 0;
  }
  return mask;
}

}  // namespace ptf
