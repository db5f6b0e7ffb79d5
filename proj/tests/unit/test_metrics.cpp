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

#include <doctest.h>

#include <numeric>
#include <random>

#include "ptf/metrics.hpp"
#include "ptf/reference.hpp"
#include "support.hpp"

using namespace ptf;

namespace {

LabelGrid labels_1d(std::vector<std::uint16_t> values) {
  LabelGrid g({1, 1, values.size()});
  g.labels = std::move(values);
  return g;
}

LabelGrid random_labels(std::mt19937_64& rng, VoxelIndex dims, std::uint16_t classes,
                        double invalid_rate) {
  std::uniform_int_distribution<int> c(0, classes - 1);
  std::bernoulli_distribution inv(invalid_rate);
  LabelGrid g(dims);
  for (auto& l : g.labels) l = static_cast<std::uint16_t>(c(rng));
  for (auto& i : g.invalid) i = inv(rng);
  return g;
}

void check_same_report(const MetricsReport& a, const MetricsReport& b) {
  CHECK(a.empty == b.empty);
  CHECK(a.iou == b.iou);
  CHECK(a.miou == b.miou);
  CHECK(a.class_iou == b.class_iou);
}

}  // namespace

TEST_CASE("perfect prediction") {
  std::mt19937_64 rng(1);
  const auto gt = random_labels(rng, {6, 5, 4}, 5, 0.0);
  ConfusionAccumulator acc(5);
  acc.accumulate(gt, gt);
  const auto r = finalize(acc);
  CHECK(r.iou == 1.0);
  CHECK(r.miou == 1.0);
  for (std::size_t k = 1; k < 5; ++k) {
    REQUIRE(r.class_iou[k].has_value());
    CHECK(*r.class_iou[k] == 1.0);
  }
}

TEST_CASE("empty prediction") {
  const auto gt = labels_1d({0, 3, 3, 1, 0});
  const auto pred = labels_1d({0, 0, 0, 0, 0});
  ConfusionAccumulator acc(4);
  acc.accumulate(pred, gt);
  CHECK(acc.occupancy_tp() == 0);
  CHECK(acc.occupancy_fn() == 3);
  CHECK(finalize(acc).iou == 0.0);
}

TEST_CASE("four-voxel hand case") {
  ConfusionAccumulator acc(3);
  acc.accumulate(labels_1d({1, 0, 0, 2}), labels_1d({1, 1, 0, 2}));
  const auto r = finalize(acc);
  CHECK(r.iou == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(*r.class_iou[1] == 0.5);
  CHECK(*r.class_iou[2] == 1.0);
  CHECK(r.miou == 0.75);
  CHECK(acc.tp() == std::vector<std::uint64_t>{1, 1, 1});
  CHECK(acc.fp() == std::vector<std::uint64_t>{1, 0, 0});
  CHECK(acc.fn() == std::vector<std::uint64_t>{0, 1, 0});
}

TEST_CASE("symmetric half overlap") {
  ConfusionAccumulator acc(2);
  acc.accumulate(labels_1d({1, 1, 0}), labels_1d({0, 1, 1}));
  const auto r = finalize(acc);
  CHECK(r.iou == doctest::Approx(1.0 / 3.0));
  CHECK(r.miou == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("empty accumulator and absent classes") {
  ConfusionAccumulator acc(4);
  const auto r = finalize(acc);
  CHECK(r.empty);
  CHECK(r.miou == 0.0);

  acc.accumulate(labels_1d({2, 0}), labels_1d({2, 0}));
  const auto r2 = finalize(acc);
  CHECK_FALSE(r2.empty);
  CHECK_FALSE(r2.class_iou[1].has_value());
  CHECK_FALSE(r2.class_iou[3].has_value());
  CHECK(r2.miou == 1.0);
}

TEST_CASE("invalid and ignored voxels never count") {
  std::mt19937_64 rng(2);
  auto gt = random_labels(rng, {8, 8, 4}, 6, 0.3);
  for (std::size_t i = 0; i < gt.size(); i += 17) gt.labels[i] = kIgnoreLabel;
  auto pred = random_labels(rng, {8, 8, 4}, 6, 0.0);
  ConfusionAccumulator a(6);
  a.accumulate(pred, gt);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.invalid[i] || gt.labels[i] == kIgnoreLabel) pred.labels[i] = static_cast<std::uint16_t>((pred.labels[i] + 1) % 6);
  }
  ConfusionAccumulator b(6);
  b.accumulate(pred, gt);
  CHECK(a == b);
  check_same_report(finalize(a), finalize(b));
}

TEST_CASE("view masks decompose the counters") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gt = random_labels(rng, {10, 9, 5}, 7, 0.1);
    const auto pred = random_labels(rng, {10, 9, 5}, 7, 0.0);
    ViewMask m{gt.dims, std::vector<std::uint8_t>(gt.size())};
    std::bernoulli_distribution bit(0.4);
    for (auto& v : m.in_view) v = bit(rng);
    ConfusionAccumulator all(7), in(7), out(7);
    all.accumulate(pred, gt);
    in.accumulate(pred, gt, m.in_view);
    out.accumulate(pred, gt, m.out_of_view());
    in.merge(out);
    CHECK(in == all);
  }
}

TEST_CASE("consistent relabeling permutes class IoUs") {
  std::mt19937_64 rng(4);
  const auto gt = random_labels(rng, {6, 6, 6}, 5, 0.0);
  const auto pred = random_labels(rng, {6, 6, 6}, 5, 0.0);
  const std::vector<std::uint16_t> perm{0, 3, 1, 4, 2};  // empty stays empty
  auto pg = gt, pp = pred;
  for (auto& l : pg.labels) l = perm[l];
  for (auto& l : pp.labels) l = perm[l];
  ConfusionAccumulator a(5), b(5);
  a.accumulate(pred, gt);
  b.accumulate(pp, pg);
  const auto ra = finalize(a), rb = finalize(b);
  CHECK(ra.iou == rb.iou);
  CHECK(ra.miou == doctest::Approx(rb.miou).epsilon(1e-15));
  for (std::size_t k = 1; k < 5; ++k) CHECK(ra.class_iou[k] == rb.class_iou[perm[k]]);
}

TEST_CASE("accumulate rejects bad inputs") {
  ConfusionAccumulator acc(3);
  CHECK_THROWS(acc.accumulate(labels_1d({0, 1}), labels_1d({0, 1, 2})));
  CHECK_THROWS(acc.accumulate(labels_1d({0, 5}), labels_1d({0, 1})));
  CHECK_THROWS(ConfusionAccumulator(1));
  ConfusionAccumulator other(4);
  CHECK_THROWS(acc.merge(other));
}

TEST_CASE("oov mask hand cases") {
  // One voxel row along the optical axis: z in [-10, 30) m, 4 m voxels.
  VoxelBounds b;
  b.min_corner = {-0.5, -0.5, -10.0};
  b.max_corner = {0.5, 0.5, 30.0};
  b.resolution = {1, 1, 10};
  const CameraIntrinsics K{100, 100, 50, 50, 100, 100};
  const auto m = oov_mask(b, K, RigidTransform::identity());
  // centers at -8, -4, 0, 4, ..., 28; Z <= 0 is out of view
  for (std::size_t z = 0; z < 10; ++z) CHECK(m.in_view[z] == (z >= 3 ? 1 : 0));
}

TEST_CASE("oov mask matches a projection loop") {
  std::mt19937_64 rng(5);
  VoxelBounds b;
  b.min_corner = {0, -8, -2};
  b.max_corner = {16, 8, 2};
  b.resolution = {8, 8, 4};
  RigidTransform cam_from_ego;
  cam_from_ego.rotation << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  const CameraIntrinsics K{20, 20, 16, 12, 32, 24};
  const auto m = oov_mask(b, K, cam_from_ego);
  for (std::size_t x = 0; x < 8; ++x) {
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t z = 0; z < 4; ++z) {
        const Eigen::Vector3d c{(x + 0.5) * 2.0, -8.0 + (y + 0.5) * 2.0, -2.0 + (z + 0.5) * 1.0};
        const Eigen::Vector3d q = cam_from_ego.rotation * c + cam_from_ego.translation;
        bool in = false;
        if (q.z() > 0) {
          const double u = 20 * q.x() / q.z() + 16, v = 20 * q.y() / q.z() + 12;
          in = u >= 0 && u < 32 && v >= 0 && v < 24;
        }
        CHECK(m.in_view[(x * 8 + y) * 4 + z] == in);
      }
    }
  }
  const auto ref = reference::oov_mask(b, K, cam_from_ego);
  CHECK(ref.in_view == m.in_view);

  const auto random_pose = test::random_transform(rng, 3.0);
  CHECK(oov_mask(VoxelBounds::kitti_features(), K, random_pose).in_view ==
        reference::oov_mask(VoxelBounds::kitti_features(), K, random_pose).in_view);
}
