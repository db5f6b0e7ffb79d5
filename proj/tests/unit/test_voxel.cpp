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

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ptf/parallel.hpp"
#include "ptf/reference.hpp"
#include "ptf/voxel.hpp"

using namespace ptf;

namespace {

FeaturedPointCloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t channels,
                                const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                int origins = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<float> f(-2.0F, 2.0F);
  std::uniform_int_distribution<int> o(0, origins - 1);
  FeaturedPointCloud c;
  c.channels = channels;
  for (std::size_t i = 0; i < n; ++i) {
    c.positions.push_back(lo + (hi - lo).cwiseProduct(Eigen::Vector3d(u(rng), u(rng), u(rng))));
    for (std::size_t k = 0; k < channels; ++k) c.features.push_back(f(rng));
    c.origin.push_back(o(rng));
    c.source_pixel.push_back({0, 0});
  }
  return c;
}

VoxelBounds cube_bounds(std::size_t res) {
  VoxelBounds b;
  b.min_corner = {-1.3, 0.7, -4.1};
  b.max_corner = {2.9, 3.1, 1.7};
  b.resolution = {res, res, res};
  return b;
}

// Independent voxel box test: [min + k*s, min + (k+1)*s) on each axis.
bool in_voxel(const Point3& p, const VoxelBounds& b, std::size_t x, std::size_t y, std::size_t z) {
  const std::size_t k[3] = {x, y, z};
  for (int a = 0; a < 3; ++a) {
    const double s = (b.max_corner[a] - b.min_corner[a]) / static_cast<double>(b.resolution[static_cast<std::size_t>(a)]);
    const double lo = b.min_corner[a] + static_cast<double>(k[a]) * s;
    const double hi = b.min_corner[a] + static_cast<double>(k[a] + 1) * s;
    if (!(p[a] >= lo && p[a] < hi)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("filter bounds") {
  std::mt19937_64 rng(1);
  const VoxelBounds b = cube_bounds(8);
  const auto inside = random_cloud(rng, 200, 2, b.min_corner, b.max_corner - Eigen::Vector3d::Constant(1e-9));
  const auto kept = filter_bounds(inside, b);
  CHECK(kept.positions == inside.positions);
  CHECK(kept.features == inside.features);

  FeaturedPointCloud edge;
  edge.channels = 1;
  edge.positions = {b.max_corner, b.min_corner, {b.min_corner.x(), b.max_corner.y(), 0.0}};
  edge.features = {1, 2, 3};
  edge.origin = {0, 0, 0};
  edge.source_pixel.resize(3);
  const auto e = filter_bounds(edge, b);
  REQUIRE(e.size() == 1);
  CHECK(e.positions[0] == b.min_corner);

  const auto mixed = random_cloud(rng, 2000, 1, b.min_corner.array() - 1.0, b.max_corner.array() + 1.0);
  const auto m = filter_bounds(mixed, b);
  std::vector<Point3> want;
  for (const auto& p : mixed.positions) {
    bool in = true;
    for (int a = 0; a < 3; ++a) in = in && p[a] >= b.min_corner[a] && p[a] < b.max_corner[a];
    if (in) want.push_back(p);
  }
  CHECK(m.positions == want);
}

TEST_CASE("voxelize two-point hand case and empty voxels") {
  VoxelBounds b;
  b.resolution = {2, 2, 2};
  FeaturedPointCloud c;
  c.channels = 2;
  c.positions = {{0.1, 0.1, 0.1}, {0.4, 0.2, 0.3}};
  c.features = {1, 2, 3, 4};
  c.origin = {0, 1};
  c.source_pixel.resize(2);
  for (auto mode : {Accumulation::kSharded, Accumulation::kDeterministic}) {
    const auto g = voxelize(c, b, 2, mode);
    CHECK(g.features.at(0, 0, 0, 0) == 2.0F);
    CHECK(g.features.at(0, 0, 0, 1) == 3.0F);
    CHECK(g.counts[0] == 2);
    for (std::size_t v = 1; v < 8; ++v) {
      CHECK(g.counts[v] == 0);
      CHECK(g.features.data[2 * v] == 0.0F);
      CHECK(g.features.data[2 * v + 1] == 0.0F);
    }
  }
}

TEST_CASE("voxelize matches a brute-force scatter oracle") {
  std::mt19937_64 rng(2);
  const VoxelBounds b = cube_bounds(16);
  const auto c = random_cloud(rng, 1000, 3, b.min_corner.array() - 0.5, b.max_corner.array() + 0.5);
  const std::size_t n_frames = 3;
  for (auto mode : {Accumulation::kSharded, Accumulation::kDeterministic}) {
    const auto g = voxelize(c, b, n_frames, mode);
    for (std::size_t x = 0; x < 16; ++x) {
      for (std::size_t y = 0; y < 16; ++y) {
        for (std::size_t z = 0; z < 16; ++z) {
          double sum[3] = {0, 0, 0};
          std::uint32_t count = 0;
          for (std::size_t i = 0; i < c.size(); ++i) {
            if (!in_voxel(c.positions[i], b, x, y, z)) continue;
            ++count;
            for (int k = 0; k < 3; ++k) sum[k] += c.features[i * 3 + static_cast<std::size_t>(k)];
          }
          const std::size_t v = g.features.voxel_index(x, y, z);
          CHECK(g.counts[v] == count);
          for (std::size_t k = 0; k < 3; ++k) {
            const double want = sum[k] / n_frames;
            const double got = g.features.at(x, y, z, k);
            CHECK(std::abs(got - want) <= 1e-4 * std::max(1.0, std::abs(want)));
          }
        }
      }
    }
  }
}

TEST_CASE("voxelize conservation and count totals") {
  std::mt19937_64 rng(3);
  const VoxelBounds b = cube_bounds(20);
  const auto c = random_cloud(rng, 50000, 2, b.min_corner.array() - 0.3, b.max_corner.array() + 0.3, 4);
  const auto g = voxelize(c, b, 4);
  double grid_sum[2] = {0, 0}, point_sum[2] = {0, 0};
  std::uint64_t counted = 0;
  for (std::size_t v = 0; v < g.counts.size(); ++v) {
    counted += g.counts[v];
    for (int k = 0; k < 2; ++k) grid_sum[k] += g.features.data[v * 2 + static_cast<std::size_t>(k)];
  }
  const auto in = filter_bounds(c, b);
  for (std::size_t i = 0; i < in.size(); ++i)
    for (int k = 0; k < 2; ++k) point_sum[k] += in.features[i * 2 + static_cast<std::size_t>(k)];
  CHECK(counted == in.size());
  double scale = 0.0;
  for (float f : in.features) scale += std::abs(f);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(4.0 * grid_sum[k] - point_sum[k]) <= 1e-4 * scale);
}

TEST_CASE("deterministic mode is bit-identical across threads and to the serial loop") {
  std::mt19937_64 rng(4);
  const VoxelBounds b = cube_bounds(12);
  const auto c = random_cloud(rng, 30000, 4, b.min_corner, b.max_corner);
  const int saved = num_threads();
  set_num_threads(1);
  const auto one = voxelize(c, b, 2, Accumulation::kDeterministic);
  set_num_threads(8);
  const auto eight = voxelize(c, b, 2, Accumulation::kDeterministic);
  set_num_threads(saved);
  const auto ref = reference::voxelize(c, b, 2);
  CHECK(one.features == eight.features);
  CHECK(one.counts == eight.counts);
  CHECK(one.features == ref.features);
  CHECK(one.counts == ref.counts);

  // Permuting the input only moves results within float summation tolerance.
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto shuffled = voxelize(c.select(perm), b, 2, Accumulation::kDeterministic);
  CHECK(shuffled.counts == one.counts);
  for (std::size_t i = 0; i < one.features.data.size(); ++i) {
    CHECK(std::abs(shuffled.features.data[i] - one.features.data[i]) <=
          1e-4 * std::max(1.0F, std::abs(one.features.data[i])));
  }
}

TEST_CASE("sharded mode matches the deterministic sums for any thread count") {
  std::mt19937_64 rng(9);
  const VoxelBounds b = cube_bounds(10);
  // Clustered points make the count-balanced shards uneven in voxel width.
  auto c = random_cloud(rng, 20000, 3, b.min_corner, b.max_corner);
  for (std::size_t i = 0; i < c.size(); i += 2) c.positions[i] = {0.1, 1.0, -2.0};
  const auto want = voxelize(c, b, 3, Accumulation::kDeterministic);
  const int saved = num_threads();
  for (int t : {1, 2, 3, 7, 8}) {
    set_num_threads(t);
    const auto got = voxelize(c, b, 3, Accumulation::kSharded);
    CHECK(got.counts == want.counts);
    CHECK(got.features == want.features);
  }
  set_num_threads(saved);
}

TEST_CASE("located voxel box contains the point") {
  std::mt19937_64 rng(5);
  const VoxelBounds b = VoxelBounds::kitti_labels();
  const auto c = random_cloud(rng, 20000, 1, b.min_corner, b.max_corner);
  for (const auto& p : c.positions) {
    const auto v = b.locate(p);
    REQUIRE(v.has_value());
    const Point3 lo = b.voxel_lower(*v), hi = b.voxel_upper(*v);
    CHECK((p.array() >= lo.array()).all());
    CHECK((p.array() < hi.array()).all());
  }
  // Grid-aligned coordinates hit the voxel whose lower face they sit on.
  const auto v = b.locate({0.4, -25.6 + 0.2 * 3, 4.4 - 0.2});
  REQUIRE(v.has_value());
  CHECK((*v)[0] == 2);
  CHECK((*v)[1] == 3);
  CHECK((*v)[2] == 31);
  CHECK_FALSE(b.locate({51.2, 0.0, 0.0}).has_value());
}

TEST_CASE("occupancy masks") {
  VoxelBounds b;
  b.resolution = {3, 3, 3};
  FeaturedPointCloud empty;
  empty.channels = 2;
  const auto g0 = voxelize(empty, b, 1);
  const auto m0 = occupancy_masks(g0);
  for (std::size_t v = 0; v < 27; ++v) {
    CHECK(m0.cross[v] == 0);
    CHECK(m0.self[v] == 1);
  }
  FeaturedPointCloud one = empty;
  one.positions = {{0.5, 0.5, 0.5}};
  one.features = {0, 0};
  one.origin = {2};
  one.source_pixel = {{0, 0}};
  const auto m1 = occupancy_masks(voxelize(one, b, 1));
  CHECK(std::count(m1.cross.begin(), m1.cross.end(), 1) == 1);
  for (std::size_t v = 0; v < 27; ++v) CHECK((m1.cross[v] ^ m1.self[v]) == 1);
}

TEST_CASE("coverage stats") {
  std::mt19937_64 rng(6);
  const VoxelBounds b = cube_bounds(10);
  auto c = random_cloud(rng, 500, 1, b.min_corner, b.max_corner);
  const auto s = coverage_stats(c, b);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].surviving_fraction == 1.0);
  CHECK(s.rows[0].lifted_points == 500);
  CHECK(s.total_voxels == 1000);

  auto far = random_cloud(rng, 300, 1, b.max_corner.array() + 1.0, b.max_corner.array() + 2.0);
  for (auto& o : far.origin) o = 2;
  c.append(far);
  const auto s2 = coverage_stats(c, b);
  REQUIRE(s2.rows.size() == 2);
  CHECK(s2.rows[1].offset == 2);
  CHECK(s2.rows[1].surviving_points == 0);
  CHECK(s2.rows[1].touched_voxels == 0);

  std::set<std::size_t> touched;
  for (const auto& p : c.positions)
    if (auto v = b.locate(p)) touched.insert(b.flat_index(*v));
  CHECK(s2.rows[0].touched_voxels == touched.size());
  CHECK(s2.rows[0].touched_fraction == doctest::Approx(touched.size() / 1000.0));
}

TEST_CASE("argmax labels") {
  Volume3D<float> v({1, 1, 3}, 3);
  v.data = {0, 0.5F, 0.2F,   0.9F, 0.1F, 0.0F,   0, 0, 0};
  const auto l = argmax_labels(v);
  CHECK(l == std::vector<std::uint16_t>{1, 0, 0});
}

TEST_CASE("bounds validation") {
  VoxelBounds b;
  b.max_corner = {1, 0, 1};
  CHECK_THROWS(b.validate());
  FeaturedPointCloud c;
  CHECK_THROWS(voxelize(c, VoxelBounds{}, 0));
}
