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

#include <random>
#include <set>
#include <utility>

#include "ptf/geometry.hpp"
#include "ptf/reference.hpp"
#include "support.hpp"

using namespace ptf;

TEST_CASE("pixel grid holds (col, row)") {
  const PixelGrid one = make_pixel_grid(1, 1);
  CHECK(one.at(0, 0) == Pixel(0, 0));

  const PixelGrid g = make_pixel_grid(2, 3);
  REQUIRE(g.height() == 2);
  REQUIRE(g.width() == 3);
  CHECK(g.at(0, 0) == Pixel(0, 0));
  CHECK(g.at(0, 1) == Pixel(1, 0));
  CHECK(g.at(0, 2) == Pixel(2, 0));
  CHECK(g.at(1, 0) == Pixel(0, 1));
  CHECK(g.at(1, 2) == Pixel(2, 1));

  const PixelGrid big = make_pixel_grid(17, 23);
  std::set<std::pair<double, double>> seen;
  for (std::size_t r = 0; r < 17; ++r) {
    for (std::size_t c = 0; c < 23; ++c) seen.insert({big.at(r, c).x(), big.at(r, c).y()});
  }
  CHECK(seen.size() == 17 * 23);
}

TEST_CASE("backproject hand cases") {
  DepthMap d(1, 1, 1, 5.0);
  const auto b = backproject(d, make_pixel_grid(1, 1), {1, 1, 0, 0, 1, 1});
  REQUIRE(b.points.size() == 1);
  CHECK(b.points[0] == Point3(0, 0, 5));

  // pixel (u=3, v=5) with fx=fy=2, cx=cy=1, d=4
  DepthMap d2(6, 4, 1, 0.0);
  d2.at(5, 3) = 4.0;
  const auto b2 = backproject(d2, make_pixel_grid(6, 4), {2, 2, 1, 1, 4, 6});
  REQUIRE(b2.points.size() == 1);
  CHECK(b2.points[0] == Point3(4, 8, 4));
  CHECK(b2.kept == std::vector<std::size_t>{5 * 4 + 3});
}

TEST_CASE("backproject drops invalid depth and keeps indices aligned") {
  DepthMap d(3, 3, 1, 2.0);
  d.at(0, 1) = 0.0;
  d.at(1, 1) = -1.0;
  d.at(2, 0) = std::numeric_limits<double>::quiet_NaN();
  d.at(2, 2) = std::numeric_limits<double>::infinity();
  const auto b = backproject(d, make_pixel_grid(3, 3), test::test_camera(3, 3));
  CHECK(b.points.size() == 5);
  CHECK(b.kept.size() == b.points.size());
  CHECK(b.kept == std::vector<std::size_t>{0, 2, 3, 5, 7});
}

TEST_CASE("project hand cases") {
  const std::vector<Point3> pts{{4, 8, 4}, {0, 0, -1}, {1, 1, 0}};
  const auto p = project(pts, {2, 2, 1, 1, 8, 8});
  CHECK(p[0].u == 3.0);
  CHECK(p[0].v == 5.0);
  CHECK(p[0].z == 4.0);
  CHECK_FALSE(p[0].behind);
  CHECK(p[1].behind);
  CHECK(p[2].behind);
}

TEST_CASE("project inverts backproject on random depth") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> depth(0.1, 80.0);
  const auto K = test::test_camera(61, 37);
  DepthMap d(37, 61, 1);
  for (auto& v : d.data) v = depth(rng);
  const PixelGrid g = make_pixel_grid(37, 61);
  const auto b = backproject(d, g, K);
  REQUIRE(b.points.size() == d.data.size());
  const auto p = project(b.points, K);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Pixel uv = g.at(b.kept[i] / 61, b.kept[i] % 61);
    worst = std::max({worst, std::abs(p[i].u - uv.x()), std::abs(p[i].v - uv.y())});
    CHECK(p[i].z == d.data[b.kept[i]]);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("parallel backproject matches the serial loop") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> depth(-5.0, 50.0);
  DepthMap d(50, 70, 1);
  for (auto& v : d.data) v = depth(rng);
  const auto K = test::test_camera(70, 50);
  const PixelGrid g = make_pixel_grid(50, 70);
  const auto a = backproject(d, g, K);
  const auto b = reference::backproject(d, g, K);
  CHECK(a.kept == b.kept);
  CHECK(a.points == b.points);
}

TEST_CASE("relative pose") {
  std::mt19937_64 rng(11);
  const RigidTransform T = test::random_transform(rng);
  CHECK(test::transform_distance(relative_pose(T, T), RigidTransform::identity()) < 1e-12);

  RigidTransform src;
  src.translation = {1, 0, 0};
  CHECK(relative_pose(src, RigidTransform::identity()).translation == Eigen::Vector3d(1, 0, 0));

  CHECK(test::transform_distance(relative_pose(T, RigidTransform::identity()), T) < 1e-15);

  for (int i = 0; i < 100; ++i) {
    const RigidTransform a = test::random_transform(rng);
    const RigidTransform b = test::random_transform(rng);
    CHECK(test::transform_distance(relative_pose(a, b) * relative_pose(b, a),
                                   RigidTransform::identity()) < 1e-9);
  }
}

TEST_CASE("transform points") {
  const std::vector<Point3> pts{{0, 0, 5}, {1.25, -3.5, 7.0}};
  CHECK(transform_points(pts, RigidTransform::identity()) == pts);

  RigidTransform t;
  t.translation = {1, 0, 0};
  CHECK(transform_points(pts, t)[0] == Point3(1, 0, 5));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Point3> cloud(500);
  for (auto& p : cloud) p = {u(rng), u(rng), u(rng)};
  const RigidTransform T = test::random_transform(rng);
  const auto moved = transform_points(cloud, T);
  const auto back = transform_points(moved, T.inverse());
  double worst = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    worst = std::max(worst, (back[i] - cloud[i]).cwiseAbs().maxCoeff());
    const std::size_t j = (i * 7 + 3) % cloud.size();
    dist = std::max(dist, std::abs((moved[i] - moved[j]).norm() - (cloud[i] - cloud[j]).norm()));
  }
  CHECK(worst < 1e-9);
  CHECK(dist < 1e-9);

  auto inplace = cloud;
  transform_points_inplace(inplace, T);
  CHECK(inplace == moved);
}

TEST_CASE("rigid transform validation") {
  CHECK_THROWS_AS(RigidTransform::from_row_major(std::vector<double>(11, 0.0)), std::invalid_argument);
  const std::vector<double> shear{1, 0.5, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  CHECK_FALSE(RigidTransform::from_row_major(shear).is_valid());
  const std::vector<double> ok{1, 0, 0, 1, 0, 1, 0, 2, 0, 0, 1, 3};
  const auto T = RigidTransform::from_row_major(ok);
  CHECK(T.is_valid());
  CHECK(T.translation == Eigen::Vector3d(1, 2, 3));

  CameraIntrinsics bad{0.0, 1.0, 0, 0, 4, 4};
  CHECK_THROWS(bad.validate());
}
