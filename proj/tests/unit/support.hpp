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

// Small helpers shared by the unit tests.

#include <Eigen/Geometry>

#include <cstdint>
#include <random>

#include "ptf/geometry.hpp"

namespace ptf::test {

inline RigidTransform random_transform(std::mt19937_64& rng, double max_translation = 10.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> t(-max_translation, max_translation);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  RigidTransform T;
  T.rotation = q.toRotationMatrix();
  T.translation = {t(rng), t(rng), t(rng)};
  return T;
}

inline CameraIntrinsics test_camera(std::size_t width = 64, std::size_t height = 48) {
  return {50.0, 55.0, 31.5, 23.25, width, height};
}

// Maximum absolute entry difference of two transforms.
inline double transform_distance(const RigidTransform& a, const RigidTransform& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

}  // namespace ptf::test
