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

// Single-threaded reference versions of the parallel kernels. They follow the
// textbook loop order and are used by the tests and the benchmark as the
// baseline the OpenMP paths must match.

#include "ptf/geometry.hpp"
#include "ptf/metrics.hpp"
#include "ptf/resample.hpp"
#include "ptf/voxel.hpp"

namespace ptf::reference {

template <typename T>
Plane2D<T> bilinear_resize(const Plane2D<T>& src, std::size_t out_h, std::size_t out_w);

template <typename T>
Volume3D<T> trilinear_resize(const Volume3D<T>& src, std::array<std::size_t, 3> out_dims);

Backprojection backproject(const DepthMap& depth, const PixelGrid& grid,
                           const CameraIntrinsics& intr);

/// Point-order scatter-add; bit-identical to Accumulation::kDeterministic.
FeatureVoxelGrid voxelize(const FeaturedPointCloud& cloud, const VoxelBounds& bounds,
                          std::size_t n_frames);

ViewMask oov_mask(const VoxelBounds& bounds, const CameraIntrinsics& intr,
                  const RigidTransform& cam_from_ego);

}  // namespace ptf::reference
