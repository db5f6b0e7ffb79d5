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

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ptf/geometry.hpp"
#include "ptf/resample.hpp"

namespace ptf {

/// One time step: image features, depth, camera, world<-camera pose.
struct FrameBundle {
  FeatureMap features;  // H' x W' x C
  DepthMap depth;       // H x W x 1, meters
  CameraIntrinsics intrinsics;
  RigidTransform pose;  // world <- camera
  int offset = 0;       // 0 = current frame t, 1 = t-1, ...

  void validate() const;
};

/// Static per-pixel affine map of channel vectors: out = W x + b.
struct ChannelProjection {
  Eigen::MatrixXd weight;  // C' x C
  Eigen::VectorXd bias;    // C', empty means zero

  std::size_t in_channels() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_channels() const { return static_cast<std::size_t>(weight.rows()); }
};

struct FuseConfig {
  std::size_t n_frames = 4;
  std::size_t densify_factor = 2;
  bool enable_hcb = true;
  bool enable_ccfd = true;
  std::optional<ChannelProjection> channel_projection;
  /// Applied to every fused point after warping into the current camera,
  /// e.g. ego<-camera so the cloud lands in the voxel grid's frame.
  RigidTransform output_from_camera;

  void validate() const;
};

/// N points with C' features each, plus provenance.
struct FeaturedPointCloud {
  Points3 positions;
  std::vector<float> features;  // N x C' row-major
  std::size_t channels = 0;
  std::vector<std::int32_t> origin;  // frame offset of each point
  std::vector<Pixel> source_pixel;   // (u, v) sample the point was lifted from

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  std::span<const float> feature(std::size_t i) const {
    return {features.data() + i * channels, channels};
  }
  /// Throws std::invalid_argument if the per-point arrays disagree in length.
  void validate() const;
  void append(const FeaturedPointCloud& other);
  /// Subset in the order given by `indices`.
  FeaturedPointCloud select(std::span<const std::size_t> indices) const;
};

FeatureMap project_channels(const FeatureMap& features,
                            const std::optional<ChannelProjection>& projection);

/// Lifts samples of `grid` using `depth` and per-sample `features` laid out on
/// the same grid. Returns the cloud together with the flat indices it kept.
struct LiftResult {
  FeaturedPointCloud cloud;
  std::vector<std::size_t> kept;
};
LiftResult lift_on_grid(const PixelGrid& grid, const DepthMap& depth, const FeatureMap& features,
                        const CameraIntrinsics& intr, int origin);

/// Projects channels, resizes features to the depth resolution and lifts the
/// frame at native resolution into its own camera coordinates.
FeaturedPointCloud lift_frame(const FrameBundle& frame, const FuseConfig& cfg);

/// `1 - minmax(depth)` over valid depths of one historical frame; missing
/// pixels get weight 0.
Plane2D<double> hcb_weights(const DepthMap& depth);

/// Scales each point's feature vector by its weight.
FeaturedPointCloud apply_blur(const FeaturedPointCloud& points, std::span<const double> weights);

struct Densified {
  PixelGrid grid;
  DepthMap depth;
  FeatureMap features;
};

/// Upsamples pixel grid, depth and (projected, depth-resolution) features of
/// the current frame by `factor`. Missing depth is NaN before upsampling so it
/// never blends with measured depth.
Densified densify_current(const FrameBundle& frame, std::size_t factor,
                          const std::optional<ChannelProjection>& projection = std::nullopt);

/// Lifts, blurs, densifies and warps the frames into one cloud expressed in
/// the current camera (then `cfg.output_from_camera`). Points are ordered by
/// frame offset, current frame first. Frames with offset >= n_frames are
/// ignored.
FeaturedPointCloud fuse(std::span<const FrameBundle> frames, const FuseConfig& cfg);

}  // namespace ptf
