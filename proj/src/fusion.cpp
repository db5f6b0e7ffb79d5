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

#include "ptf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace ptf {

namespace {

constexpr double kPoseTolerance = 1e-6;

bool is_identity(const RigidTransform& T) {
  return T.rotation == Eigen::Matrix3d::Identity() && T.translation == Eigen::Vector3d::Zero();
}

}  // namespace

void FrameBundle::validate() const {
  if (offset < 0) throw std::invalid_argument("frame offset must be >= 0");
  intrinsics.validate();
  if (depth.channels != 1) throw std::invalid_argument("frame depth must have one channel");
  if (depth.height != intrinsics.height || depth.width != intrinsics.width) {
    throw std::invalid_argument("frame depth " + std::to_string(depth.height) + "x" +
                                std::to_string(depth.width) +
                                " does not match intrinsics image size " +
                                std::to_string(intrinsics.height) + "x" +
                                std::to_string(intrinsics.width));
  }
  if (features.height == 0 || features.width == 0 || features.channels == 0) {
    throw std::invalid_argument("frame features must be non-empty");
  }
  pose.validate(kPoseTolerance);
}

void FuseConfig::validate() const {
  if (n_frames < 1) throw std::invalid_argument("n_frames must be >= 1");
  if (densify_factor < 1) throw std::invalid_argument("densify_factor must be >= 1");
  output_from_camera.validate(kPoseTolerance);
}

void FeaturedPointCloud::validate() const {
  const std::size_t n = positions.size();
  if (features.size() != n * channels || origin.size() != n || source_pixel.size() != n) {
    throw std::invalid_argument("point cloud arrays disagree in length");
  }
}

void FeaturedPointCloud::append(const FeaturedPointCloud& other) {
  if (other.empty()) return;
  if (empty() && channels == 0) channels = other.channels;
  if (other.channels != channels) {
    throw std::invalid_argument("cannot append clouds with " + std::to_string(other.channels) +
                                " and " + std::to_string(channels) + " channels");
  }
  positions.insert(positions.end(), other.positions.begin(), other.positions.end());
  features.insert(features.end(), other.features.begin(), other.features.end());
  origin.insert(origin.end(), other.origin.begin(), other.origin.end());
  source_pixel.insert(source_pixel.end(), other.source_pixel.begin(), other.source_pixel.end());
}

FeaturedPointCloud FeaturedPointCloud::select(std::span<const std::size_t> indices) const {
  FeaturedPointCloud out;
  out.channels = channels;
  out.positions.reserve(indices.size());
  out.features.reserve(indices.size() * channels);
  out.origin.reserve(indices.size());
  out.source_pixel.reserve(indices.size());
  for (std::size_t i : indices) {
    out.positions.push_back(positions[i]);
    auto f = feature(i);
    out.features.insert(out.features.end(), f.begin(), f.end());
    out.origin.push_back(origin[i]);
    out.source_pixel.push_back(source_pixel[i]);
  }
  return out;
}

FeatureMap project_channels(const FeatureMap& features,
                            const std::optional<ChannelProjection>& projection) {
  if (!projection) return features;
  const ChannelProjection& P = *projection;
  if (P.in_channels() != features.channels) {
    throw std::invalid_argument("channel projection expects " + std::to_string(P.in_channels()) +
                                " input channels, features have " +
                                std::to_string(features.channels));
  }
  if (P.bias.size() != 0 && static_cast<std::size_t>(P.bias.size()) != P.out_channels()) {
    throw std::invalid_argument("channel projection bias length does not match its rows");
  }
  const std::size_t cin = P.in_channels();
  const std::size_t cout = P.out_channels();
  FeatureMap out(features.height, features.width, cout);
  const std::size_t n = features.pixel_count();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
    const float* src = features.data.data() + static_cast<std::size_t>(p) * cin;
    float* dst = out.data.data() + static_cast<std::size_t>(p) * cout;
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = P.bias.size() ? P.bias(static_cast<Eigen::Index>(o)) : 0.0;
      for (std::size_t i = 0; i < cin; ++i) {
        acc += P.weight(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) * src[i];
      }
      dst[o] = static_cast<float>(acc);
    }
  }
  return out;
}

namespace {

// Shared by both lift_on_grid overloads. Takes the feature buffer by value so
// callers that own a temporary plane can hand it over: kept indices increase,
// so rows are compacted in place without a second allocation.
LiftResult lift_owned(const PixelGrid& grid, const DepthMap& depth, FeatureMap features,
                      const CameraIntrinsics& intr, int origin) {
  if (features.height != grid.height() || features.width != grid.width()) {
    throw std::invalid_argument("lift: features do not match the sampling grid");
  }
  Backprojection bp = backproject(depth, grid, intr);

  LiftResult res;
  FeaturedPointCloud& cloud = res.cloud;
  const std::size_t n = bp.kept.size();
  const std::size_t C = features.channels;
  cloud.channels = C;
  cloud.positions = std::move(bp.points);
  cloud.origin.assign(n, origin);
  cloud.source_pixel.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    const std::size_t i = bp.kept[static_cast<std::size_t>(k)];
    cloud.source_pixel[static_cast<std::size_t>(k)] = {grid.coords.data[2 * i],
                                                       grid.coords.data[2 * i + 1]};
  }
  std::vector<float>& f = features.data;
  if (n != features.pixel_count()) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = bp.kept[k];
      if (i != k) std::copy_n(f.data() + i * C, C, f.data() + k * C);
    }
    f.resize(n * C);
    f.shrink_to_fit();
  }
  cloud.features = std::move(f);
  res.kept = std::move(bp.kept);
  return res;
}

}  // namespace

LiftResult lift_on_grid(const PixelGrid& grid, const DepthMap& depth, const FeatureMap& features,
                        const CameraIntrinsics& intr, int origin) {
  return lift_owned(grid, depth, features, intr, origin);
}

namespace {

FeatureMap features_at_depth_resolution(const FrameBundle& frame,
                                        const std::optional<ChannelProjection>& projection) {
  return bilinear_resize(project_channels(frame.features, projection), frame.depth.height,
                         frame.depth.width);
}

}  // namespace

FeaturedPointCloud lift_frame(const FrameBundle& frame, const FuseConfig& cfg) {
  frame.validate();
  const PixelGrid grid = make_pixel_grid(frame.depth.height, frame.depth.width);
  return lift_owned(grid, frame.depth, features_at_depth_resolution(frame, cfg.channel_projection),
                    frame.intrinsics, frame.offset)
      .cloud;
}

Plane2D<double> hcb_weights(const DepthMap& depth) {
  Plane2D<double> w = minmax_normalize(depth, ValidRule::kPositiveDepth);
  for (double& v : w.data) v = std::isnan(v) ? 0.0 : 1.0 - v;
  return w;
}

namespace {

void blur_inplace(FeaturedPointCloud& out, std::span<const double> weights) {
  if (weights.size() != out.size()) {
    throw std::invalid_argument("apply_blur: " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(out.size()) + " points");
  }
  const std::size_t C = out.channels;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(out.size()); ++k) {
    const double w = weights[static_cast<std::size_t>(k)];
    float* f = out.features.data() + static_cast<std::size_t>(k) * C;
    for (std::size_t c = 0; c < C; ++c) f[c] = static_cast<float>(w * f[c]);
  }
}

}  // namespace

FeaturedPointCloud apply_blur(const FeaturedPointCloud& points, std::span<const double> weights) {
  FeaturedPointCloud out = points;
  blur_inplace(out, weights);
  return out;
}

Densified densify_current(const FrameBundle& frame, std::size_t factor,
                          const std::optional<ChannelProjection>& projection) {
  if (factor < 1) throw std::invalid_argument("densify_current: factor must be >= 1");
  if (frame.offset != 0) {
    throw std::invalid_argument("densify_current: only the current frame (offset 0) is densified");
  }
  frame.validate();
  const std::size_t H = frame.depth.height;
  const std::size_t W = frame.depth.width;
  Densified out{make_pixel_grid(H, W), frame.depth, features_at_depth_resolution(frame, projection)};
  if (factor == 1) return out;

  for (double& d : out.depth.data) {
    if (!is_valid_depth(d)) d = std::numeric_limits<double>::quiet_NaN();
  }
  out.grid.coords = bilinear_resize(out.grid.coords, H * factor, W * factor);
  out.depth = bilinear_resize(out.depth, H * factor, W * factor);
  out.features = bilinear_resize(out.features, H * factor, W * factor);
  return out;
}

FeaturedPointCloud fuse(std::span<const FrameBundle> frames, const FuseConfig& cfg) {
  cfg.validate();
  std::set<int> seen;
  for (const auto& f : frames) {
    if (!seen.insert(f.offset).second) {
      throw std::invalid_argument("fuse: duplicate frame offset " + std::to_string(f.offset));
    }
  }
  if (!seen.contains(0)) throw std::invalid_argument("fuse: no current frame (offset 0)");

  std::vector<const FrameBundle*> active;
  for (const auto& f : frames) {
    if (static_cast<std::size_t>(f.offset) < cfg.n_frames) active.push_back(&f);
  }
  std::sort(active.begin(), active.end(),
            [](const FrameBundle* a, const FrameBundle* b) { return a->offset < b->offset; });
  const FrameBundle& current = *active.front();

  std::vector<FeaturedPointCloud> parts;
  for (const FrameBundle* frame : active) {
    frame->validate();
    FeaturedPointCloud part;
    RigidTransform to_output = cfg.output_from_camera;
    if (frame->offset == 0) {
      if (cfg.enable_ccfd) {
        Densified d = densify_current(*frame, cfg.densify_factor, cfg.channel_projection);
        part = lift_owned(d.grid, d.depth, std::move(d.features), frame->intrinsics, 0).cloud;
      } else {
        part = lift_frame(*frame, cfg);
      }
    } else {
      const PixelGrid grid = make_pixel_grid(frame->depth.height, frame->depth.width);
      LiftResult lifted =
          lift_owned(grid, frame->depth, features_at_depth_resolution(*frame, cfg.channel_projection),
                     frame->intrinsics, frame->offset);
      if (cfg.enable_hcb && !lifted.kept.empty()) {
        const Plane2D<double> w = hcb_weights(frame->depth);
        std::vector<double> per_point(lifted.kept.size());
        for (std::size_t k = 0; k < per_point.size(); ++k) per_point[k] = w.data[lifted.kept[k]];
        blur_inplace(lifted.cloud, per_point);
      }
      part = std::move(lifted.cloud);
      to_output = cfg.output_from_camera * relative_pose(frame->pose, current.pose);
    }
    if (!is_identity(to_output)) transform_points_inplace(part.positions, to_output);
    parts.push_back(std::move(part));
  }

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  FeaturedPointCloud fused = std::move(parts.front());
  fused.positions.reserve(total);
  fused.features.reserve(total * fused.channels);
  fused.origin.reserve(total);
  fused.source_pixel.reserve(total);
  for (std::size_t k = 1; k < parts.size(); ++k) {
    fused.append(parts[k]);
    parts[k] = {};
  }
  if (fused.empty() && fused.channels == 0) {
    fused.channels = project_channels(current.features, cfg.channel_projection).channels;
  }
  return fused;
}

}  // namespace ptf
