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

#include "ptf/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptf::reference {

namespace {

struct Sample {
  std::size_t i0, i1;
  double w1;
};

Sample source_sample(std::size_t dst, std::size_t in, std::size_t out) {
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double s = std::clamp((static_cast<double>(dst) + 0.5) * scale - 0.5, 0.0,
                              static_cast<double>(in - 1));
  const auto i0 = std::min(static_cast<std::size_t>(s), in - 1);
  if (i0 + 1 >= in) return {i0, i0, 0.0};
  return {i0, i0 + 1, s - static_cast<double>(i0)};
}

double lerp(double a, double b, double w1) {
  const double w0 = 1.0 - w1;
  if (w1 == 0.0) return w0 * a;
  if (w0 == 0.0) return w1 * b;
  return w0 * a + w1 * b;
}

}  // namespace

template <typename T>
Plane2D<T> bilinear_resize(const Plane2D<T>& src, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw std::invalid_argument("bilinear_resize: zero output size");
  if (out_h == src.height && out_w == src.width) return src;
  Plane2D<T> dst(out_h, out_w, src.channels);
  for (std::size_t r = 0; r < out_h; ++r) {
    const Sample y = source_sample(r, src.height, out_h);
    for (std::size_t c = 0; c < out_w; ++c) {
      const Sample x = source_sample(c, src.width, out_w);
      for (std::size_t ch = 0; ch < src.channels; ++ch) {
        const double top = lerp(src.at(y.i0, x.i0, ch), src.at(y.i0, x.i1, ch), x.w1);
        const double bot = lerp(src.at(y.i1, x.i0, ch), src.at(y.i1, x.i1, ch), x.w1);
        dst.at(r, c, ch) = static_cast<T>(lerp(top, bot, y.w1));
      }
    }
  }
  return dst;
}

template <typename T>
Volume3D<T> trilinear_resize(const Volume3D<T>& src, std::array<std::size_t, 3> out_dims) {
  for (auto d : out_dims) {
    if (d == 0) throw std::invalid_argument("trilinear_resize: zero output size");
  }
  if (out_dims == src.dims) return src;
  Volume3D<T> dst(out_dims, src.channels);
  for (std::size_t i = 0; i < out_dims[0]; ++i) {
    const Sample a = source_sample(i, src.dims[0], out_dims[0]);
    for (std::size_t j = 0; j < out_dims[1]; ++j) {
      const Sample b = source_sample(j, src.dims[1], out_dims[1]);
      for (std::size_t k = 0; k < out_dims[2]; ++k) {
        const Sample c = source_sample(k, src.dims[2], out_dims[2]);
        for (std::size_t ch = 0; ch < src.channels; ++ch) {
          auto z = [&](std::size_t x, std::size_t y) {
            return lerp(src.at(x, y, c.i0, ch), src.at(x, y, c.i1, ch), c.w1);
          };
          const double y0 = lerp(z(a.i0, b.i0), z(a.i0, b.i1), b.w1);
          const double y1 = lerp(z(a.i1, b.i0), z(a.i1, b.i1), b.w1);
          dst.at(i, j, k, ch) = static_cast<T>(lerp(y0, y1, a.w1));
        }
      }
    }
  }
  return dst;
}

Backprojection backproject(const DepthMap& depth, const PixelGrid& grid,
                           const CameraIntrinsics& intr) {
  if (depth.height != grid.height() || depth.width != grid.width()) {
    throw std::invalid_argument("backproject: shape mismatch");
  }
  Backprojection out;
  for (std::size_t r = 0; r < depth.height; ++r) {
    for (std::size_t c = 0; c < depth.width; ++c) {
      const double d = depth.at(r, c);
      if (!is_valid_depth(d)) continue;
      const Pixel uv = grid.at(r, c);
      out.points.emplace_back((uv.x() - intr.cx) * (1.0 / intr.fx) * d,
                              (uv.y() - intr.cy) * (1.0 / intr.fy) * d, d);
      out.kept.push_back(r * depth.width + c);
    }
  }
  return out;
}

FeatureVoxelGrid voxelize(const FeaturedPointCloud& cloud, const VoxelBounds& bounds,
                          std::size_t n_frames) {
  if (n_frames == 0) throw std::invalid_argument("voxelize: n_frames must be >= 1");
  const std::size_t C = cloud.channels;
  std::vector<double> sum(bounds.voxel_count() * C, 0.0);
  FeatureVoxelGrid grid;
  grid.bounds = bounds;
  grid.n_frames = n_frames;
  grid.counts.assign(bounds.voxel_count(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto v = bounds.locate(cloud.positions[i]);
    if (!v) continue;
    const std::size_t f = bounds.flat_index(*v);
    ++grid.counts[f];
    for (std::size_t c = 0; c < C; ++c) sum[f * C + c] += cloud.features[i * C + c];
  }
  grid.features = Volume3D<float>(bounds.resolution, C);
  const double inv_n = 1.0 / static_cast<double>(n_frames);
  for (std::size_t k = 0; k < sum.size(); ++k) {
    grid.features.data[k] = static_cast<float>(sum[k] * inv_n);
  }
  return grid;
}

ViewMask oov_mask(const VoxelBounds& bounds, const CameraIntrinsics& intr,
                  const RigidTransform& cam_from_ego) {
  ViewMask mask{bounds.resolution, std::vector<std::uint8_t>(bounds.voxel_count(), 0)};
  std::size_t f = 0;
  for (std::size_t x = 0; x < bounds.resolution[0]; ++x) {
    for (std::size_t y = 0; y < bounds.resolution[1]; ++y) {
      for (std::size_t z = 0; z < bounds.resolution[2]; ++z, ++f) {
        const Point3 c = cam_from_ego.rotation * bounds.voxel_center({x, y, z}) + cam_from_ego.translation;
        if (c.z() <= 0.0) continue;
        const double u = intr.fx * c.x() / c.z() + intr.cx;
        const double v = intr.fy * c.y() / c.z() + intr.cy;
        mask.in_view[f] = u >= 0.0 && u < static_cast<double>(intr.width) && v >= 0.0 &&
                          v < static_cast<double>(intr.height);
      }
    }
  }
  return mask;
}

template Plane2D<float> bilinear_resize(const Plane2D<float>&, std::size_t, std::size_t);
template Plane2D<double> bilinear_resize(const Plane2D<double>&, std::size_t, std::size_t);
template Volume3D<float> trilinear_resize(const Volume3D<float>&, std::array<std::size_t, 3>);
template Volume3D<double> trilinear_resize(const Volume3D<double>&, std::array<std::size_t, 3>);

}  // namespace ptf::reference
