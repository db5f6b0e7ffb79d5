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
#include <span>
#include <stdexcept>
#include <vector>

namespace ptf {

/// Row-major H x W x C image-like array.
template <typename T>
struct Plane2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<T> data;

  Plane2D() = default;
  Plane2D(std::size_t h, std::size_t w, std::size_t c, T fill = T{})
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  std::size_t pixel_count() const { return height * width; }
  std::size_t index(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return (row * width + col) * channels + ch;
  }
  T& at(std::size_t row, std::size_t col, std::size_t ch = 0) { return data[index(row, col, ch)]; }
  const T& at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return data[index(row, col, ch)];
  }
  std::span<const T> pixel(std::size_t flat) const {
    return {data.data() + flat * channels, channels};
  }
  std::span<T> pixel(std::size_t flat) { return {data.data() + flat * channels, channels}; }

  bool operator==(const Plane2D&) const = default;
};

/// Row-major X x Y x Z x C volume.
template <typename T>
struct Volume3D {
  std::array<std::size_t, 3> dims{0, 0, 0};
  std::size_t channels = 0;
  std::vector<T> data;

  Volume3D() = default;
  Volume3D(std::array<std::size_t, 3> d, std::size_t c, T fill = T{})
      : dims(d), channels(c), data(d[0] * d[1] * d[2] * c, fill) {}

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t voxel_index(std::size_t x, std::size_t y, std::size_t z) const {
    return (x * dims[1] + y) * dims[2] + z;
  }
  T& at(std::size_t x, std::size_t y, std::size_t z, std::size_t ch = 0) {
    return data[voxel_index(x, y, z) * channels + ch];
  }
  const T& at(std::size_t x, std::size_t y, std::size_t z, std::size_t ch = 0) const {
    return data[voxel_index(x, y, z) * channels + ch];
  }

  bool operator==(const Volume3D&) const = default;
};

using FeatureMap = Plane2D<float>;
using DepthMap = Plane2D<double>;

/// Bilinear resampling with half-pixel centers (align_corners=False).
///
/// Output sample d reads source coordinate (d + 0.5) * in / out - 0.5, clamped
/// to [0, in - 1]. Taps that carry zero weight are skipped, so a NaN neighbour
/// only propagates where it actually contributes.
template <typename T>
Plane2D<T> bilinear_resize(const Plane2D<T>& src, std::size_t out_h, std::size_t out_w);

/// Trilinear counterpart of bilinear_resize over the three spatial axes.
template <typename T>
Volume3D<T> trilinear_resize(const Volume3D<T>& src, std::array<std::size_t, 3> out_dims);

enum class ValidRule {
  kFinite,         // every finite element participates
  kPositiveDepth,  // finite and strictly positive
};

/// Min-max normalization of a single-channel plane over its valid elements.
///
/// Invalid elements come out as NaN. A constant plane maps to 0.
Plane2D<double> minmax_normalize(const Plane2D<double>& src, ValidRule rule = ValidRule::kFinite);

namespace detail {

struct Tap {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
};

// Per-axis source taps for half-pixel-center resampling.
std::vector<Tap> half_pixel_taps(std::size_t in, std::size_t out);

}  // namespace detail

}  // namespace ptf
