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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptf/fusion.hpp"
#include "ptf/geometry.hpp"
#include "ptf/metrics.hpp"
#include "ptf/resample.hpp"

namespace ptf {

static_assert(std::endian::native == std::endian::little, "TensorFile I/O assumes a little-endian host");

using Bytes = std::vector<std::uint8_t>;

/// Text input that could not be parsed. `line` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Binary payload with the wrong layout, size or encoding.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// KITTI calibration and poses

struct CalibSet {
  Eigen::Matrix<double, 3, 4> projection = Eigen::Matrix<double, 3, 4>::Zero();  // P2
  RigidTransform cam_from_lidar;                                                // Tr
  CameraIntrinsics intrinsics;  // K from P2; width/height are not in the file
};

/// Reads "P2:" and "Tr:" lines (12 row-major floats each); other keys are
/// ignored. Image size is taken from `width`/`height`.
CalibSet parse_calib(std::string_view text, std::size_t width = 1, std::size_t height = 1);
std::string format_calib(const CalibSet& calib);

using PoseTrack = std::vector<RigidTransform>;  // world <- camera, one per scan

/// One row-major 3x4 pose per non-blank line. Rotations are projected onto
/// SO(3); drift above 1e-6 is reported on stderr.
PoseTrack parse_poses(std::string_view text);
std::string format_poses(const PoseTrack& poses);

// ---------------------------------------------------------------------------
// Depth PNG: 16-bit gray, meters = raw / 256, raw 0 = missing.

DepthMap read_depth_png(std::span<const std::uint8_t> bytes);
/// Missing or non-positive depth is written as 0; values are rounded to the
/// nearest 1/256 m and must fit in 16 bits.
Bytes write_depth_png(const DepthMap& depth);

// ---------------------------------------------------------------------------
// SemanticKITTI voxel labels: u16 LE ids and MSB-first bit-packed invalid
// flags, flat index x * (Y * Z) + y * Z + z.

inline constexpr VoxelIndex kKittiLabelDims{256, 256, 32};

LabelGrid read_label_grid(std::span<const std::uint8_t> label_bytes,
                          std::span<const std::uint8_t> invalid_bytes,
                          VoxelIndex dims = kKittiLabelDims);
struct LabelBytes {
  Bytes labels;
  Bytes invalid;
};
LabelBytes write_label_grid(const LabelGrid& grid);

// ---------------------------------------------------------------------------
// ASCII PLY

std::string write_ply(const FeaturedPointCloud& cloud, std::size_t channel_limit);

// ---------------------------------------------------------------------------
// TensorFile: u64 LE header length, JSON header {"dims","dtype","axes"}, raw
// little-endian payload.

enum class DType { kU8, kU16, kI32, kU32, kF32, kF64 };

std::size_t dtype_size(DType t);
const char* dtype_name(DType t);
DType dtype_from_name(std::string_view name);

template <typename T>
constexpr DType dtype_of();
template <> constexpr DType dtype_of<std::uint8_t>() { return DType::kU8; }
template <> constexpr DType dtype_of<std::uint16_t>() { return DType::kU16; }
template <> constexpr DType dtype_of<std::int32_t>() { return DType::kI32; }
template <> constexpr DType dtype_of<std::uint32_t>() { return DType::kU32; }
template <> constexpr DType dtype_of<float>() { return DType::kF32; }
template <> constexpr DType dtype_of<double>() { return DType::kF64; }

struct Tensor {
  std::vector<std::size_t> dims;
  DType dtype = DType::kF32;
  std::string axes;
  Bytes payload;

  std::size_t element_count() const;

  template <typename T>
  static Tensor from(std::vector<std::size_t> dims, std::string axes, std::span<const T> values);

  /// Copies the payload out as T; throws FormatError if the dtype differs.
  template <typename T>
  std::vector<T> values() const;

  bool operator==(const Tensor&) const = default;
};

Tensor read_tensor(std::span<const std::uint8_t> bytes);
Bytes write_tensor(const Tensor& tensor);

// Convenience conversions for the containers the CLI moves around.
Tensor to_tensor(const FeatureMap& plane);
Tensor to_tensor(const DepthMap& plane);
FeatureMap feature_map_from_tensor(const Tensor& t);
DepthMap depth_map_from_tensor(const Tensor& t);

// Point clouds and voxel grids as directories of tensors:
//   positions.tensor (N x 3 f64), features.tensor (N x C f32),
//   origin.tensor (N i32), source_pixel.tensor (N x 2 f64);
//   grid_features.tensor (X x Y x Z x C f32), grid_counts.tensor (u32),
//   cross_mask.tensor / self_mask.tensor (u8).

void save_cloud(const std::filesystem::path& dir, const FeaturedPointCloud& cloud);
FeaturedPointCloud load_cloud(const std::filesystem::path& dir);
void save_grid(const std::filesystem::path& dir, const FeatureVoxelGrid& grid);

// ---------------------------------------------------------------------------
// Files

Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------

template <typename T>
Tensor Tensor::from(std::vector<std::size_t> dims, std::string axes, std::span<const T> values) {
  Tensor t;
  t.dims = std::move(dims);
  t.dtype = dtype_of<T>();
  t.axes = std::move(axes);
  if (t.element_count() != values.size()) {
    throw FormatError("tensor dims describe " + std::to_string(t.element_count()) +
                      " elements, got " + std::to_string(values.size()));
  }
  t.payload.resize(values.size_bytes());
  std::memcpy(t.payload.data(), values.data(), values.size_bytes());
  return t;
}

template <typename T>
std::vector<T> Tensor::values() const {
  if (dtype != dtype_of<T>()) {
    throw FormatError(std::string("tensor holds ") + dtype_name(dtype) + ", requested " +
                      dtype_name(dtype_of<T>()));
  }
  std::vector<T> out(payload.size() / sizeof(T));
  std::memcpy(out.data(), payload.data(), out.size() * sizeof(T));
  return out;
}

}  // namespace ptf
