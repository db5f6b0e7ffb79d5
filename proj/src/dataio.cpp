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

#include "ptf/dataio.hpp"

#include <png.h>

#include <Eigen/SVD>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

namespace ptf {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<double> parse_floats(std::string_view s, std::size_t line_no) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    pos = s.find_first_not_of(" \t", pos);
    if (pos == std::string_view::npos) break;
    std::size_t end = s.find_first_of(" \t", pos);
    if (end == std::string_view::npos) end = s.size();
    const std::string_view tok = s.substr(pos, end - pos);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw ParseError("not a number: '" + std::string(tok) + "'", line_no);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(tok) + "'", line_no);
    out.push_back(v);
    pos = end;
  }
  return out;
}

std::string format_row_major(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) os << R(r, c) << ' ';
    os << t(r) << (r < 2 ? " " : "");
  }
  return os.str();
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU();
  const Eigen::Matrix3d V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return U * V.transpose();
}

}  // namespace

CalibSet parse_calib(std::string_view text, std::size_t width, std::size_t height) {
  CalibSet calib;
  bool have_p2 = false;
  bool have_tr = false;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (is_blank(line)) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected '<key>: <values>'", i + 1);
    std::string_view key = line.substr(0, colon);
    key.remove_prefix(std::min(key.find_first_not_of(" \t"), key.size()));
    if (key != "P2" && key != "Tr") continue;
    const std::vector<double> v = parse_floats(line.substr(colon + 1), i + 1);
    if (v.size() != 12) {
      throw ParseError(std::string(key) + " needs 12 values, found " + std::to_string(v.size()),
                       i + 1);
    }
    if (key == "P2") {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) calib.projection(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
      }
      if (!(calib.projection(0, 0) > 0.0) || !(calib.projection(1, 1) > 0.0)) {
        throw ParseError("P2 focal lengths must be positive", i + 1);
      }
      have_p2 = true;
    } else {
      calib.cam_from_lidar = RigidTransform::from_row_major(v);
      if (!calib.cam_from_lidar.is_valid(1e-6)) {
        throw ParseError("Tr rotation is not orthonormal", i + 1);
      }
      calib.cam_from_lidar.rotation = nearest_rotation(calib.cam_from_lidar.rotation);
      have_tr = true;
    }
  }
  if (!have_p2) throw ParseError("missing P2 entry", 0);
  if (!have_tr) throw ParseError("missing Tr entry", 0);
  calib.intrinsics = {calib.projection(0, 0), calib.projection(1, 1), calib.projection(0, 2),
                      calib.projection(1, 2), width, height};
  return calib;
}

std::string format_calib(const CalibSet& calib) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "P2:";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) os << ' ' << calib.projection(r, c);
  }
  os << "\nTr: " << format_row_major(calib.cam_from_lidar.rotation, calib.cam_from_lidar.translation)
     << '\n';
  return os.str();
}

// Rounding in text files stays far below this; anything above is not a rotation.
constexpr double kMaxPoseDrift = 1e-2;

PoseTrack parse_poses(std::string_view text) {
  PoseTrack poses;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const std::vector<double> v = parse_floats(lines[i], i + 1);
    if (v.size() != 12) {
      throw ParseError("pose needs 12 values, found " + std::to_string(v.size()), i + 1);
    }
    RigidTransform T = RigidTransform::from_row_major(v);
    const double drift =
        (T.rotation.transpose() * T.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (drift > kMaxPoseDrift) {
      throw ParseError("pose rotation is not a rotation (drift " + std::to_string(drift) + ")", i + 1);
    }
    if (drift > 1e-6) {
      std::cerr << "parse_poses: line " << (i + 1) << " rotation drift " << drift
                << ", projecting onto SO(3)\n";
    }
    if (drift > 1e-12) T.rotation = nearest_rotation(T.rotation);
    if (!(T.rotation.determinant() > 0.0) || !T.is_valid(1e-9)) {
      throw ParseError("pose rotation is not a proper rotation", i + 1);
    }
    poses.push_back(T);
  }
  if (poses.empty()) throw ParseError("no poses", 0);
  return poses;
}

std::string format_poses(const PoseTrack& poses) {
  std::string out;
  for (const auto& T : poses) out += format_row_major(T.rotation, T.translation) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngSource {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->bytes.data() + src->pos, n);
  src->pos += n;
}

void png_write_to_bytes(png_structp png, png_bytep data, png_size_t n) {
  auto* dst = static_cast<Bytes*>(png_get_io_ptr(png));
  dst->insert(dst->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

// Error text set by libpng's longjmp path; plain C types only in the setjmp frame.
struct PngDecode {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::uint16_t* raw = nullptr;  // filled on the second pass
};

// Returns false on a libpng error. With out->raw == nullptr only the header is read.
bool decode_png(PngSource* src, PngDecode* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep row = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(row);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, src, png_read_from_span);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->color_type = png_get_color_type(png, info);
  if (out->raw && out->bit_depth == 16 && out->color_type == PNG_COLOR_TYPE_GRAY) {
    const int passes = png_set_interlace_handling(png);
    png_read_update_info(png, info);
    row = static_cast<png_bytep>(std::malloc(png_get_rowbytes(png, info)));
    for (int pass = 0; pass < passes; ++pass) {
      for (png_uint_32 r = 0; r < out->height; ++r) {
        std::uint16_t* dst = out->raw + static_cast<std::size_t>(r) * out->width;
        if (passes > 1) {
          for (png_uint_32 c = 0; c < out->width; ++c) {
            row[2 * c] = static_cast<png_byte>(dst[c] >> 8);
            row[2 * c + 1] = static_cast<png_byte>(dst[c] & 0xFF);
          }
        }
        png_read_row(png, row, nullptr);
        for (png_uint_32 c = 0; c < out->width; ++c) {
          dst[c] = static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1]);
        }
      }
    }
    png_read_end(png, nullptr);
  }
  std::free(row);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png(Bytes* out, const std::uint16_t* raw, png_uint_32 width, png_uint_32 height) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  png_bytep row = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(row);
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_bytes, png_flush_noop);
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  row = static_cast<png_bytep>(std::malloc(static_cast<std::size_t>(width) * 2));
  for (png_uint_32 r = 0; r < height; ++r) {
    const std::uint16_t* src = raw + static_cast<std::size_t>(r) * width;
    for (png_uint_32 c = 0; c < width; ++c) {
      row[2 * c] = static_cast<png_byte>(src[c] >> 8);
      row[2 * c + 1] = static_cast<png_byte>(src[c] & 0xFF);
    }
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  std::free(row);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

DepthMap read_depth_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("depth PNG: missing PNG signature");
  }
  PngSource src{bytes};
  PngDecode header;
  if (!decode_png(&src, &header)) throw FormatError("depth PNG: corrupt header");
  if (header.bit_depth != 16 || header.color_type != PNG_COLOR_TYPE_GRAY) {
    throw FormatError("depth PNG: expected 16-bit single-channel gray, got bit depth " +
                      std::to_string(header.bit_depth) + ", color type " +
                      std::to_string(header.color_type));
  }
  std::vector<std::uint16_t> raw(static_cast<std::size_t>(header.width) * header.height, 0);
  PngSource again{bytes};
  PngDecode body;
  body.raw = raw.data();
  if (!decode_png(&again, &body)) throw FormatError("depth PNG: corrupt image data");

  DepthMap depth(header.height, header.width, 1);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    depth.data[i] = raw[i] == 0 ? std::numeric_limits<double>::quiet_NaN() : raw[i] / 256.0;
  }
  return depth;
}

Bytes write_depth_png(const DepthMap& depth) {
  if (depth.channels != 1) throw FormatError("depth PNG: expected a single-channel depth map");
  std::vector<std::uint16_t> raw(depth.data.size(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double d = depth.data[i];
    if (!is_valid_depth(d)) continue;
    const double r = std::round(d * 256.0);
    if (r > 65535.0) throw FormatError("depth PNG: " + std::to_string(d) + " m exceeds 16-bit range");
    raw[i] = static_cast<std::uint16_t>(std::max(r, 1.0));
  }
  Bytes out;
  if (!encode_png(&out, raw.data(), static_cast<png_uint_32>(depth.width),
                  static_cast<png_uint_32>(depth.height))) {
    throw FormatError("depth PNG: encoder failed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Label grids

LabelGrid read_label_grid(std::span<const std::uint8_t> label_bytes,
                          std::span<const std::uint8_t> invalid_bytes, VoxelIndex dims) {
  const std::size_t n = dims[0] * dims[1] * dims[2];
  const std::size_t label_len = 2 * n;
  const std::size_t invalid_len = (n + 7) / 8;
  if (label_bytes.size() != label_len || invalid_bytes.size() != invalid_len) {
    throw FormatError("label grid: expected " + std::to_string(label_len) + " label bytes and " +
                      std::to_string(invalid_len) + " invalid bytes, got " +
                      std::to_string(label_bytes.size()) + " and " +
                      std::to_string(invalid_bytes.size()));
  }
  LabelGrid grid(dims);
  for (std::size_t i = 0; i < n; ++i) {
    grid.labels[i] = static_cast<std::uint16_t>(label_bytes[2 * i] | (label_bytes[2 * i + 1] << 8));
    grid.invalid[i] = (invalid_bytes[i / 8] >> (7 - i % 8)) & 1U;
  }
  return grid;
}

LabelBytes write_label_grid(const LabelGrid& grid) {
  const std::size_t n = grid.size();
  if (grid.labels.size() != n || grid.invalid.size() != n) {
    throw FormatError("label grid: arrays do not match dims");
  }
  LabelBytes out{Bytes(2 * n), Bytes((n + 7) / 8, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[2 * i] = static_cast<std::uint8_t>(grid.labels[i] & 0xFF);
    out.labels[2 * i + 1] = static_cast<std::uint8_t>(grid.labels[i] >> 8);
    if (grid.invalid[i]) out.invalid[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PLY

std::string write_ply(const FeaturedPointCloud& cloud, std::size_t channel_limit) {
  cloud.validate();
  const std::size_t C = std::min(channel_limit, cloud.channels);
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n'
     << "property double x\nproperty double y\nproperty double z\n";
  for (std::size_t c = 0; c < C; ++c) os << "property float f" << c << '\n';
  os << "property int origin\nend_header\n";
  os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.positions[i];
    os << p.x() << ' ' << p.y() << ' ' << p.z();
    auto f = cloud.feature(i);
    for (std::size_t c = 0; c < C; ++c) os << ' ' << f[c];
    os << ' ' << cloud.origin[i] << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensors

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::kU8: return 1;
    case DType::kU16: return 2;
    case DType::kI32:
    case DType::kU32:
    case DType::kF32: return 4;
    case DType::kF64: return 8;
  }
  return 0;
}

const char* dtype_name(DType t) {
  switch (t) {
    case DType::kU8: return "u8";
    case DType::kU16: return "u16";
    case DType::kI32: return "i32";
    case DType::kU32: return "u32";
    case DType::kF32: return "f32";
    case DType::kF64: return "f64";
  }
  return "?";
}

DType dtype_from_name(std::string_view name) {
  for (DType t : {DType::kU8, DType::kU16, DType::kI32, DType::kU32, DType::kF32, DType::kF64}) {
    if (name == dtype_name(t)) return t;
  }
  throw FormatError("unknown tensor dtype '" + std::string(name) + "'");
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor read_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("tensor: shorter than the 8-byte header length");
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data(), 8);
  if (header_len > bytes.size() - 8) {
    throw FormatError("tensor: header length " + std::to_string(header_len) + " exceeds file size");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor: bad JSON header: ") + e.what());
  }
  Tensor t;
  try {
    t.dims = header.at("dims").get<std::vector<std::size_t>>();
    t.dtype = dtype_from_name(header.at("dtype").get<std::string>());
    t.axes = header.at("axes").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor: header field: ") + e.what());
  }
  if (!t.axes.empty() && t.axes.size() != t.dims.size()) {
    throw FormatError("tensor: axis order '" + t.axes + "' does not match " +
                      std::to_string(t.dims.size()) + " dims");
  }
  const std::size_t expected = t.element_count() * dtype_size(t.dtype);
  const std::size_t actual = bytes.size() - 8 - header_len;
  if (expected != actual) {
    throw FormatError("tensor: dims require " + std::to_string(expected) + " payload bytes, found " +
                      std::to_string(actual));
  }
  t.payload.assign(bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len), bytes.end());
  return t;
}

Bytes write_tensor(const Tensor& tensor) {
  if (tensor.payload.size() != tensor.element_count() * dtype_size(tensor.dtype)) {
    throw FormatError("tensor: payload does not match dims");
  }
  nlohmann::json header = {
      {"dims", tensor.dims}, {"dtype", dtype_name(tensor.dtype)}, {"axes", tensor.axes}};
  const std::string h = header.dump();
  const std::uint64_t len = h.size();
  Bytes out(8 + h.size() + tensor.payload.size());
  std::memcpy(out.data(), &len, 8);
  std::memcpy(out.data() + 8, h.data(), h.size());
  std::memcpy(out.data() + 8 + h.size(), tensor.payload.data(), tensor.payload.size());
  return out;
}

Tensor to_tensor(const FeatureMap& plane) {
  return Tensor::from<float>({plane.height, plane.width, plane.channels}, "HWC", plane.data);
}

Tensor to_tensor(const DepthMap& plane) {
  return Tensor::from<double>({plane.height, plane.width, plane.channels}, "HWC", plane.data);
}

namespace {

void require_hwc(const Tensor& t) {
  if (t.dims.size() == 3 && t.axes == "HWC") return;
  if (t.dims.size() == 2 && t.axes == "HW") return;
  throw FormatError("tensor: expected HWC or HW axis order, got '" + t.axes + "'");
}

template <typename T>
Plane2D<T> plane_from_tensor(const Tensor& t) {
  require_hwc(t);
  Plane2D<T> p;
  p.height = t.dims[0];
  p.width = t.dims[1];
  p.channels = t.dims.size() == 3 ? t.dims[2] : 1;
  if (t.dtype == dtype_of<T>()) {
    p.data = t.values<T>();
  } else if (t.dtype == DType::kF32) {
    auto v = t.values<float>();
    p.data.assign(v.begin(), v.end());
  } else if (t.dtype == DType::kF64) {
    auto v = t.values<double>();
    p.data.assign(v.begin(), v.end());
  } else {
    throw FormatError(std::string("tensor: expected a float dtype, got ") + dtype_name(t.dtype));
  }
  return p;
}

}  // namespace

FeatureMap feature_map_from_tensor(const Tensor& t) { return plane_from_tensor<float>(t); }
DepthMap depth_map_from_tensor(const Tensor& t) { return plane_from_tensor<double>(t); }

// ---------------------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text_file(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace ptf

namespace ptf {

namespace {

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  const Bytes b = write_tensor(t);
  write_file(path, b);
}

Tensor load_tensor(const std::filesystem::path& path) { return read_tensor(read_file(path)); }

}  // namespace

void save_cloud(const std::filesystem::path& dir, const FeaturedPointCloud& cloud) {
  cloud.validate();
  std::filesystem::create_directories(dir);
  const std::size_t n = cloud.size();
  std::vector<double> pos(3 * n);
  std::vector<double> px(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) pos[3 * i + static_cast<std::size_t>(a)] = cloud.positions[i][a];
    px[2 * i] = cloud.source_pixel[i].x();
    px[2 * i + 1] = cloud.source_pixel[i].y();
  }
  save_tensor(dir / "positions.tensor", Tensor::from<double>({n, 3}, "NC", pos));
  save_tensor(dir / "features.tensor", Tensor::from<float>({n, cloud.channels}, "NC", cloud.features));
  save_tensor(dir / "origin.tensor", Tensor::from<std::int32_t>({n}, "N", cloud.origin));
  save_tensor(dir / "source_pixel.tensor", Tensor::from<double>({n, 2}, "NC", px));
}

FeaturedPointCloud load_cloud(const std::filesystem::path& dir) {
  const Tensor pos = load_tensor(dir / "positions.tensor");
  const Tensor feat = load_tensor(dir / "features.tensor");
  const Tensor org = load_tensor(dir / "origin.tensor");
  const Tensor px = load_tensor(dir / "source_pixel.tensor");
  if (pos.dims.size() != 2 || pos.dims[1] != 3 || feat.dims.size() != 2 || org.dims.size() != 1 ||
      px.dims.size() != 2 || px.dims[1] != 2) {
    throw FormatError("cloud: unexpected tensor shapes in " + dir.string());
  }
  const std::size_t n = pos.dims[0];
  FeaturedPointCloud cloud;
  cloud.channels = feat.dims[1];
  const auto p = pos.values<double>();
  const auto s = px.values<double>();
  cloud.positions.resize(n);
  cloud.source_pixel.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.positions[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
    cloud.source_pixel[i] = {s[2 * i], s[2 * i + 1]};
  }
  cloud.features = feat.values<float>();
  cloud.origin = org.values<std::int32_t>();
  try {
    cloud.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("cloud: " + std::string(e.what()));
  }
  return cloud;
}

void save_grid(const std::filesystem::path& dir, const FeatureVoxelGrid& grid) {
  std::filesystem::create_directories(dir);
  const auto& r = grid.bounds.resolution;
  save_tensor(dir / "grid_features.tensor",
              Tensor::from<float>({r[0], r[1], r[2], grid.features.channels}, "XYZC", grid.features.data));
  save_tensor(dir / "grid_counts.tensor", Tensor::from<std::uint32_t>({r[0], r[1], r[2]}, "XYZ", grid.counts));
  const OccupancyMasks m = occupancy_masks(grid);
  save_tensor(dir / "cross_mask.tensor", Tensor::from<std::uint8_t>({r[0], r[1], r[2]}, "XYZ", m.cross));
  save_tensor(dir / "self_mask.tensor", Tensor::from<std::uint8_t>({r[0], r[1], r[2]}, "XYZ", m.self));
}

}  // namespace ptf
