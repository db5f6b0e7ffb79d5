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

#include "ptf/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ptf {

namespace detail {

std::vector<Tap> half_pixel_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    Tap& t = taps[d];
    t.lo = static_cast<std::size_t>(src);
    if (t.lo >= in - 1) {
      t.lo = t.hi = in - 1;
      t.w_hi = 0.0;
    } else {
      t.hi = t.lo + 1;
      t.w_hi = src - static_cast<double>(t.lo);
    }
    t.w_lo = 1.0 - t.w_hi;
  }
  return taps;
}

}  // namespace detail

namespace {

// Zero-weight taps are skipped so that NaN neighbours do not leak in.
inline double blend(double a, double wa, double b, double wb) {
  if (wb == 0.0) return wa * a;
  if (wa == 0.0) return wb * b;
  return wa * a + wb * b;
}

}  // namespace

template <typename T>
Plane2D<T> bilinear_resize(const Plane2D<T>& src, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw std::invalid_argument("bilinear_resize: output dimensions must be >= 1");
  }
  if (src.height == 0 || src.width == 0) {
    throw std::invalid_argument("bilinear_resize: empty source plane");
  }
  if (out_h == src.height && out_w == src.width) return src;

  const auto ty = detail::half_pixel_taps(src.height, out_h);
  const auto tx = detail::half_pixel_taps(src.width, out_w);
  const std::size_t C = src.channels;
  Plane2D<T> dst(out_h, out_w, C);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(out_h); ++r) {
    const auto& y = ty[static_cast<std::size_t>(r)];
    const T* row0 = src.data.data() + y.lo * src.width * C;
    const T* row1 = src.data.data() + y.hi * src.width * C;
    T* out = dst.data.data() + static_cast<std::size_t>(r) * out_w * C;
    for (std::size_t c = 0; c < out_w; ++c) {
      const auto& x = tx[c];
      for (std::size_t ch = 0; ch < C; ++ch) {
        const double top = blend(row0[x.lo * C + ch], x.w_lo, row0[x.hi * C + ch], x.w_hi);
        const double bot = blend(row1[x.lo * C + ch], x.w_lo, row1[x.hi * C + ch], x.w_hi);
        out[c * C + ch] = static_cast<T>(blend(top, y.w_lo, bot, y.w_hi));
      }
    }
  }
  return dst;
}

template <typename T>
Volume3D<T> trilinear_resize(const Volume3D<T>& src, std::array<std::size_t, 3> out_dims) {
  for (auto d : out_dims) {
    if (d == 0) throw std::invalid_argument("trilinear_resize: output dimensions must be >= 1");
  }
  for (auto d : src.dims) {
    if (d == 0) throw std::invalid_argument("trilinear_resize: empty source volume");
  }
  if (out_dims == src.dims) return src;

  const auto tx = detail::half_pixel_taps(src.dims[0], out_dims[0]);
  const auto ty = detail::half_pixel_taps(src.dims[1], out_dims[1]);
  const auto tz = detail::half_pixel_taps(src.dims[2], out_dims[2]);
  const std::size_t C = src.channels;
  Volume3D<T> dst(out_dims, C);

  auto sample = [&](std::size_t x, std::size_t y, std::size_t z, std::size_t ch) -> double {
    return static_cast<double>(src.data[src.voxel_index(x, y, z) * C + ch]);
  };

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out_dims[0]); ++i) {
    const auto& a = tx[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < out_dims[1]; ++j) {
      const auto& b = ty[j];
      for (std::size_t k = 0; k < out_dims[2]; ++k) {
        const auto& c = tz[k];
        T* out = dst.data.data() + dst.voxel_index(static_cast<std::size_t>(i), j, k) * C;
        for (std::size_t ch = 0; ch < C; ++ch) {
          auto along_z = [&](std::size_t x, std::size_t y) {
            return blend(sample(x, y, c.lo, ch), c.w_lo, sample(x, y, c.hi, ch), c.w_hi);
          };
          const double y0 = blend(along_z(a.lo, b.lo), b.w_lo, along_z(a.lo, b.hi), b.w_hi);
          const double y1 = blend(along_z(a.hi, b.lo), b.w_lo, along_z(a.hi, b.hi), b.w_hi);
          out[ch] = static_cast<T>(blend(y0, a.w_lo, y1, a.w_hi));
        }
      }
    }
  }
  return dst;
}

Plane2D<double> minmax_normalize(const Plane2D<double>& src, ValidRule rule) {
  if (src.channels != 1) throw std::invalid_argument("minmax_normalize: expected a single channel");
  auto valid = [rule](double v) {
    return std::isfinite(v) && (rule == ValidRule::kFinite || v > 0.0);
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t n_valid = 0;
  for (double v : src.data) {
    if (!valid(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++n_valid;
  }
  if (n_valid == 0) throw std::invalid_argument("minmax_normalize: no valid element");

  Plane2D<double> out(src.height, src.width, 1);
  const double span = hi - lo;
  for (std::size_t i = 0; i < src.data.size(); ++i) {
    const double v = src.data[i];
    if (!valid(v)) {
      out.data[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      out.data[i] = span > 0.0 ? (v - lo) / span : 0.0;
    }
  }
  return out;
}

template Plane2D<float> bilinear_resize(const Plane2D<float>&, std::size_t, std::size_t);
template Plane2D<double> bilinear_resize(const Plane2D<double>&, std::size_t, std::size_t);
template Volume3D<float> trilinear_resize(const Volume3D<float>&, std::array<std::size_t, 3>);
template Volume3D<double> trilinear_resize(const Volume3D<double>&, std::array<std::size_t, 3>);

}  // namespace ptf
