/* Copyright 2026 The IAM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include "iam/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "iam/errors.hpp"

namespace iam::jpeg {

const QuantTable kBaseLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

const QuantTable kBaseChromaTable = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

namespace {

constexpr std::size_t kBlock = 8;

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr Mat3 kRgbToYcc = {{{0.299, 0.587, 0.114},
                             {-0.168735892, -0.331264108, 0.5},
                             {0.5, -0.418687589, -0.081312411}}};

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

const Mat3& ycc_to_rgb_matrix() {
  static const Mat3 inv = invert(kRgbToYcc);
  return inv;
}

Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

// Applies out[c] = sum_k m[c][k] * (in[k] + in_offset[k]) + out_offset[c].
ImageTensor mix_channels(const ImageTensor& in, const Mat3& m,
                         const std::array<double, 3>& in_offset,
                         const std::array<double, 3>& out_offset) {
  ImageTensor out(in.shape());
  const std::size_t n = in.height() * in.width();
  const auto p0 = in.plane(0), p1 = in.plane(1), p2 = in.plane(2);
  for (std::size_t c = 0; c < 3; ++c) {
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = m[c][0] * (p0[i] + in_offset[0]) + m[c][1] * (p1[i] + in_offset[1]) +
               m[c][2] * (p2[i] + in_offset[2]) + out_offset[c];
    }
  }
  return out;
}

const std::array<double, 64>& dct_matrix() {
  static const std::array<double, 64> m = [] {
    std::array<double, 64> a{};
    for (std::size_t k = 0; k < kBlock; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (std::size_t n = 0; n < kBlock; ++n) {
        a[k * kBlock + n] =
            scale * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * kBlock));
      }
    }
    return a;
  }();
  return m;
}

// out = A * X * A^T when forward, A^T * X * A when inverse.
DctBlock transform8(const DctBlock& x, bool inverse) {
  const auto& a = dct_matrix();
  auto coef = [&](std::size_t i, std::size_t j) {
    return inverse ? a[j * kBlock + i] : a[i * kBlock + j];
  };
  DctBlock tmp{};
  for (std::size_t i = 0; i < kBlock; ++i)
    for (std::size_t j = 0; j < kBlock; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kBlock; ++k) acc += coef(i, k) * x[k * kBlock + j];
      tmp[i * kBlock + j] = acc;
    }
  DctBlock out{};
  for (std::size_t i = 0; i < kBlock; ++i)
    for (std::size_t j = 0; j < kBlock; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kBlock; ++k) acc += tmp[i * kBlock + k] * coef(j, k);
      out[i * kBlock + j] = acc;
    }
  return out;
}

std::size_t round_up8(std::size_t n) { return (n + kBlock - 1) / kBlock * kBlock; }

ImageTensor pad_edge(const ImageTensor& img, std::size_t ph, std::size_t pw) {
  ImageTensor out(Shape{img.channels(), ph, pw});
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < ph; ++y)
      for (std::size_t x = 0; x < pw; ++x)
        out.at(c, y, x) = img.at(c, std::min(y, img.height() - 1),
                                 std::min(x, img.width() - 1));
  return out;
}

ImageTensor pad_edge_adjoint(const ImageTensor& padded, const Shape& shape) {
  ImageTensor out(shape);
  for (std::size_t c = 0; c < shape.channels; ++c)
    for (std::size_t y = 0; y < padded.height(); ++y)
      for (std::size_t x = 0; x < padded.width(); ++x)
        out.at(c, std::min(y, shape.height - 1), std::min(x, shape.width - 1)) +=
            padded.at(c, y, x);
  return out;
}

ImageTensor crop(const ImageTensor& img, std::size_t h, std::size_t w) {
  ImageTensor out(Shape{img.channels(), h, w});
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y, x);
  return out;
}

ImageTensor crop_adjoint(const ImageTensor& g, std::size_t ph, std::size_t pw) {
  ImageTensor out(Shape{g.channels(), ph, pw});
  for (std::size_t c = 0; c < g.channels(); ++c)
    for (std::size_t y = 0; y < g.height(); ++y)
      for (std::size_t x = 0; x < g.width(); ++x) out.at(c, y, x) = g.at(c, y, x);
  return out;
}

const QuantTable& table_for_channel(const JpegProfile& p, std::size_t c) {
  return c == 0 ? p.luma : p.chroma;
}

// Runs `fn(channel, block_y, block_x, block)` over every 8x8 block, writing
// the returned block back in place.
template <typename Fn>
void for_each_block(ImageTensor& img, Fn&& fn) {
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t by = 0; by < img.height(); by += kBlock)
      for (std::size_t bx = 0; bx < img.width(); bx += kBlock) {
        DctBlock block{};
        for (std::size_t i = 0; i < kBlock; ++i)
          for (std::size_t j = 0; j < kBlock; ++j)
            block[i * kBlock + j] = img.at(c, by + i, bx + j);
        block = fn(c, by, bx, block);
        for (std::size_t i = 0; i < kBlock; ++i)
          for (std::size_t j = 0; j < kBlock; ++j)
            img.at(c, by + i, bx + j) = block[i * kBlock + j];
      }
}

void require_rgb(const ImageTensor& img, const char* what) {
  if (img.channels() != 3 || img.empty()) {
    throw StructuralError(std::string(what) + ": requires a nonempty 3-channel image, got " +
                          to_string(img.shape()));
  }
}

}  // namespace

JpegProfile tables_for_qf(int qf) {
  if (qf < 1 || qf > 100) {
    throw ArgumentError("quality factor must be in [1, 100], got " + std::to_string(qf));
  }
  const int scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
  JpegProfile profile;
  profile.quality_factor = qf;
  auto scaled = [scale](const QuantTable& base) {
    QuantTable t{};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const long v = (static_cast<long>(base[i]) * scale + 50) / 100;
      t[i] = static_cast<std::uint16_t>(std::clamp(v, 1L, 255L));
    }
    return t;
  };
  profile.luma = scaled(kBaseLumaTable);
  profile.chroma = scaled(kBaseChromaTable);
  return profile;
}

DctBlock forward_dct8(const DctBlock& block) { return transform8(block, false); }
DctBlock inverse_dct8(const DctBlock& coeffs) { return transform8(coeffs, true); }

ImageTensor rgb_to_centered_ycc(const ImageTensor& rgb) {
  require_rgb(rgb, "rgb_to_centered_ycc");
  return mix_channels(rgb, kRgbToYcc, {0.0, 0.0, 0.0}, {-128.0, 0.0, 0.0});
}

ImageTensor centered_ycc_to_rgb(const ImageTensor& ycc) {
  require_rgb(ycc, "centered_ycc_to_rgb");
  return mix_channels(ycc, ycc_to_rgb_matrix(), {128.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
}

ImageTensor jpeg_roundtrip(const ImageTensor& img, const JpegProfile& profile) {
  require_rgb(img, "jpeg_roundtrip");
  ImageTensor ycc = pad_edge(rgb_to_centered_ycc(img), round_up8(img.height()),
                             round_up8(img.width()));
  for_each_block(ycc, [&](std::size_t c, std::size_t, std::size_t, const DctBlock& b) {
    const QuantTable& q = table_for_channel(profile, c);
    DctBlock coeffs = forward_dct8(b);
    for (std::size_t k = 0; k < 64; ++k) coeffs[k] = std::round(coeffs[k] / q[k]) * q[k];
    return inverse_dct8(coeffs);
  });
  return clamp_pixels(centered_ycc_to_rgb(crop(ycc, img.height(), img.width())), 0.0, 255.0);
}

double smooth_round(double t) {
  const double r = std::round(t);
  const double d = t - r;
  return r + d * d * d;
}

double smooth_round_slope(double t) {
  const double d = t - std::round(t);
  return 3.0 * d * d;
}

SmoothJpeg::SmoothJpeg(const ImageTensor& img, const JpegProfile& profile)
    : shape_(img.shape()),
      padded_height_(round_up8(img.height())),
      padded_width_(round_up8(img.width())) {
  require_rgb(img, "jpeg_differentiable");
  ImageTensor ycc = pad_edge(rgb_to_centered_ycc(img), padded_height_, padded_width_);
  slopes_.assign(ycc.size(), 0.0);
  for_each_block(ycc, [&](std::size_t c, std::size_t by, std::size_t bx,
                          const DctBlock& b) {
    const QuantTable& q = table_for_channel(profile, c);
    DctBlock coeffs = forward_dct8(b);
    for (std::size_t k = 0; k < 64; ++k) {
      const double t = coeffs[k] / q[k];
      const std::size_t idx = (c * padded_height_ + by + k / kBlock) * padded_width_ +
                              bx + k % kBlock;
      slopes_[idx] = smooth_round_slope(t);
      coeffs[k] = smooth_round(t) * q[k];
    }
    return inverse_dct8(coeffs);
  });
  ImageTensor rgb = centered_ycc_to_rgb(crop(ycc, shape_.height, shape_.width));
  pass_mask_.resize(rgb.size());
  auto v = rgb.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    pass_mask_[i] = v[i] >= 0.0 && v[i] <= 255.0;
    v[i] = std::clamp(v[i], 0.0, 255.0);
  }
  output_ = std::move(rgb);
}

ImageTensor SmoothJpeg::pullback(const ImageTensor& cotangent) const {
  if (cotangent.shape() != shape_) {
    throw StructuralError("SmoothJpeg::pullback: cotangent shape " +
                          to_string(cotangent.shape()) + " != " + to_string(shape_));
  }
  ImageTensor g = cotangent;
  auto gv = g.values();
  for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= pass_mask_[i];
  // Adjoint of the inverse color transform (offsets drop out).
  g = mix_channels(g, transpose(ycc_to_rgb_matrix()), {0, 0, 0}, {0, 0, 0});
  g = crop_adjoint(g, padded_height_, padded_width_);
  // Blockwise: adjoint(IDCT) = DCT, then the diagonal surrogate slope
  // (q * r'(t) * 1/q), then adjoint(DCT) = IDCT.
  for_each_block(g, [&](std::size_t c, std::size_t by, std::size_t bx, const DctBlock& b) {
    DctBlock coeffs = forward_dct8(b);
    for (std::size_t k = 0; k < 64; ++k) {
      coeffs[k] *= slopes_[(c * padded_height_ + by + k / kBlock) * padded_width_ + bx +
                           k % kBlock];
    }
    return inverse_dct8(coeffs);
  });
  g = pad_edge_adjoint(g, shape_);
  return mix_channels(g, transpose(kRgbToYcc), {0, 0, 0}, {0, 0, 0});
}

}  // namespace iam::jpeg
