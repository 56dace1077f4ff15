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


#ifndef IAM_JPEG_HPP_
#define IAM_JPEG_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "iam/image.hpp"

namespace iam::jpeg {

using QuantTable = std::array<std::uint16_t, 64>;  // row-major, [0] = DC

// Annex K example tables at quality 50.
extern const QuantTable kBaseLumaTable;
extern const QuantTable kBaseChromaTable;

struct JpegProfile {
  int quality_factor = 0;
  QuantTable luma{};
  QuantTable chroma{};
};

// IJG quality scaling: S = 5000 / qf below 50, 200 - 2 qf otherwise, entries
// clamp(floor((base * S + 50) / 100), 1, 255).
JpegProfile tables_for_qf(int qf);

using DctBlock = std::array<double, 64>;

// Orthonormal 8x8 DCT-II and its inverse.
DctBlock forward_dct8(const DctBlock& block);
DctBlock inverse_dct8(const DctBlock& coeffs);

// Full-range BT.601; chroma is returned centered (Cb - 128, Cr - 128) and
// luma is level-shifted by -128, which is what the block DCT consumes.
ImageTensor rgb_to_centered_ycc(const ImageTensor& rgb);
ImageTensor centered_ycc_to_rgb(const ImageTensor& ycc);

// Lossy round trip through the quantizer: color transform, edge-replicated
// padding to a multiple of 8, per-block DCT, divide by table, round half away
// from zero, multiply back, inverse DCT, inverse color, clamp to [0, 255].
// 4:4:4 sampling, no entropy coding.
ImageTensor jpeg_roundtrip(const ImageTensor& img, const JpegProfile& profile);

// Smooth rounding surrogate r(t) = round(t) + (t - round(t))^3 and its slope.
double smooth_round(double t);
double smooth_round_slope(double t);

// Same pipeline as jpeg_roundtrip with rounding replaced by smooth_round.
// Holds what the pullback needs; pullback() applies the exact transpose of the
// pipeline's Jacobian at the evaluation point.
class SmoothJpeg {
 public:
  SmoothJpeg(const ImageTensor& img, const JpegProfile& profile);

  const ImageTensor& output() const { return output_; }
  ImageTensor pullback(const ImageTensor& cotangent) const;

 private:
  Shape shape_;
  std::size_t padded_height_;
  std::size_t padded_width_;
  ImageTensor output_;
  // Per padded YCbCr sample: slope of the surrogate at the scaled coefficient.
  std::vector<double> slopes_;
  // 1 where the final clamp was inactive.
  std::vector<std::uint8_t> pass_mask_;
};

}  // namespace iam::jpeg

#endif  // IAM_JPEG_HPP_
