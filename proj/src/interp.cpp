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


#include "iam/interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "iam/errors.hpp"

namespace iam {

namespace {

// Two-tap weights for one output coordinate along one axis.
struct Tap {
  std::size_t lo;
  std::size_t hi;
  double w_hi;  // weight of `hi`; `lo` gets 1 - w_hi
};

std::vector<Tap> axis_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale =
      out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  for (std::size_t o = 0; o < out; ++o) {
    const double src =
        std::clamp(static_cast<double>(o) * scale, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[o] = {lo, hi, hi == lo ? 0.0 : src - static_cast<double>(lo)};
  }
  return taps;
}

void check_target(std::size_t out_height, std::size_t out_width) {
  if (out_height == 0 || out_width == 0) {
    throw StructuralError("resample: degenerate output size " +
                          std::to_string(out_height) + "x" +
                          std::to_string(out_width));
  }
}

}  // namespace

InterpFactor::InterpFactor(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ArgumentError("interpolation factor must be positive and finite");
  }
}

std::size_t resampled_extent(std::size_t size, InterpFactor factor) {
  const double scaled = std::round(static_cast<double>(size) * factor.value());
  return std::max<std::size_t>(1, static_cast<std::size_t>(scaled));
}

Shape resampled_shape(const Shape& in, InterpFactor factor) {
  return {in.channels, resampled_extent(in.height, factor),
          resampled_extent(in.width, factor)};
}

ImageTensor resample_to(const ImageTensor& img, std::size_t out_height,
                        std::size_t out_width) {
  if (img.empty()) throw StructuralError("resample: empty input");
  check_target(out_height, out_width);
  const auto rows = axis_taps(img.height(), out_height);
  const auto cols = axis_taps(img.width(), out_width);
  ImageTensor out(Shape{img.channels(), out_height, out_width});
  for (std::size_t c = 0; c < img.channels(); ++c) {
    for (std::size_t y = 0; y < out_height; ++y) {
      const Tap& r = rows[y];
      for (std::size_t x = 0; x < out_width; ++x) {
        const Tap& k = cols[x];
        const double top =
            (1.0 - k.w_hi) * img.at(c, r.lo, k.lo) + k.w_hi * img.at(c, r.lo, k.hi);
        const double bottom =
            (1.0 - k.w_hi) * img.at(c, r.hi, k.lo) + k.w_hi * img.at(c, r.hi, k.hi);
        out.at(c, y, x) = (1.0 - r.w_hi) * top + r.w_hi * bottom;
      }
    }
  }
  return out;
}

ImageTensor resample(const ImageTensor& img, InterpFactor factor) {
  if (img.empty()) throw StructuralError("resample: empty input");
  const Shape s = resampled_shape(img.shape(), factor);
  return resample_to(img, s.height, s.width);
}

ImageTensor resample_to_adjoint(const ImageTensor& grad_out,
                                const Shape& in_shape) {
  if (in_shape.size() == 0) throw StructuralError("resample_adjoint: empty input shape");
  if (grad_out.channels() != in_shape.channels || grad_out.empty()) {
    throw StructuralError("resample_adjoint: cotangent " +
                          to_string(grad_out.shape()) +
                          " incompatible with input " + to_string(in_shape));
  }
  const auto rows = axis_taps(in_shape.height, grad_out.height());
  const auto cols = axis_taps(in_shape.width, grad_out.width());
  ImageTensor grad_in(in_shape);
  for (std::size_t c = 0; c < in_shape.channels; ++c) {
    for (std::size_t y = 0; y < grad_out.height(); ++y) {
      const Tap& r = rows[y];
      for (std::size_t x = 0; x < grad_out.width(); ++x) {
        const Tap& k = cols[x];
        const double g = grad_out.at(c, y, x);
        const double top = (1.0 - r.w_hi) * g;
        const double bottom = r.w_hi * g;
        grad_in.at(c, r.lo, k.lo) += (1.0 - k.w_hi) * top;
        grad_in.at(c, r.lo, k.hi) += k.w_hi * top;
        grad_in.at(c, r.hi, k.lo) += (1.0 - k.w_hi) * bottom;
        grad_in.at(c, r.hi, k.hi) += k.w_hi * bottom;
      }
    }
  }
  return grad_in;
}

ImageTensor resample_adjoint(const ImageTensor& grad_out, InterpFactor factor,
                             const Shape& in_shape) {
  const Shape expected = resampled_shape(in_shape, factor);
  if (grad_out.shape() != expected) {
    throw StructuralError("resample_adjoint: cotangent shape " +
                          to_string(grad_out.shape()) + " != forward output " +
                          to_string(expected));
  }
  return resample_to_adjoint(grad_out, in_shape);
}

}  // namespace iam
