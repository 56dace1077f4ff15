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


#ifndef IAM_INTERP_HPP_
#define IAM_INTERP_HPP_

#include <cstddef>

#include "iam/image.hpp"

namespace iam {

// Ratio of output to input size along each axis. Values below 1 downsample.
class InterpFactor {
 public:
  explicit InterpFactor(double value);
  double value() const { return value_; }
  InterpFactor reciprocal() const { return InterpFactor(1.0 / value_); }

 private:
  double value_;
};

// round(size * factor), never less than 1.
std::size_t resampled_extent(std::size_t size, InterpFactor factor);
Shape resampled_shape(const Shape& in, InterpFactor factor);

// Bilinear resampling with align-corners coordinates: output sample o maps to
// source coordinate o * (in - 1) / (out - 1), so the four corner pixels of the
// output coincide with the input corners. Each output is a convex
// combination of at most four inputs.
ImageTensor resample(const ImageTensor& img, InterpFactor factor);
ImageTensor resample_to(const ImageTensor& img, std::size_t out_height,
                        std::size_t out_width);

// Exact transpose of resample / resample_to, computed by scattering each
// output cotangent back with the same weights the forward pass gathered with.
ImageTensor resample_adjoint(const ImageTensor& grad_out, InterpFactor factor,
                             const Shape& in_shape);
ImageTensor resample_to_adjoint(const ImageTensor& grad_out,
                                const Shape& in_shape);

}  // namespace iam

#endif  // IAM_INTERP_HPP_
