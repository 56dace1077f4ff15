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


#include "iam/image.hpp"

#include <algorithm>
#include <cmath>

#include "iam/errors.hpp"

namespace iam {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.channels) + "x" + std::to_string(shape.height) +
         "x" + std::to_string(shape.width);
}

ImageTensor::ImageTensor(Shape shape, double fill)
    : shape_(shape), data_(shape.size(), fill) {}

ImageTensor::ImageTensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw StructuralError("image data length " + std::to_string(data_.size()) +
                          " does not match shape " + to_string(shape_));
  }
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b,
                        const char* context) {
  if (a.shape() != b.shape()) {
    throw StructuralError(std::string(context) + ": shape mismatch " +
                          to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

ImageTensor clamp_pixels(const ImageTensor& img, double lo, double hi) {
  if (!(lo < hi)) throw ArgumentError("clamp_pixels: requires lo < hi");
  ImageTensor out = img;
  for (double& v : out.values()) v = std::clamp(v, lo, hi);
  return out;
}

ImageTensor linf_project(const ImageTensor& img, const ImageTensor& anchor,
                         double eps) {
  require_same_shape(img, anchor, "linf_project");
  if (!(eps >= 0.0)) throw ArgumentError("linf_project: eps must be >= 0");
  ImageTensor out = img;
  auto dst = out.values();
  auto ref = anchor.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double banded = std::clamp(dst[i], ref[i] - eps, ref[i] + eps);
    dst[i] = std::clamp(banded, 0.0, 255.0);
  }
  return out;
}

double linf_distance(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "linf_distance");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    worst = std::max(worst, std::abs(av[i] - bv[i]));
  }
  return worst;
}

double mean_squared_error(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "mean_squared_error");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  return acc / static_cast<double>(av.size());
}

double dot(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return acc;
}

ImageTensor subtract(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "subtract");
  ImageTensor out = a;
  auto dst = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= bv[i];
  return out;
}

bool all_finite(const ImageTensor& img) {
  return std::all_of(img.values().begin(), img.values().end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace iam
