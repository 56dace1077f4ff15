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


#ifndef IAM_IMAGE_HPP_
#define IAM_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace iam {

struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return channels * height * width; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

// Planar image, channel-major then row-major. Pixel scale is 0..255 in real
// values; nothing quantizes to integers except file export.
class ImageTensor {
 public:
  ImageTensor() = default;
  explicit ImageTensor(Shape shape, double fill = 0.0);
  ImageTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }

  std::span<double> plane(std::size_t c) {
    return {data_.data() + c * shape_.height * shape_.width,
            shape_.height * shape_.width};
  }
  std::span<const double> plane(std::size_t c) const {
    return {data_.data() + c * shape_.height * shape_.width,
            shape_.height * shape_.width};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const ImageTensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

void require_same_shape(const ImageTensor& a, const ImageTensor& b,
                        const char* context);

// Elementwise clamp into [lo, hi]. Throws ArgumentError unless lo < hi.
ImageTensor clamp_pixels(const ImageTensor& img, double lo, double hi);

// Projects onto the L-infinity ball of radius eps around anchor, then onto
// the valid pixel range [0, 255].
ImageTensor linf_project(const ImageTensor& img, const ImageTensor& anchor,
                         double eps);

double linf_distance(const ImageTensor& a, const ImageTensor& b);
double mean_squared_error(const ImageTensor& a, const ImageTensor& b);
double dot(const ImageTensor& a, const ImageTensor& b);

ImageTensor subtract(const ImageTensor& a, const ImageTensor& b);

bool all_finite(const ImageTensor& img);

}  // namespace iam

#endif  // IAM_IMAGE_HPP_
