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


#include "iam/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "iam/errors.hpp"

namespace iam {

namespace {

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, std::size_t start)
      : bytes_(bytes), pos_(start) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1u << 24) {
        throw ParseError(std::string("PPM ") + field + " too large", start);
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw ParseError(std::string("PPM header: expected ") + field, pos_);
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ParseError("PPM header: missing whitespace before raster", pos_);
    }
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void append_header(std::vector<std::uint8_t>& out, const char* magic,
                   const Shape& s) {
  const std::string header = std::string(magic) + "\n" +
                             std::to_string(s.width) + " " +
                             std::to_string(s.height) + "\n255\n";
  out.insert(out.end(), header.begin(), header.end());
}

}  // namespace

ImageTensor decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw ParseError("not a binary PPM (expected magic P6)", 0);
  }
  HeaderReader header(bytes, 2);
  const std::size_t width = header.read_uint("width");
  const std::size_t height = header.read_uint("height");
  if (width == 0 || height == 0) {
    throw ParseError("PPM has zero dimension", header.pos());
  }
  const std::size_t maxval = header.read_uint("maxval");
  if (maxval != 255) {
    throw UnsupportedFormatError("PPM maxval " + std::to_string(maxval) +
                                 " unsupported; only 8-bit (255) is read");
  }
  header.expect_single_space();
  const std::size_t raster = header.pos();
  const std::size_t need = width * height * 3;
  if (bytes.size() - raster < need) {
    throw ParseError("PPM raster truncated: need " + std::to_string(need) +
                         " bytes, have " + std::to_string(bytes.size() - raster),
                     bytes.size());
  }
  ImageTensor img(Shape{3, height, width});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t base = raster + (y * width + x) * 3;
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = bytes[base + c];
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const ImageTensor& img) {
  if (img.channels() != 3) {
    throw StructuralError("write_ppm: requires 3 channels, got " +
                          std::to_string(img.channels()));
  }
  std::vector<std::uint8_t> out;
  append_header(out, "P6", img.shape());
  out.reserve(out.size() + img.size());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.push_back(to_byte(img.at(c, y, x)));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_pgm(const ImageTensor& img) {
  if (img.channels() != 1) {
    throw StructuralError("write_pgm: requires 1 channel, got " +
                          std::to_string(img.channels()));
  }
  std::vector<std::uint8_t> out;
  append_header(out, "P5", img.shape());
  for (double v : img.values()) out.push_back(to_byte(v));
  return out;
}

ImageTensor read_ppm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_ppm(bytes);
}

void write_ppm(const ImageTensor& img, const std::filesystem::path& path) {
  write_file(path, encode_ppm(img));
}

void write_pgm(const ImageTensor& img, const std::filesystem::path& path) {
  write_file(path, encode_pgm(img));
}

}  // namespace iam
