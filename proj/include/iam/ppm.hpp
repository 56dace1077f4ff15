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


#ifndef IAM_PPM_HPP_
#define IAM_PPM_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "iam/image.hpp"

namespace iam {

// Binary PPM (P6), 8-bit, RGB order. Values are rounded to the nearest
// integer and clamped to [0, 255] on export.
ImageTensor read_ppm(const std::filesystem::path& path);
void write_ppm(const ImageTensor& img, const std::filesystem::path& path);

ImageTensor decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const ImageTensor& img);

// Binary PGM (P5) of a single-channel image.
void write_pgm(const ImageTensor& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const ImageTensor& img);

}  // namespace iam

#endif  // IAM_PPM_HPP_
