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


#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iam/errors.hpp"
#include "iam/image.hpp"
#include "iam/ppm.hpp"
#include "iam/rng.hpp"

namespace iam {
namespace {

ImageTensor filled(Shape s, double v) { return ImageTensor(s, v); }

ImageTensor random_image(Shape s, std::uint64_t seed, double lo = 0.0, double hi = 255.0) {
  Rng rng(seed);
  ImageTensor img(s);
  for (double& v : img.values()) v = rng.uniform(lo, hi);
  return img;
}

TEST(ClampPixels, BoundaryValues) {
  ImageTensor img(Shape{1, 1, 3});
  img.at(0, 0, 0) = 260.0;
  img.at(0, 0, 1) = -3.0;
  img.at(0, 0, 2) = 17.5;
  const ImageTensor out = clamp_pixels(img, 0.0, 255.0);
  EXPECT_EQ(out.at(0, 0, 0), 255.0);
  EXPECT_EQ(out.at(0, 0, 1), 0.0);
  EXPECT_EQ(out.at(0, 0, 2), 17.5);
}

TEST(ClampPixels, InsideRangeUnchanged) {
  const ImageTensor img = filled(Shape{3, 4, 4}, 128.0);
  EXPECT_EQ(clamp_pixels(img, 0.0, 255.0), img);
}

TEST(ClampPixels, RejectsEmptyInterval) {
  const ImageTensor img = filled(Shape{1, 2, 2}, 1.0);
  EXPECT_THROW(clamp_pixels(img, 5.0, 5.0), ArgumentError);
  EXPECT_THROW(clamp_pixels(img, 6.0, 5.0), ArgumentError);
}

TEST(LinfProject, BandEdge) {
  const ImageTensor anchor = filled(Shape{1, 1, 1}, 100.0);
  EXPECT_EQ(linf_project(filled(Shape{1, 1, 1}, 115.0), anchor, 10.0).at(0, 0, 0), 110.0);
  EXPECT_EQ(linf_project(filled(Shape{1, 1, 1}, 105.0), anchor, 10.0).at(0, 0, 0), 105.0);
  EXPECT_EQ(linf_project(filled(Shape{1, 1, 1}, 80.0), anchor, 10.0).at(0, 0, 0), 90.0);
}

TEST(LinfProject, BandThenPixelRange) {
  const ImageTensor anchor = filled(Shape{1, 1, 1}, 250.0);
  const double got = linf_project(filled(Shape{1, 1, 1}, 265.0), anchor, 10.0).at(0, 0, 0);
  // Sequential oracle: clip to the band, then to the pixel range.
  const double oracle = std::min(255.0, std::max(0.0, std::min(260.0, std::max(240.0, 265.0))));
  EXPECT_EQ(got, oracle);
  EXPECT_EQ(got, 255.0);
}

TEST(LinfProject, Idempotent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ImageTensor anchor = random_image(Shape{3, 8, 8}, seed);
    const ImageTensor img = random_image(Shape{3, 8, 8}, seed + 100, -40.0, 300.0);
    const ImageTensor once = linf_project(img, anchor, 7.0);
    EXPECT_EQ(linf_project(once, anchor, 7.0), once);
    EXPECT_LE(linf_distance(once, anchor), 7.0 + 1e-9);
  }
}

TEST(LinfProject, ShapeMismatch) {
  EXPECT_THROW(linf_project(filled(Shape{1, 2, 2}, 0), filled(Shape{1, 2, 3}, 0), 1.0),
               StructuralError);
  EXPECT_THROW(linf_project(filled(Shape{1, 2, 2}, 0), filled(Shape{1, 2, 2}, 0), -1.0),
               ArgumentError);
}

TEST(ImageTensor, DataLengthChecked) {
  EXPECT_THROW(ImageTensor(Shape{3, 2, 2}, std::vector<double>(11)), StructuralError);
}

TEST(ImageTensor, Metrics) {
  ImageTensor a(Shape{1, 1, 2}, std::vector<double>{1.0, 2.0});
  ImageTensor b(Shape{1, 1, 2}, std::vector<double>{4.0, 6.0});
  EXPECT_DOUBLE_EQ(dot(a, b), 16.0);
  EXPECT_DOUBLE_EQ(linf_distance(a, b), 4.0);
  EXPECT_DOUBLE_EQ(mean_squared_error(a, b), (9.0 + 16.0) / 2.0);
  EXPECT_EQ(subtract(b, a).values()[1], 4.0);
}

// Reference SplitMix64 outputs for seed 0 and 42.
TEST(Rng, GoldenStream) {
  Rng zero(0);
  EXPECT_EQ(zero.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(zero.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(zero.next_u64(), 0x06c45d188009454fULL);
  Rng r42(42);
  EXPECT_EQ(r42.next_u64(), 0xbdd732262feb6e95ULL);
  EXPECT_EQ(r42.next_u64(), 0x28efe333b266f103ULL);
  EXPECT_EQ(r42.next_u64(), 0x47526757130f9f52ULL);
  EXPECT_DOUBLE_EQ(Rng(42).uniform(), 0.7415648787718233);
}

TEST(Rng, SameSeedSameStream) {
  for (std::uint64_t seed : {0ULL, 1ULL, 0xdeadbeefULL, ~0ULL}) {
    Rng a(seed), b(seed);
    for (int i = 0; i < 10000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(Rng, Ranges) {
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = rng.uniform_int(-2, 3);
    ASSERT_GE(k, -2);
    ASSERT_LE(k, 3);
  }
  EXPECT_THROW(rng.uniform_int(2, 1), ArgumentError);
}

TEST(Rng, NormalMoments) {
  Rng rng(11);
  const int n = 20000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(s2 / n, 1.0, 0.05);
}

TEST(Rng, ChildStreamsDiffer) {
  const Rng root(5);
  EXPECT_NE(root.child(0).seed(), root.child(1).seed());
  Rng a = root.child(3), b = root.child(3);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

TEST(Ppm, ByteLevelOracle) {
  std::vector<std::uint8_t> file = bytes("P6\n2 2\n255\n");
  for (int v : {0, 0, 0, 255, 255, 255, 10, 20, 30, 40, 50, 60}) {
    file.push_back(static_cast<std::uint8_t>(v));
  }
  const ImageTensor img = decode_ppm(file);
  ASSERT_EQ(img.shape(), (Shape{3, 2, 2}));
  EXPECT_EQ(img.at(0, 0, 0), 0.0);
  EXPECT_EQ(img.at(2, 0, 1), 255.0);
  EXPECT_EQ(img.at(0, 1, 0), 10.0);
  EXPECT_EQ(img.at(1, 1, 0), 20.0);
  EXPECT_EQ(img.at(2, 1, 0), 30.0);
  EXPECT_EQ(img.at(0, 1, 1), 40.0);
  EXPECT_EQ(img.at(1, 1, 1), 50.0);
  EXPECT_EQ(img.at(2, 1, 1), 60.0);
  EXPECT_EQ(encode_ppm(img), file);
}

TEST(Ppm, CommentsInHeader) {
  std::vector<std::uint8_t> file = bytes("P6 # made by hand\n1 1\n# max\n255\n");
  for (int v : {1, 2, 3}) file.push_back(static_cast<std::uint8_t>(v));
  const ImageTensor img = decode_ppm(file);
  EXPECT_EQ(img.at(2, 0, 0), 3.0);
}

TEST(Ppm, FileRoundTrip) {
  ImageTensor img(Shape{3, 4, 4});
  Rng rng(9);
  for (double& v : img.values()) v = static_cast<double>(rng.uniform_int(0, 255));
  const auto path = std::filesystem::temp_directory_path() / "iam_core_roundtrip.ppm";
  write_ppm(img, path);
  const ImageTensor back = read_ppm(path);
  EXPECT_EQ(back, img);
  write_ppm(back, path);
  EXPECT_EQ(read_ppm(path), img);
  std::filesystem::remove(path);
}

TEST(Ppm, ExportRoundsAndClamps) {
  ImageTensor img(Shape{3, 1, 1}, std::vector<double>{-4.0, 12.6, 300.0});
  const auto out = encode_ppm(img);
  const std::vector<std::uint8_t> payload(out.end() - 3, out.end());
  EXPECT_EQ(payload, (std::vector<std::uint8_t>{0, 13, 255}));
}

TEST(Ppm, SixteenBitUnsupported) {
  std::vector<std::uint8_t> file = bytes("P6\n1 1\n65535\n");
  file.resize(file.size() + 6, 0);
  EXPECT_THROW(decode_ppm(file), UnsupportedFormatError);
}

TEST(Ppm, TruncatedPayloadReportsOffset) {
  std::vector<std::uint8_t> file = bytes("P6\n2 2\n255\n");
  file.resize(file.size() + 5, 7);
  try {
    decode_ppm(file);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), file.size());
  }
}

TEST(Ppm, MalformedHeader) {
  EXPECT_THROW(decode_ppm(bytes("P3\n1 1\n255\n")), ParseError);
  EXPECT_THROW(decode_ppm(bytes("P6\nx 1\n255\n")), ParseError);
  EXPECT_THROW(decode_ppm(bytes("P6\n1")), ParseError);
}

TEST(Ppm, WriteRequiresThreeChannels) {
  EXPECT_THROW(encode_ppm(filled(Shape{1, 2, 2}, 0.0)), StructuralError);
}

}  // namespace
}  // namespace iam
