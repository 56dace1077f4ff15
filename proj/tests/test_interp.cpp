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

#include <algorithm>
#include <cmath>

#include "iam/errors.hpp"
#include "iam/interp.hpp"
#include "iam/rng.hpp"

namespace iam {
namespace {

ImageTensor noise(Shape s, Rng& rng) {
  ImageTensor img(s);
  for (double& v : img.values()) v = rng.uniform(0.0, 255.0);
  return img;
}

// Direct per-pixel evaluation of the align-corners bilinear formula.
double reference_sample(const ImageTensor& img, std::size_t c, std::size_t oy,
                        std::size_t ox, std::size_t oh, std::size_t ow) {
  auto coord = [](std::size_t o, std::size_t out, std::size_t in) {
    return out == 1 ? 0.0 : static_cast<double>(o) * (in - 1.0) / (out - 1.0);
  };
  const double sy = coord(oy, oh, img.height());
  const double sx = coord(ox, ow, img.width());
  const auto y0 = static_cast<std::size_t>(std::floor(sy));
  const auto x0 = static_cast<std::size_t>(std::floor(sx));
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const double a = sy - y0, b = sx - x0;
  return (1 - a) * (1 - b) * img.at(c, y0, x0) + (1 - a) * b * img.at(c, y0, x1) +
         a * (1 - b) * img.at(c, y1, x0) + a * b * img.at(c, y1, x1);
}

TEST(Resample, ExtentRounding) {
  EXPECT_EQ(resampled_extent(64, InterpFactor(0.5)), 32u);
  EXPECT_EQ(resampled_extent(7, InterpFactor(0.5)), 4u);
  EXPECT_EQ(resampled_extent(3, InterpFactor(0.1)), 1u);
  EXPECT_EQ(resampled_extent(5, InterpFactor(2.0)), 10u);
}

TEST(Resample, InvalidFactor) {
  EXPECT_THROW(InterpFactor(0.0), ArgumentError);
  EXPECT_THROW(InterpFactor(-1.0), ArgumentError);
  EXPECT_THROW(InterpFactor(std::nan("")), ArgumentError);
  EXPECT_THROW(resample(ImageTensor(), InterpFactor(0.5)), StructuralError);
}

TEST(Resample, ConstantReproducedForRandomFactors) {
  Rng rng(1);
  const ImageTensor img(Shape{3, 9, 13}, 128.0);
  for (int i = 0; i < 50; ++i) {
    const InterpFactor f(rng.uniform(0.1, 4.0));
    const ImageTensor out = resample(img, f);
    for (double v : out.values()) ASSERT_NEAR(v, 128.0, 1e-12);
  }
}

TEST(Resample, CornersKeptOnUpsample) {
  ImageTensor img(Shape{1, 2, 2}, std::vector<double>{0, 10, 20, 30});
  const ImageTensor up = resample(img, InterpFactor(2.0));
  ASSERT_EQ(up.shape(), (Shape{1, 4, 4}));
  EXPECT_EQ(up.at(0, 0, 0), 0.0);
  EXPECT_EQ(up.at(0, 0, 3), 10.0);
  EXPECT_EQ(up.at(0, 3, 0), 20.0);
  EXPECT_EQ(up.at(0, 3, 3), 30.0);
}

TEST(Resample, MatchesDirectFormula) {
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const Shape s{2, static_cast<std::size_t>(rng.uniform_int(1, 12)),
                  static_cast<std::size_t>(rng.uniform_int(1, 12))};
    const ImageTensor img = noise(s, rng);
    const std::size_t oh = static_cast<std::size_t>(rng.uniform_int(1, 15));
    const std::size_t ow = static_cast<std::size_t>(rng.uniform_int(1, 15));
    const ImageTensor out = resample_to(img, oh, ow);
    for (std::size_t c = 0; c < s.channels; ++c)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x)
          ASSERT_NEAR(out.at(c, y, x), reference_sample(img, c, y, x, oh, ow), 1e-9);
  }
}

TEST(Resample, RampRoundTrip) {
  // f(x, y) = x + 2y sampled so that halving lands on whole source pixels.
  const std::size_t n = 9;
  ImageTensor ramp(Shape{1, n, n});
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) ramp.at(0, y, x) = x + 2.0 * y;
  const ImageTensor down = resample_to(ramp, 5, 5);
  const ImageTensor back = resample_to(down, n, n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) EXPECT_NEAR(back.at(0, y, x), x + 2.0 * y, 1e-9);
}

TEST(Resample, RangePreserved) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const ImageTensor img = noise(Shape{1, 10, 7}, rng);
    const ImageTensor out = resample(img, InterpFactor(rng.uniform(0.2, 3.0)));
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    for (double v : out.values()) {
      ASSERT_GE(v, *lo - 1e-12);
      ASSERT_LE(v, *hi + 1e-12);
    }
  }
}

TEST(ResampleAdjoint, IdentitySize) {
  Rng rng(4);
  const ImageTensor g = noise(Shape{3, 5, 6}, rng);
  EXPECT_EQ(resample_adjoint(g, InterpFactor(1.0), g.shape()), g);
}

TEST(ResampleAdjoint, DotProductSmallCase) {
  Rng rng(5);
  const ImageTensor u = noise(Shape{1, 4, 4}, rng);
  const ImageTensor v = noise(Shape{1, 2, 2}, rng);
  const double lhs = dot(resample(u, InterpFactor(0.5)), v);
  const double rhs = dot(u, resample_adjoint(v, InterpFactor(0.5), u.shape()));
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
}

TEST(ResampleAdjoint, DotProductRandomCases) {
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const Shape s{static_cast<std::size_t>(rng.uniform_int(1, 3)),
                  static_cast<std::size_t>(rng.uniform_int(2, 20)),
                  static_cast<std::size_t>(rng.uniform_int(2, 20))};
    const InterpFactor f(rng.uniform(0.2, 3.0));
    const ImageTensor u = noise(s, rng);
    const ImageTensor v = noise(resampled_shape(s, f), rng);
    const double lhs = dot(resample(u, f), v);
    const double rhs = dot(u, resample_adjoint(v, f, s));
    ASSERT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs)) << "case " << i;
  }
}

TEST(ResampleAdjoint, MaterializedWeightMatrix) {
  const Shape in{1, 6, 6};
  const InterpFactor f(0.5);
  const Shape out = resampled_shape(in, f);
  const std::size_t n = in.size(), m = out.size();
  // Column j of W is resample(e_j); row i of W^T is resample_adjoint(e_i).
  std::vector<double> w(m * n), wt(n * m);
  for (std::size_t j = 0; j < n; ++j) {
    ImageTensor e(in, 0.0);
    e.values()[j] = 1.0;
    const ImageTensor col = resample(e, f);
    for (std::size_t i = 0; i < m; ++i) w[i * n + j] = col.values()[i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    ImageTensor e(out, 0.0);
    e.values()[i] = 1.0;
    const ImageTensor row = resample_adjoint(e, f, in);
    for (std::size_t j = 0; j < n; ++j) wt[j * m + i] = row.values()[j];
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ASSERT_DOUBLE_EQ(w[i * n + j], wt[j * m + i]);

  // All-ones cotangent: adjoint output is the column sums of W.
  const ImageTensor ones(out, 1.0);
  const ImageTensor adj = resample_adjoint(ones, f, in);
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m; ++i) col += w[i * n + j];
    EXPECT_NEAR(adj.values()[j], col, 1e-12);
  }
}

TEST(ResampleAdjoint, ShapeMismatch) {
  const ImageTensor g(Shape{1, 3, 3}, 1.0);
  EXPECT_THROW(resample_adjoint(g, InterpFactor(0.5), Shape{1, 8, 8}), StructuralError);
  EXPECT_THROW(resample_to_adjoint(g, Shape{2, 8, 8}), StructuralError);
}

double second_difference_energy(const ImageTensor& img) {
  double acc = 0.0;
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 1; x + 1 < img.width(); ++x) {
        const double d = img.at(c, y, x - 1) - 2 * img.at(c, y, x) + img.at(c, y, x + 1);
        acc += d * d;
      }
  return acc;
}

TEST(Resample, DownUpIsSmoothing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const ImageTensor img = noise(Shape{3, 32, 32}, rng);
    const ImageTensor round_trip = resample_to(resample(img, InterpFactor(0.5)), 32, 32);
    EXPECT_LT(second_difference_energy(round_trip), second_difference_energy(img));
  }
}

}  // namespace
}  // namespace iam
