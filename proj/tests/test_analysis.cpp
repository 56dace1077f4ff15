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

#include <cmath>
#include <numbers>
#include <sstream>

#include "iam/analysis.hpp"
#include "iam/errors.hpp"
#include "iam/jpeg.hpp"
#include "iam/rng.hpp"

namespace iam::analysis {
namespace {

ImageTensor noise(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  ImageTensor img(s);
  for (double& v : img.values()) v = rng.uniform(lo, hi);
  return img;
}

double energy(const ImageTensor& img) { return dot(img, img); }

TEST(FullDct, ConstantOnlyDc) {
  const ImageTensor c = full_dct(ImageTensor(Shape{2, 6, 10}, 3.0));
  for (std::size_t ch = 0; ch < 2; ++ch)
    for (std::size_t u = 0; u < 6; ++u)
      for (std::size_t v = 0; v < 10; ++v) {
        if (u == 0 && v == 0) {
          EXPECT_NEAR(c.at(ch, u, v), 3.0 * std::sqrt(60.0), 1e-9);
        } else {
          EXPECT_NEAR(c.at(ch, u, v), 0.0, 1e-9);
        }
      }
}

TEST(FullDct, Parseval) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ImageTensor img = noise(Shape{3, 12, 17}, seed, 0.0, 255.0);
    EXPECT_NEAR(energy(full_dct(img)), energy(img), 1e-6 * energy(img));
  }
}

TEST(FullDct, ImpulseMatchesAnalyticSpectrum) {
  const std::size_t h = 8, w = 12, y0 = 3, x0 = 5;
  ImageTensor img(Shape{1, h, w}, 0.0);
  img.at(0, y0, x0) = 1.0;
  const ImageTensor c = full_dct(img);
  auto basis = [](std::size_t k, std::size_t i, std::size_t n) {
    const double a = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    return a * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
  };
  double peak = 0.0;
  for (std::size_t u = 0; u < h; ++u)
    for (std::size_t v = 0; v < w; ++v) {
      EXPECT_NEAR(c.at(0, u, v), basis(u, y0, h) * basis(v, x0, w), 1e-12);
      peak = std::max(peak, std::abs(c.at(0, u, v)));
    }
  // Energy is spread: no coefficient exceeds the largest basis amplitude.
  EXPECT_LE(peak, std::sqrt(2.0 / h) * std::sqrt(2.0 / w) + 1e-12);
}

TEST(FullDct, Invertible) {
  const ImageTensor img = noise(Shape{3, 9, 14}, 4, 0.0, 255.0);
  const ImageTensor back = inverse_full_dct(full_dct(img));
  for (std::size_t i = 0; i < img.size(); ++i) {
    ASSERT_NEAR(back.values()[i], img.values()[i], 1e-6);
  }
}

TEST(FullDct, EmptyImage) { EXPECT_THROW(full_dct(ImageTensor()), StructuralError); }

TEST(HfEnergyRatio, ConstantIsZero) {
  EXPECT_NEAR(spectrum(ImageTensor(Shape{3, 16, 16}, 40.0)).hf_energy_ratio, 0.0, 1e-20);
}

TEST(HfEnergyRatio, CheckerboardNearOne) {
  ImageTensor img(Shape{1, 32, 32});
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x) img.at(0, y, x) = ((x + y) % 2) ? 1.0 : -1.0;
  EXPECT_GT(spectrum(img).hf_energy_ratio, 0.95);
}

TEST(HfEnergyRatio, WhiteNoiseMatchesBinFraction) {
  const std::size_t n = 32;
  double bins = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if ((static_cast<double>(u) / n + static_cast<double>(v) / n) / 2 >= 0.5) bins += 1.0;
  const double fraction = bins / (n * n);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    mean += spectrum(noise(Shape{1, n, n}, seed)).hf_energy_ratio / 20.0;
  }
  EXPECT_NEAR(mean, fraction, 0.05);
}

TEST(HfEnergyRatio, ScaleInvariant) {
  const ImageTensor c = full_dct(noise(Shape{3, 16, 16}, 5));
  ImageTensor scaled = c;
  for (double& v : scaled.values()) v *= -7.5;
  EXPECT_NEAR(hf_energy_ratio(scaled), hf_energy_ratio(c), 1e-12);
}

TEST(HfEnergyRatio, Errors) {
  EXPECT_THROW(hf_energy_ratio(ImageTensor(Shape{1, 4, 4}, 0.0)), NumericError);
  const ImageTensor c = full_dct(noise(Shape{1, 4, 4}, 1));
  EXPECT_THROW(hf_energy_ratio(c, 0.0), ArgumentError);
  EXPECT_THROW(hf_energy_ratio(c, 1.0), ArgumentError);
}

TEST(HfEnergyRatio, JpegDoesNotAddHighFrequencies) {
  const jpeg::JpegProfile p = jpeg::tables_for_qf(25);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    ImageTensor img(Shape{3, 32, 32});
    const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x)
          img.at(c, y, x) = 128.0 + 60.0 * std::sin(fx * x + fy * y + c) +
                            rng.uniform(-20.0, 20.0);
    const double before = spectrum(img).hf_energy_ratio;
    const double after = spectrum(jpeg::jpeg_roundtrip(img, p)).hf_energy_ratio;
    EXPECT_LE(after, before) << "seed " << seed;
  }
}

TEST(NeighborProfile, Examples) {
  ImageTensor img(Shape{1, 2, 4}, 9.0);
  const double row[] = {0, 255, 0, 255};
  for (std::size_t x = 0; x < 4; ++x) img.at(0, 1, x) = row[x];
  EXPECT_EQ(neighbor_profile(img, 0).total_variation, 0.0);
  const NeighborProfile p = neighbor_profile(img, 1);
  EXPECT_EQ(p.total_variation, 765.0);
  EXPECT_EQ(p.values, (std::vector<double>{0, 255, 0, 255}));
  EXPECT_THROW(neighbor_profile(img, 2), ArgumentError);
  EXPECT_THROW(neighbor_profile(img, 0, 1), ArgumentError);
  EXPECT_EQ(row_total_variation(img), 765.0);
}

TEST(SquaredGradientEnergy, HandComputed) {
  ImageTensor img(Shape{1, 2, 2}, std::vector<double>{0, 1, 3, 7});
  // Horizontal: 1, 16. Vertical: 9, 36.
  EXPECT_EQ(squared_gradient_energy(img), 62.0);
}

TEST(Heatmap, ScaledToByteRange) {
  const ImageTensor map = log_magnitude_heatmap(full_dct(noise(Shape{3, 8, 8}, 2)), 1);
  EXPECT_EQ(map.shape(), (Shape{1, 8, 8}));
  double peak = 0.0;
  for (double v : map.values()) {
    EXPECT_GE(v, 0.0);
    peak = std::max(peak, v);
  }
  EXPECT_NEAR(peak, 255.0, 1e-9);
}

TEST(Measure, PerturbationByDefault) {
  const ImageTensor xs(Shape{3, 8, 8}, 100.0);
  ImageTensor adv = xs;
  adv.at(0, 0, 0) += 5.0;
  const ImageMetrics m = measure("a", adv, xs);
  EXPECT_TRUE(m.perturbation);
  EXPECT_EQ(m.row_tv, 5.0);
  const ImageMetrics raw = measure("a", adv, xs, true);
  EXPECT_FALSE(raw.perturbation);
  EXPECT_EQ(raw.row_tv, 5.0);
  EXPECT_NE(raw.hf_energy_ratio, m.hf_energy_ratio);

  std::ostringstream out;
  write_metrics_csv(out, {m});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "name,subject,cutoff,hf_energy_ratio,row_tv");
}

}  // namespace
}  // namespace iam::analysis
