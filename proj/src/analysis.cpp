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


#include "iam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "iam/errors.hpp"

namespace iam::analysis {

namespace {

// Row-major n x n orthonormal DCT-II basis.
std::vector<double> dct_basis(std::size_t n) {
  std::vector<double> a(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a[k * n + i] = scale * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k /
                                      (2.0 * static_cast<double>(n)));
    }
  }
  return a;
}

// Per channel: out = R * X * C^T (forward) or R^T * X * C (inverse).
ImageTensor separable(const ImageTensor& img, bool inverse) {
  if (img.empty()) throw StructuralError("full_dct: empty image");
  const std::size_t h = img.height(), w = img.width();
  const auto rows = dct_basis(h);
  const auto cols = dct_basis(w);
  auto r = [&](std::size_t i, std::size_t j) { return inverse ? rows[j * h + i] : rows[i * h + j]; };
  auto c = [&](std::size_t i, std::size_t j) { return inverse ? cols[j * w + i] : cols[i * w + j]; };
  ImageTensor out(img.shape());
  std::vector<double> tmp(h * w);
  for (std::size_t ch = 0; ch < img.channels(); ++ch) {
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < h; ++k) acc += r(i, k) * img.at(ch, k, j);
        tmp[i * w + j] = acc;
      }
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w; ++k) acc += tmp[i * w + k] * c(j, k);
        out.at(ch, i, j) = acc;
      }
  }
  return out;
}

}  // namespace

ImageTensor full_dct(const ImageTensor& img) { return separable(img, false); }
ImageTensor inverse_full_dct(const ImageTensor& coeffs) { return separable(coeffs, true); }

double hf_energy_ratio(const ImageTensor& coeffs, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) {
    throw ArgumentError("hf_energy_ratio: cutoff must be in (0, 1)");
  }
  const double h = static_cast<double>(coeffs.height());
  const double w = static_cast<double>(coeffs.width());
  double total = 0.0, high = 0.0;
  for (std::size_t c = 0; c < coeffs.channels(); ++c)
    for (std::size_t u = 0; u < coeffs.height(); ++u)
      for (std::size_t v = 0; v < coeffs.width(); ++v) {
        const double e = coeffs.at(c, u, v) * coeffs.at(c, u, v);
        total += e;
        if ((static_cast<double>(u) / h + static_cast<double>(v) / w) / 2.0 >= cutoff) {
          high += e;
        }
      }
  if (!(total > 0.0)) throw NumericError("hf_energy_ratio: zero total energy");
  return high / total;
}

SpectrumReport spectrum(const ImageTensor& img, double cutoff) {
  SpectrumReport report;
  report.coefficients = full_dct(img);
  report.hf_energy_ratio = hf_energy_ratio(report.coefficients, cutoff);
  report.cutoff = cutoff;
  return report;
}

NeighborProfile neighbor_profile(const ImageTensor& img, std::size_t row,
                                 std::size_t channel) {
  if (row >= img.height() || channel >= img.channels()) {
    throw ArgumentError("neighbor_profile: row " + std::to_string(row) + ", channel " +
                        std::to_string(channel) + " outside " + to_string(img.shape()));
  }
  NeighborProfile profile;
  profile.values.reserve(img.width());
  for (std::size_t x = 0; x < img.width(); ++x) {
    profile.values.push_back(img.at(channel, row, x));
    if (x > 0) {
      profile.total_variation += std::abs(profile.values[x] - profile.values[x - 1]);
    }
  }
  return profile;
}

double row_total_variation(const ImageTensor& img) {
  double tv = 0.0;
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 1; x < img.width(); ++x)
        tv += std::abs(img.at(c, y, x) - img.at(c, y, x - 1));
  return tv;
}

double squared_gradient_energy(const ImageTensor& img) {
  double acc = 0.0;
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 0; x < img.width(); ++x) {
        if (x + 1 < img.width()) {
          const double d = img.at(c, y, x + 1) - img.at(c, y, x);
          acc += d * d;
        }
        if (y + 1 < img.height()) {
          const double d = img.at(c, y + 1, x) - img.at(c, y, x);
          acc += d * d;
        }
      }
  return acc;
}

ImageTensor log_magnitude_heatmap(const ImageTensor& coeffs, std::size_t channel) {
  if (channel >= coeffs.channels()) throw ArgumentError("heatmap: bad channel");
  ImageTensor map(Shape{1, coeffs.height(), coeffs.width()});
  auto src = coeffs.plane(channel);
  auto dst = map.plane(0);
  double peak = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = std::log1p(std::abs(src[i]));
    peak = std::max(peak, dst[i]);
  }
  if (peak > 0.0) {
    for (double& v : dst) v *= 255.0 / peak;
  }
  return map;
}

ImageMetrics measure(const std::string& name, const ImageTensor& x_adv,
                     const ImageTensor& x_s, bool raw, double cutoff) {
  const ImageTensor subject = raw ? x_adv : subtract(x_adv, x_s);
  ImageMetrics m;
  m.name = name;
  m.perturbation = !raw;
  m.cutoff = cutoff;
  m.hf_energy_ratio = hf_energy_ratio(full_dct(subject), cutoff);
  m.row_tv = row_total_variation(subject);
  return m;
}

void write_metrics_csv(std::ostream& out, const std::vector<ImageMetrics>& rows) {
  out << "name,subject,cutoff,hf_energy_ratio,row_tv\n";
  char buf[128];
  for (const auto& m : rows) {
    std::snprintf(buf, sizeof buf, "%.3f,%.6f,%.4f", m.cutoff, m.hf_energy_ratio, m.row_tv);
    out << m.name << ',' << (m.perturbation ? "perturbation" : "raw") << ',' << buf << '\n';
  }
}

}  // namespace iam::analysis
