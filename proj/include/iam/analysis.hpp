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


#ifndef IAM_ANALYSIS_HPP_
#define IAM_ANALYSIS_HPP_

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "iam/image.hpp"

namespace iam::analysis {

inline constexpr double kDefaultCutoff = 0.5;

// Orthonormal 2-D DCT-II over the whole image, per channel. Coefficient
// (u, v) sits at row u, column v; (0, 0) is DC.
ImageTensor full_dct(const ImageTensor& img);
ImageTensor inverse_full_dct(const ImageTensor& coeffs);

// Share of energy in coefficients with (u / H + v / W) / 2 >= cutoff.
// Throws NumericError when the total energy is zero.
double hf_energy_ratio(const ImageTensor& coeffs, double cutoff = kDefaultCutoff);

struct SpectrumReport {
  ImageTensor coefficients;
  double hf_energy_ratio = 0.0;
  double cutoff = kDefaultCutoff;
};

SpectrumReport spectrum(const ImageTensor& img, double cutoff = kDefaultCutoff);

struct NeighborProfile {
  std::vector<double> values;
  double total_variation = 0.0;  // sum |v[i+1] - v[i]|
};

NeighborProfile neighbor_profile(const ImageTensor& img, std::size_t row,
                                 std::size_t channel = 0);

// Sum of row total variation over every row and channel.
double row_total_variation(const ImageTensor& img);

// Sum of squared horizontal and vertical first differences.
double squared_gradient_energy(const ImageTensor& img);

// log(1 + |c|) of one channel, rescaled to 0..255 for PGM export.
ImageTensor log_magnitude_heatmap(const ImageTensor& coeffs, std::size_t channel = 0);

struct ImageMetrics {
  std::string name;
  bool perturbation = true;  // metrics of (x_adv - x_s) rather than raw pixels
  double cutoff = kDefaultCutoff;
  double hf_energy_ratio = 0.0;
  double row_tv = 0.0;
};

// x_adv - x_s by default; the raw image when `raw` is set.
ImageMetrics measure(const std::string& name, const ImageTensor& x_adv,
                     const ImageTensor& x_s, bool raw = false,
                     double cutoff = kDefaultCutoff);

void write_metrics_csv(std::ostream& out, const std::vector<ImageMetrics>& rows);

}  // namespace iam::analysis

#endif  // IAM_ANALYSIS_HPP_
