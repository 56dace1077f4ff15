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


#ifndef IAM_ATTACK_HPP_
#define IAM_ATTACK_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iam/image.hpp"
#include "iam/model.hpp"
#include "iam/rng.hpp"

namespace iam {

enum class Method { kBim, kMi, kDi, kJpegss };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct AttackConfig {
  double epsilon = 10.0;  // L-infinity budget, pixel scale
  double step = 1.0;
  int n_max = 10;
  double f_inter = 0.5;
  double momentum_decay = 1.0;
  double di_probability = 0.5;
  int di_max_pad = 6;
  std::optional<int> jpegss_qf;
  std::uint64_t seed = 0;

  // Throws ArgumentError on the first violated constraint.
  void validate() const;
};

// A base method optionally wrapped by the interpolation smoothing step.
struct AttackSpec {
  Method method = Method::kBim;
  bool iam = false;

  std::string name() const;  // "bim", "bim+iam", ...
  static AttackSpec parse(const std::string& name);
  bool operator==(const AttackSpec&) const = default;
};

struct AttackTrace {
  std::vector<double> losses;  // surrogate loss after each iteration
  double final_linf = 0.0;
  std::string method;
};

struct AttackResult {
  ImageTensor adversarial;
  AttackTrace trace;
};

// Loss at `x` plus its gradient; `x` may be at any resolution.
using GradientOracle = std::function<double(const ImageTensor& x, ImageTensor& grad)>;
// Loss recorded in the trace, evaluated on the full-resolution iterate.
using TraceLoss = std::function<double(const ImageTensor& x)>;

// Input diversity: with probability di_probability, resize to a random size in
// [size - di_max_pad, size] and zero-pad back at a random offset. The record
// of what was drawn lets the gradient be pulled back through the transform.
struct DiDraw {
  bool applied = false;
  std::size_t inner_height = 0;
  std::size_t inner_width = 0;
  std::size_t offset_y = 0;
  std::size_t offset_x = 0;
};

DiDraw draw_di(const Shape& shape, const AttackConfig& cfg, Rng& rng);
ImageTensor apply_di(const ImageTensor& img, const DiDraw& draw);
ImageTensor apply_di_adjoint(const ImageTensor& grad, const DiDraw& draw,
                             const Shape& in_shape);
ImageTensor di_transform(const ImageTensor& img, const AttackConfig& cfg, Rng& rng);

// Sign-gradient iteration shared by every method. Each iteration:
//   work   = iam ? resample(x, f_inter) : x
//   grad   = d loss / d work   (through DI when the method is kDi)
//   dir    = sign(grad), or sign of the L1-normalized momentum sum for kMi
//   work  -= step * dir
//   x      = linf_project(iam ? resample back to full size : work, x_s, eps)
// Impersonation: the step descends the distance to the victim.
AttackResult run_sign_attack(const GradientOracle& oracle, const TraceLoss& trace_loss,
                             const ImageTensor& x_s, const AttackConfig& cfg,
                             AttackSpec spec);

AttackResult bim(const EmbeddingModel& model, const ImageTensor& x_s,
                 const ImageTensor& x_t, const AttackConfig& cfg);
AttackResult mi(const EmbeddingModel& model, const ImageTensor& x_s,
                const ImageTensor& x_t, const AttackConfig& cfg);
AttackResult di(const EmbeddingModel& model, const ImageTensor& x_s,
                const ImageTensor& x_t, const AttackConfig& cfg);
// Gradients flow through the smooth JPEG approximation at cfg.jpegss_qf.
AttackResult jpegss(const EmbeddingModel& model, const ImageTensor& x_s,
                    const ImageTensor& x_t, const AttackConfig& cfg);
// Interpolation attack wrapped around `base`. With f_inter = 1 the result is
// bit-identical to the base method.
AttackResult iam(const EmbeddingModel& model, const ImageTensor& x_s,
                 const ImageTensor& x_t, const AttackConfig& cfg, Method base);

AttackResult run_attack(const EmbeddingModel& model, const ImageTensor& x_s,
                        const ImageTensor& x_t, const AttackConfig& cfg,
                        AttackSpec spec);

}  // namespace iam

#endif  // IAM_ATTACK_HPP_
