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


#include "iam/attack.hpp"

#include <cmath>

#include "iam/errors.hpp"
#include "iam/interp.hpp"
#include "iam/jpeg.hpp"

namespace iam {

std::string to_string(Method method) {
  switch (method) {
    case Method::kBim: return "bim";
    case Method::kMi: return "mi";
    case Method::kDi: return "di";
    case Method::kJpegss: return "jpegss";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "bim") return Method::kBim;
  if (name == "mi") return Method::kMi;
  if (name == "di") return Method::kDi;
  if (name == "jpegss") return Method::kJpegss;
  throw ArgumentError("unknown attack method '" + name + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be > 0");
  if (!(step >= 0.0)) throw ArgumentError("step must be >= 0");
  if (n_max < 1) throw ArgumentError("n_max must be >= 1");
  if (!(f_inter > 0.0 && f_inter <= 1.0)) throw ArgumentError("f_inter must be in (0, 1]");
  if (!(momentum_decay >= 0.0)) throw ArgumentError("momentum_decay must be >= 0");
  if (!(di_probability >= 0.0 && di_probability <= 1.0)) {
    throw ArgumentError("di_probability must be in [0, 1]");
  }
  if (di_max_pad < 0) throw ArgumentError("di_max_pad must be >= 0");
  if (jpegss_qf && (*jpegss_qf < 1 || *jpegss_qf > 100)) {
    throw ArgumentError("jpegss_qf must be in [1, 100]");
  }
}

std::string AttackSpec::name() const {
  return to_string(method) + (iam ? "+iam" : "");
}

AttackSpec AttackSpec::parse(const std::string& name) {
  constexpr std::string_view kSuffix = "+iam";
  if (name.size() > kSuffix.size() && name.ends_with(kSuffix)) {
    return {parse_method(name.substr(0, name.size() - kSuffix.size())), true};
  }
  return {parse_method(name), false};
}

// ---------------------------------------------------------------------------
// Input diversity

DiDraw draw_di(const Shape& shape, const AttackConfig& cfg, Rng& rng) {
  DiDraw draw;
  draw.inner_height = shape.height;
  draw.inner_width = shape.width;
  if (!rng.bernoulli(cfg.di_probability)) return draw;
  const auto max_pad = static_cast<std::int64_t>(cfg.di_max_pad);
  const auto shrink = rng.uniform_int(
      0, std::min<std::int64_t>(max_pad, static_cast<std::int64_t>(
                                             std::min(shape.height, shape.width)) - 1));
  draw.applied = true;
  draw.inner_height = shape.height - static_cast<std::size_t>(shrink);
  draw.inner_width = shape.width - static_cast<std::size_t>(shrink);
  draw.offset_y = static_cast<std::size_t>(rng.uniform_int(0, shrink));
  draw.offset_x = static_cast<std::size_t>(rng.uniform_int(0, shrink));
  return draw;
}

ImageTensor apply_di(const ImageTensor& img, const DiDraw& draw) {
  if (!draw.applied) return img;
  const ImageTensor inner = resample_to(img, draw.inner_height, draw.inner_width);
  ImageTensor out(img.shape(), 0.0);
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < draw.inner_height; ++y)
      for (std::size_t x = 0; x < draw.inner_width; ++x)
        out.at(c, draw.offset_y + y, draw.offset_x + x) = inner.at(c, y, x);
  return out;
}

ImageTensor apply_di_adjoint(const ImageTensor& grad, const DiDraw& draw,
                             const Shape& in_shape) {
  if (!draw.applied) return grad;
  ImageTensor inner(Shape{in_shape.channels, draw.inner_height, draw.inner_width});
  for (std::size_t c = 0; c < in_shape.channels; ++c)
    for (std::size_t y = 0; y < draw.inner_height; ++y)
      for (std::size_t x = 0; x < draw.inner_width; ++x)
        inner.at(c, y, x) = grad.at(c, draw.offset_y + y, draw.offset_x + x);
  return resample_to_adjoint(inner, in_shape);
}

ImageTensor di_transform(const ImageTensor& img, const AttackConfig& cfg, Rng& rng) {
  return apply_di(img, draw_di(img.shape(), cfg, rng));
}

// ---------------------------------------------------------------------------
// Sign-gradient loop

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

AttackResult run_sign_attack(const GradientOracle& oracle, const TraceLoss& trace_loss,
                             const ImageTensor& x_s, const AttackConfig& cfg,
                             AttackSpec spec) {
  cfg.validate();
  if (x_s.empty()) throw StructuralError("attack: empty source image");
  const InterpFactor factor(cfg.f_inter);
  Rng rng(cfg.seed);

  ImageTensor x = x_s;
  ImageTensor momentum;
  AttackResult result;
  result.trace.method = spec.name();
  result.trace.losses.reserve(static_cast<std::size_t>(cfg.n_max));

  for (int t = 0; t < cfg.n_max; ++t) {
    ImageTensor work = spec.iam ? resample(x, factor) : x;

    ImageTensor grad;
    if (spec.method == Method::kDi) {
      const DiDraw draw = draw_di(work.shape(), cfg, rng);
      ImageTensor inner_grad;
      oracle(apply_di(work, draw), inner_grad);
      grad = apply_di_adjoint(inner_grad, draw, work.shape());
    } else {
      oracle(work, grad);
    }
    require_same_shape(grad, work, "attack gradient");

    auto g = grad.values();
    if (spec.method == Method::kMi) {
      if (momentum.empty()) momentum = ImageTensor(work.shape(), 0.0);
      double l1 = 0.0;
      for (double v : g) l1 += std::abs(v);
      const double inv = l1 > 0.0 ? 1.0 / l1 : 0.0;
      auto m = momentum.values();
      for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = cfg.momentum_decay * m[i] + g[i] * inv;
      }
      g = momentum.values();
    }

    auto w = work.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.step * sign(g[i]);

    x = spec.iam ? resample_to(work, x_s.height(), x_s.width()) : std::move(work);
    x = linf_project(x, x_s, cfg.epsilon);
    result.trace.losses.push_back(trace_loss(x));
  }

  result.trace.final_linf = linf_distance(x, x_s);
  result.adversarial = std::move(x);
  return result;
}

namespace {

GradientOracle model_oracle(const ImpersonationLoss& loss) {
  return [&loss](const ImageTensor& x, ImageTensor& grad) {
    return loss.value_and_gradient(x, grad);
  };
}

GradientOracle smooth_jpeg_oracle(const ImpersonationLoss& loss,
                                  const jpeg::JpegProfile& profile) {
  return [&loss, profile](const ImageTensor& x, ImageTensor& grad) {
    const jpeg::SmoothJpeg codec(x, profile);
    ImageTensor inner;
    const double value = loss.value_and_gradient(codec.output(), inner);
    grad = codec.pullback(inner);
    return value;
  };
}

}  // namespace

AttackResult run_attack(const EmbeddingModel& model, const ImageTensor& x_s,
                        const ImageTensor& x_t, const AttackConfig& cfg,
                        AttackSpec spec) {
  require_same_shape(x_s, x_t, "attack");
  cfg.validate();
  if (spec.iam && !(cfg.f_inter <= 1.0)) {
    throw ArgumentError("iam: f_inter must be <= 1");
  }
  const ImpersonationLoss loss(model, x_t);
  const TraceLoss trace = [&loss](const ImageTensor& x) { return loss.value(x); };
  if (spec.method == Method::kJpegss) {
    if (!cfg.jpegss_qf) throw ArgumentError("jpegss: jpegss_qf must be set");
    const auto profile = jpeg::tables_for_qf(*cfg.jpegss_qf);
    return run_sign_attack(smooth_jpeg_oracle(loss, profile), trace, x_s, cfg, spec);
  }
  return run_sign_attack(model_oracle(loss), trace, x_s, cfg, spec);
}

AttackResult bim(const EmbeddingModel& model, const ImageTensor& x_s,
                 const ImageTensor& x_t, const AttackConfig& cfg) {
  return run_attack(model, x_s, x_t, cfg, {Method::kBim, false});
}

AttackResult mi(const EmbeddingModel& model, const ImageTensor& x_s,
                const ImageTensor& x_t, const AttackConfig& cfg) {
  return run_attack(model, x_s, x_t, cfg, {Method::kMi, false});
}

AttackResult di(const EmbeddingModel& model, const ImageTensor& x_s,
                const ImageTensor& x_t, const AttackConfig& cfg) {
  return run_attack(model, x_s, x_t, cfg, {Method::kDi, false});
}

AttackResult jpegss(const EmbeddingModel& model, const ImageTensor& x_s,
                    const ImageTensor& x_t, const AttackConfig& cfg) {
  return run_attack(model, x_s, x_t, cfg, {Method::kJpegss, false});
}

AttackResult iam(const EmbeddingModel& model, const ImageTensor& x_s,
                 const ImageTensor& x_t, const AttackConfig& cfg, Method base) {
  return run_attack(model, x_s, x_t, cfg, {base, true});
}

}  // namespace iam
