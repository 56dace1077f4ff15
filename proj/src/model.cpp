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


#include "iam/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include <Eigen/Core>

#include "iam/errors.hpp"
#include "iam/interp.hpp"
#include "iam/rng.hpp"

namespace iam {

Embedding embed(const EmbeddingModel& model, const ImageTensor& x) {
  const Shape native = model.input_shape();
  if (x.shape() == native) return model.forward(x);
  if (x.channels() != native.channels) {
    throw StructuralError("model " + model.id() + " expects " +
                          std::to_string(native.channels) + " channels, got " +
                          to_string(x.shape()));
  }
  return model.forward(resample_to(x, native.height, native.width));
}

ImageTensor embed_pullback(const EmbeddingModel& model, const ImageTensor& x,
                           std::span<const double> cotangent) {
  const Shape native = model.input_shape();
  if (x.shape() == native) return model.backward(x, cotangent);
  if (x.channels() != native.channels) {
    throw StructuralError("model " + model.id() + " expects " +
                          std::to_string(native.channels) + " channels, got " +
                          to_string(x.shape()));
  }
  const ImageTensor resized = resample_to(x, native.height, native.width);
  return resample_to_adjoint(model.backward(resized, cotangent), x.shape());
}

std::vector<double> normalize(std::span<const double> v) {
  double sq = 0.0;
  for (double e : v) sq += e * e;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericError("normalize: vector has zero or non-finite norm");
  }
  std::vector<double> out(v.begin(), v.end());
  for (double& e : out) e /= norm;
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StructuralError("squared_distance: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double loss(const EmbeddingModel& model, const ImageTensor& x_adv,
            const ImageTensor& x_t) {
  return ImpersonationLoss(model, x_t).value(x_adv);
}

ImageTensor loss_gradient(const EmbeddingModel& model, const ImageTensor& x_adv,
                          const ImageTensor& x_t) {
  ImageTensor grad;
  ImpersonationLoss(model, x_t).value_and_gradient(x_adv, grad);
  return grad;
}

ImpersonationLoss::ImpersonationLoss(const EmbeddingModel& model,
                                     const ImageTensor& x_t)
    : model_(&model), target_unit_(normalize(embed(model, x_t))) {}

double ImpersonationLoss::value(const ImageTensor& x) const {
  return squared_distance(normalize(embed(*model_, x)), target_unit_);
}

double ImpersonationLoss::value_and_gradient(const ImageTensor& x,
                                             ImageTensor& grad) const {
  const Embedding e = embed(*model_, x);
  const std::vector<double> unit = normalize(e);
  double norm = 0.0;
  for (double v : e) norm += v * v;
  norm = std::sqrt(norm);

  // dL/du = 2 (u - t); dL/de = (I - u u^T) dL/du / |e|.
  std::vector<double> g_unit(unit.size());
  double proj = 0.0;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    g_unit[i] = 2.0 * (unit[i] - target_unit_[i]);
    proj += unit[i] * g_unit[i];
  }
  std::vector<double> g_embed(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) {
    g_embed[i] = (g_unit[i] - unit[i] * proj) / norm;
  }
  grad = embed_pullback(*model_, x, g_embed);
  return squared_distance(unit, target_unit_);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

DecisionThreshold threshold_from_distances(std::vector<double> distances,
                                           double far_target) {
  if (distances.empty()) throw ArgumentError("calibrate_threshold: no negative pairs");
  if (!(far_target > 0.0 && far_target < 1.0)) {
    throw ArgumentError("calibrate_threshold: far_target must be in (0, 1)");
  }
  return {quantile(std::move(distances), far_target), far_target};
}

DecisionThreshold calibrate_threshold(const EmbeddingModel& model,
                                      std::span<const ImagePair> negative_pairs,
                                      double far_target) {
  if (negative_pairs.empty()) {
    throw ArgumentError("calibrate_threshold: no negative pairs");
  }
  std::vector<double> distances;
  distances.reserve(negative_pairs.size());
  for (const ImagePair& pair : negative_pairs) {
    distances.push_back(squared_distance(normalize(embed(model, pair.source)),
                                         normalize(embed(model, pair.target))));
  }
  return threshold_from_distances(std::move(distances), far_target);
}

// ---------------------------------------------------------------------------
// ToyConvModel

namespace {

// Inputs are centered per image and channel, then divided by this.
constexpr double kInputScale = 1.0 / 42.5;
constexpr std::size_t kKernel = 3;

double activation(double z) { return std::tanh(z); }

double activation_slope(double z) {
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

// Subtract each channel's mean over an h*w plane.
void center_channels(std::vector<double>& v, std::size_t channels, std::size_t area) {
  for (std::size_t c = 0; c < channels; ++c) {
    double* plane = v.data() + c * area;
    double mean = 0.0;
    for (std::size_t i = 0; i < area; ++i) mean += plane[i];
    mean /= static_cast<double>(area);
    for (std::size_t i = 0; i < area; ++i) plane[i] -= mean;
  }
}

// Gram-Schmidt over the rows of an r x c matrix when r <= c, otherwise over
// its columns.
void orthonormalize(std::vector<double>& m, std::size_t r, std::size_t c) {
  const bool by_rows = r <= c;
  const std::size_t count = by_rows ? r : c;
  const std::size_t len = by_rows ? c : r;
  auto at = [&](std::size_t v, std::size_t k) -> double& {
    return by_rows ? m[v * c + k] : m[k * c + v];
  };
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < len; ++k) d += at(i, k) * at(j, k);
      for (std::size_t k = 0; k < len; ++k) at(i, k) -= d * at(j, k);
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < len; ++k) norm += at(i, k) * at(i, k);
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw NumericError("ToyConvModel: degenerate head weights");
    for (std::size_t k = 0; k < len; ++k) at(i, k) /= norm;
  }
}

std::size_t conv_extent(std::size_t n) { return (n - 1) / 2 + 1; }

}  // namespace

struct ToyConvModel::Activations {
  std::size_t h0, w0, h1, w1, h2, w2;
  std::vector<double> input;  // normalized
  std::vector<double> pre1, act1;
  std::vector<double> pre2, act2;
  std::vector<double> pooled;
  Embedding embedding;
};

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

// Source index of output position o under kernel tap k (stride 2, pad 1), or
// -1 when it falls in the zero padding.
std::ptrdiff_t tap(std::size_t o, std::size_t k, std::size_t n) {
  const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(2 * o + k) - 1;
  return s >= 0 && s < static_cast<std::ptrdiff_t>(n) ? s : -1;
}

// Rows (c, ky, kx), columns (y, x) of the zero-padded stride-2 patches.
RowMatrix im2col(const std::vector<double>& in, std::size_t cin, std::size_t h,
                 std::size_t w, std::size_t oh, std::size_t ow) {
  RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(cin * kKernel * kKernel),
                                   static_cast<Eigen::Index>(oh * ow));
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t ky = 0; ky < kKernel; ++ky)
      for (std::size_t kx = 0; kx < kKernel; ++kx) {
        double* row = cols.row(static_cast<Eigen::Index>((c * kKernel + ky) * kKernel + kx)).data();
        for (std::size_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t sy = tap(y, ky, h);
          if (sy < 0) continue;
          for (std::size_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t sx = tap(x, kx, w);
            if (sx >= 0) row[y * ow + x] = in[(c * h + sy) * w + sx];
          }
        }
      }
  return cols;
}

// Transpose of im2col: scatter-add patch gradients back onto the input grid.
void col2im(const RowMatrix& cols, std::size_t cin, std::size_t h, std::size_t w,
            std::size_t oh, std::size_t ow, std::vector<double>& out) {
  out.assign(cin * h * w, 0.0);
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t ky = 0; ky < kKernel; ++ky)
      for (std::size_t kx = 0; kx < kKernel; ++kx) {
        const double* row =
            cols.row(static_cast<Eigen::Index>((c * kKernel + ky) * kKernel + kx)).data();
        for (std::size_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t sy = tap(y, ky, h);
          if (sy < 0) continue;
          for (std::size_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t sx = tap(x, kx, w);
            if (sx >= 0) out[(c * h + sy) * w + sx] += row[y * ow + x];
          }
        }
      }
}

// Stride-2, zero-padded 3x3 convolution.
void conv_forward(const std::vector<double>& in, std::size_t cin, std::size_t h,
                  std::size_t w, const std::vector<double>& weight,
                  const std::vector<double>& bias, std::size_t cout,
                  std::vector<double>& out, std::size_t oh, std::size_t ow) {
  const auto k = static_cast<Eigen::Index>(cin * kKernel * kKernel);
  const auto n = static_cast<Eigen::Index>(oh * ow);
  const RowMatrix cols = im2col(in, cin, h, w, oh, ow);
  out.resize(cout * oh * ow);
  Map result(out.data(), static_cast<Eigen::Index>(cout), n);
  result.noalias() = ConstMap(weight.data(), static_cast<Eigen::Index>(cout), k) * cols;
  for (std::size_t o = 0; o < cout; ++o) result.row(static_cast<Eigen::Index>(o)).array() += bias[o];
}

// Gradient w.r.t. the convolution input.
void conv_backward(const std::vector<double>& g_out, std::size_t cout,
                   std::size_t oh, std::size_t ow, const std::vector<double>& weight,
                   std::size_t cin, std::size_t h, std::size_t w,
                   std::vector<double>& g_in) {
  const auto k = static_cast<Eigen::Index>(cin * kKernel * kKernel);
  const auto n = static_cast<Eigen::Index>(oh * ow);
  const RowMatrix g_cols =
      ConstMap(weight.data(), static_cast<Eigen::Index>(cout), k).transpose() *
      ConstMap(g_out.data(), static_cast<Eigen::Index>(cout), n);
  col2im(g_cols, cin, h, w, oh, ow, g_in);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::size_t start)
      : bytes_(bytes), pos_(start) {}
  std::uint64_t read(int width) {
    if (pos_ + width > bytes_.size()) {
      throw ParseError("model weights truncated", pos_);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += width;
    return v;
  }
  double read_f64() { return std::bit_cast<double>(read(8)); }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

constexpr char kMagic[4] = {'I', 'A', 'M', 'W'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

ToyConvModel::ToyConvModel(std::uint64_t seed) : ToyConvModel(seed, Dims{}) {}

ToyConvModel::ToyConvModel(std::uint64_t seed, Dims dims) : seed_(seed), dims_(dims) {
  if (dims.in_channels == 0 || dims.hidden1 == 0 || dims.hidden2 == 0 ||
      dims.embed_dim == 0 || dims.input_height == 0 || dims.input_width == 0) {
    throw ArgumentError("ToyConvModel: all dimensions must be positive");
  }
  Rng rng(seed);
  auto fill = [&rng](std::vector<double>& v, std::size_t n, double stddev) {
    v.resize(n);
    for (double& e : v) e = stddev * rng.normal();
  };
  conv1_.in = dims.in_channels;
  conv1_.out = dims.hidden1;
  fill(conv1_.weight, conv1_.out * conv1_.in * 9, std::sqrt(2.0 / (conv1_.in * 9.0)));
  // Zero biases keep the network odd, so the mean embedding sits near zero.
  // They are still drawn to keep the stream layout fixed.
  fill(conv1_.bias, conv1_.out, 0.0);
  conv2_.in = dims.hidden1;
  conv2_.out = dims.hidden2;
  fill(conv2_.weight, conv2_.out * conv2_.in * 9, std::sqrt(2.0 / (conv2_.in * 9.0)));
  fill(conv2_.bias, conv2_.out, 0.0);
  fill(head_weight_, dims.embed_dim * dims.hidden2, 1.0);
  orthonormalize(head_weight_, dims.embed_dim, dims.hidden2);
  fill(head_bias_, dims.embed_dim, 0.0);
}

bool ToyConvModel::operator==(const ToyConvModel& other) const {
  return seed_ == other.seed_ && dims_ == other.dims_ && conv1_ == other.conv1_ &&
         conv2_ == other.conv2_ && head_weight_ == other.head_weight_ &&
         head_bias_ == other.head_bias_;
}

std::string ToyConvModel::id() const { return "toy-" + std::to_string(seed_); }

void ToyConvModel::check_input(const ImageTensor& x) const {
  if (x.shape() != input_shape()) {
    throw StructuralError("ToyConvModel: input " + to_string(x.shape()) +
                          " != native " + to_string(input_shape()));
  }
}

ToyConvModel::Activations ToyConvModel::run(const ImageTensor& x) const {
  check_input(x);
  Activations a;
  a.h0 = x.height();
  a.w0 = x.width();
  a.h1 = conv_extent(a.h0);
  a.w1 = conv_extent(a.w0);
  a.h2 = conv_extent(a.h1);
  a.w2 = conv_extent(a.w1);

  a.input.assign(x.values().begin(), x.values().end());
  center_channels(a.input, dims_.in_channels, a.h0 * a.w0);
  for (double& v : a.input) v *= kInputScale;

  conv_forward(a.input, conv1_.in, a.h0, a.w0, conv1_.weight, conv1_.bias, conv1_.out,
               a.pre1, a.h1, a.w1);
  a.act1.resize(a.pre1.size());
  std::transform(a.pre1.begin(), a.pre1.end(), a.act1.begin(), activation);

  conv_forward(a.act1, conv2_.in, a.h1, a.w1, conv2_.weight, conv2_.bias, conv2_.out,
               a.pre2, a.h2, a.w2);
  a.act2.resize(a.pre2.size());
  std::transform(a.pre2.begin(), a.pre2.end(), a.act2.begin(), activation);

  const std::size_t area = a.h2 * a.w2;
  a.pooled.assign(conv2_.out, 0.0);
  for (std::size_t c = 0; c < conv2_.out; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < area; ++i) acc += a.act2[c * area + i];
    a.pooled[c] = acc / static_cast<double>(area);
  }

  a.embedding.assign(dims_.embed_dim, 0.0);
  for (std::size_t e = 0; e < dims_.embed_dim; ++e) {
    double acc = head_bias_[e];
    for (std::size_t c = 0; c < conv2_.out; ++c) {
      acc += head_weight_[e * conv2_.out + c] * a.pooled[c];
    }
    a.embedding[e] = acc;
  }
  return a;
}

Embedding ToyConvModel::forward(const ImageTensor& x) const { return run(x).embedding; }

ImageTensor ToyConvModel::backward(const ImageTensor& x,
                                   std::span<const double> cotangent) const {
  if (cotangent.size() != dims_.embed_dim) {
    throw StructuralError("ToyConvModel::backward: cotangent length mismatch");
  }
  const Activations a = run(x);
  const std::size_t area = a.h2 * a.w2;

  std::vector<double> g_pre2(a.pre2.size());
  for (std::size_t c = 0; c < conv2_.out; ++c) {
    double g_pool = 0.0;
    for (std::size_t e = 0; e < dims_.embed_dim; ++e) {
      g_pool += head_weight_[e * conv2_.out + c] * cotangent[e];
    }
    g_pool /= static_cast<double>(area);
    for (std::size_t i = 0; i < area; ++i) {
      g_pre2[c * area + i] = g_pool * activation_slope(a.pre2[c * area + i]);
    }
  }

  std::vector<double> g_act1;
  conv_backward(g_pre2, conv2_.out, a.h2, a.w2, conv2_.weight, conv2_.in, a.h1, a.w1,
                g_act1);
  for (std::size_t i = 0; i < g_act1.size(); ++i) g_act1[i] *= activation_slope(a.pre1[i]);

  std::vector<double> g_input;
  conv_backward(g_act1, conv1_.out, a.h1, a.w1, conv1_.weight, conv1_.in, a.h0, a.w0,
                g_input);
  // Centering is a symmetric projection, so it is its own adjoint.
  for (double& v : g_input) v *= kInputScale;
  center_channels(g_input, dims_.in_channels, a.h0 * a.w0);
  return ImageTensor(x.shape(), std::move(g_input));
}

std::vector<std::uint8_t> ToyConvModel::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_u64(out, seed_);
  for (std::size_t d : {dims_.in_channels, dims_.hidden1, dims_.hidden2,
                        dims_.embed_dim, dims_.input_height, dims_.input_width}) {
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (const auto* v : {&conv1_.weight, &conv1_.bias, &conv2_.weight, &conv2_.bias,
                        &head_weight_, &head_bias_}) {
    for (double e : *v) put_f64(out, e);
  }
  return out;
}

ToyConvModel ToyConvModel::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw ParseError("model weights: bad magic", 0);
  }
  ByteReader in(bytes, 4);
  const auto version = in.read(4);
  if (version != kVersion) {
    throw UnsupportedFormatError("model weights: unsupported version " +
                                 std::to_string(version));
  }
  ToyConvModel m;
  m.seed_ = in.read(8);
  m.dims_.in_channels = in.read(4);
  m.dims_.hidden1 = in.read(4);
  m.dims_.hidden2 = in.read(4);
  m.dims_.embed_dim = in.read(4);
  m.dims_.input_height = in.read(4);
  m.dims_.input_width = in.read(4);
  const Dims& d = m.dims_;
  if (d.in_channels == 0 || d.hidden1 == 0 || d.hidden2 == 0 || d.embed_dim == 0 ||
      d.input_height == 0 || d.input_width == 0 || d.hidden1 > 4096 ||
      d.hidden2 > 4096 || d.embed_dim > 65536) {
    throw ParseError("model weights: implausible dimensions", in.pos());
  }
  m.conv1_ = {d.in_channels, d.hidden1, {}, {}};
  m.conv2_ = {d.hidden1, d.hidden2, {}, {}};
  auto read_vec = [&in](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& e : v) e = in.read_f64();
  };
  read_vec(m.conv1_.weight, d.hidden1 * d.in_channels * 9);
  read_vec(m.conv1_.bias, d.hidden1);
  read_vec(m.conv2_.weight, d.hidden2 * d.hidden1 * 9);
  read_vec(m.conv2_.bias, d.hidden2);
  read_vec(m.head_weight_, d.embed_dim * d.hidden2);
  read_vec(m.head_bias_, d.embed_dim);
  if (!in.done()) throw ParseError("model weights: trailing bytes", in.pos());
  return m;
}

void ToyConvModel::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

ToyConvModel ToyConvModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return deserialize(bytes);
}

}  // namespace iam
