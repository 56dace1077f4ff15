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


#ifndef IAM_MODEL_HPP_
#define IAM_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iam/image.hpp"

namespace iam {

using Embedding = std::vector<double>;

// Differentiable feature extractor. Implementations are immutable after
// construction; forward and backward are pure and may run concurrently.
class EmbeddingModel {
 public:
  virtual ~EmbeddingModel() = default;

  virtual std::string id() const = 0;
  virtual std::size_t embed_dim() const = 0;
  // Shape the network consumes natively. embed() resizes anything else.
  virtual Shape input_shape() const = 0;

  // `x` has input_shape().
  virtual Embedding forward(const ImageTensor& x) const = 0;
  // Vector-Jacobian product: returns J(x)^T cotangent with the shape of `x`.
  virtual ImageTensor backward(const ImageTensor& x,
                               std::span<const double> cotangent) const = 0;
};

// Forward pass with bilinear resizing of non-native inputs, so models can be
// queried on downsampled images. The pullback routes through the resize
// adjoint.
Embedding embed(const EmbeddingModel& model, const ImageTensor& x);
ImageTensor embed_pullback(const EmbeddingModel& model, const ImageTensor& x,
                           std::span<const double> cotangent);

// Unit-L2 copy of v. Throws NumericError for a zero vector.
std::vector<double> normalize(std::span<const double> v);

double squared_distance(std::span<const double> a, std::span<const double> b);

// ||phi(F(x_adv)) - phi(F(x_t))||^2 with phi = L2 normalization. In [0, 4].
double loss(const EmbeddingModel& model, const ImageTensor& x_adv,
            const ImageTensor& x_t);
ImageTensor loss_gradient(const EmbeddingModel& model, const ImageTensor& x_adv,
                          const ImageTensor& x_t);

// The impersonation loss with the victim embedding computed once.
class ImpersonationLoss {
 public:
  ImpersonationLoss(const EmbeddingModel& model, const ImageTensor& x_t);

  double value(const ImageTensor& x) const;
  // Returns the loss and writes d loss / d x into `grad`.
  double value_and_gradient(const ImageTensor& x, ImageTensor& grad) const;

 private:
  const EmbeddingModel* model_;
  std::vector<double> target_unit_;
};

struct DecisionThreshold {
  double threshold = 0.0;  // on squared normalized-embedding distance
  double far_target = 0.0;
};

// Linear-interpolated `q`-quantile of `values` (q in [0, 1]).
double quantile(std::vector<double> values, double q);

DecisionThreshold threshold_from_distances(std::vector<double> distances,
                                           double far_target);

struct ImagePair {
  ImageTensor source;  // attacker image x_s
  ImageTensor target;  // victim image x_t
};

DecisionThreshold calibrate_threshold(const EmbeddingModel& model,
                                      std::span<const ImagePair> negative_pairs,
                                      double far_target);

// Two stride-2 3x3 convolutions with tanh activations, global average
// pooling and a linear head with orthonormal rows. Inputs are centered per
// channel, so a uniform brightness shift does not change the embedding.
// Every weight is drawn from Rng(seed).
class ToyConvModel final : public EmbeddingModel {
 public:
  struct Dims {
    std::size_t in_channels = 3;
    std::size_t hidden1 = 32;
    std::size_t hidden2 = 32;
    std::size_t embed_dim = 32;
    std::size_t input_height = 64;
    std::size_t input_width = 64;
    bool operator==(const Dims&) const = default;
  };

  explicit ToyConvModel(std::uint64_t seed);
  ToyConvModel(std::uint64_t seed, Dims dims);

  std::string id() const override;
  std::size_t embed_dim() const override { return dims_.embed_dim; }
  Shape input_shape() const override {
    return {dims_.in_channels, dims_.input_height, dims_.input_width};
  }
  Embedding forward(const ImageTensor& x) const override;
  ImageTensor backward(const ImageTensor& x,
                       std::span<const double> cotangent) const override;

  std::uint64_t seed() const { return seed_; }
  const Dims& dims() const { return dims_; }

  // Flat little-endian file: "IAMW", u32 version, u64 seed, six u32 dims,
  // then f64 weights (conv1 w/b, conv2 w/b, head w/b).
  void save(const std::filesystem::path& path) const;
  static ToyConvModel load(const std::filesystem::path& path);
  std::vector<std::uint8_t> serialize() const;
  static ToyConvModel deserialize(std::span<const std::uint8_t> bytes);

  // Same seed, dims and every weight.
  bool operator==(const ToyConvModel& other) const;

 private:
  struct Conv {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;  // [out][in][3][3]
    std::vector<double> bias;
    bool operator==(const Conv&) const = default;
  };
  struct Activations;

  ToyConvModel() = default;
  void check_input(const ImageTensor& x) const;
  Activations run(const ImageTensor& x) const;

  std::uint64_t seed_ = 0;
  Dims dims_;
  Conv conv1_;
  Conv conv2_;
  std::vector<double> head_weight_;  // [embed_dim][hidden2]
  std::vector<double> head_bias_;
};

}  // namespace iam

#endif  // IAM_MODEL_HPP_
