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


#ifndef IAM_HARNESS_HPP_
#define IAM_HARNESS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "iam/attack.hpp"
#include "iam/image.hpp"
#include "iam/model.hpp"

namespace iam::harness {

// Structured-noise test image: a smooth two-color gradient overlaid with
// soft Gaussian blobs. Band-limited, so JPEG behaves as on natural images.
ImageTensor generate_image(std::size_t size, Rng& rng);

struct PairCorpus {
  std::vector<ImagePair> pairs;
  std::uint64_t seed = 0;
  std::size_t image_size = 0;
};

// Redraw victims until the pair is negative under `model` at `threshold`.
struct NegativeFilter {
  const EmbeddingModel* model = nullptr;
  double threshold = 0.0;
  int max_redraws = 64;
};

PairCorpus generate_corpus(std::size_t n, std::size_t size, std::uint64_t seed,
                           const std::optional<NegativeFilter>& filter = std::nullopt);

struct Victim {
  const EmbeddingModel* model = nullptr;
  DecisionThreshold threshold;
};

struct RunOptions {
  std::size_t threads = 1;
  bool allow_white_box = false;
};

struct AsrRow {
  std::string attack;
  std::string base;
  double f_inter = 1.0;
  std::optional<int> qf;  // nullopt = uncompressed
  std::string surrogate;
  std::string victim;
  std::size_t success = 0;
  std::size_t total = 0;
  double asr = 0.0;  // percent
  double threshold = 0.0;
  double far_target = 0.0;
  std::string config_hash;
};

struct AsrReport {
  std::vector<AsrRow> rows;

  // First row matching attack name, qf and victim; throws if absent.
  const AsrRow& find(const std::string& attack, std::optional<int> qf,
                     const std::string& victim) const;
};

// Column order and number formats are fixed; identical reports produce
// identical bytes.
void write_csv(std::ostream& out, const AsrReport& report);
std::string to_csv(const AsrReport& report);

// Canonical JSON of everything that determines an attack run.
std::string serialize_config(const AttackConfig& cfg, const AttackSpec& spec);
// FNV-1a 64 of serialize_config, as 16 lowercase hex digits.
std::string config_hash(const AttackConfig& cfg, const AttackSpec& spec);

// Per-pair configuration: the seed is keyed by pair index, so results do not
// depend on which worker handled the pair.
AttackConfig pair_config(const AttackConfig& cfg, std::size_t pair_index);

// Adversarial images for every pair, gathered by pair index.
std::vector<ImageTensor> craft_all(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                                   const AttackConfig& cfg, AttackSpec spec,
                                   std::size_t threads);

// Success iff the victim distance between J(x_adv) (or x_adv when
// uncompressed) and x_t is below the victim threshold.
std::vector<bool> score(const PairCorpus& corpus, std::span<const ImageTensor> adversarial,
                        const Victim& victim, std::optional<int> qf);

AsrReport run_matrix(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                     std::span<const Victim> victims, std::span<const AttackSpec> attacks,
                     std::span<const std::optional<int>> qfs, const AttackConfig& cfg,
                     const RunOptions& options = {});

AsrReport sweep_qf(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                   std::span<const Victim> victims, std::span<const AttackSpec> attacks,
                   std::span<const int> qf_range, const AttackConfig& cfg,
                   const RunOptions& options = {});

// bim+iam at each factor, compressed at `qf` (50 by default).
AsrReport sweep_finter(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                       std::span<const Victim> victims, std::span<const double> factors,
                       const AttackConfig& cfg, int qf = 50, const RunOptions& options = {});

// Desk-scale defaults: two toy models with different seeds, a calibration
// corpus for the victim thresholds and an evaluation corpus of negative pairs.
struct DeskSetup {
  std::uint64_t surrogate_seed = 1;
  std::uint64_t victim_seed = 2;
  std::uint64_t calibration_seed = 1000;
  std::uint64_t corpus_seed = 7;
  std::size_t calibration_pairs = 1000;
  std::size_t pairs = 100;
  std::size_t image_size = 64;
  double far_target = 0.01;
};

struct DeskExperiment {
  std::unique_ptr<ToyConvModel> surrogate;
  std::unique_ptr<ToyConvModel> victim;
  DecisionThreshold surrogate_threshold;
  DecisionThreshold victim_threshold;
  PairCorpus corpus;

  std::vector<Victim> black_box_victims() const;
  std::vector<Victim> white_box_victims() const;
};

DeskExperiment make_desk_experiment(const DeskSetup& setup);

}  // namespace iam::harness

#endif  // IAM_HARNESS_HPP_
