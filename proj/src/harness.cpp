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


#include "iam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "iam/errors.hpp"
#include "iam/jpeg.hpp"

namespace iam::harness {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

ImageTensor generate_image(std::size_t size, Rng& rng) {
  if (size == 0) throw ArgumentError("generate_image: size must be positive");
  ImageTensor img(Shape{3, size, size});
  const double n = static_cast<double>(size);

  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(30.0, 225.0);
    c1[c] = rng.uniform(30.0, 225.0);
  }
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(angle), gy = std::sin(angle);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double t =
          0.5 + 0.5 * ((x / n - 0.5) * gx + (y / n - 0.5) * gy) * std::sqrt(2.0);
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = c0[c] + t * (c1[c] - c0[c]);
    }

  const auto blobs = rng.uniform_int(6, 12);
  for (std::int64_t b = 0; b < blobs; ++b) {
    const double cy = rng.uniform(0.0, n), cx = rng.uniform(0.0, n);
    const double radius = rng.uniform(0.06, 0.25) * n;
    const double opacity = rng.uniform(0.4, 0.9);
    double color[3];
    for (double& v : color) v = rng.uniform(0.0, 255.0);
    const double inv = 1.0 / (2.0 * radius * radius);
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) {
        const double dy = y - cy, dx = x - cx;
        const double a = opacity * std::exp(-(dx * dx + dy * dy) * inv);
        for (std::size_t c = 0; c < 3; ++c) {
          img.at(c, y, x) = (1.0 - a) * img.at(c, y, x) + a * color[c];
        }
      }
  }
  return clamp_pixels(img, 0.0, 255.0);
}

PairCorpus generate_corpus(std::size_t n, std::size_t size, std::uint64_t seed,
                           const std::optional<NegativeFilter>& filter) {
  if (n == 0) throw ArgumentError("generate_corpus: n must be >= 1");
  PairCorpus corpus;
  corpus.seed = seed;
  corpus.image_size = size;
  corpus.pairs.reserve(n);
  const Rng root(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = root.child(i);
    ImagePair pair{generate_image(size, rng), generate_image(size, rng)};
    if (filter && filter->model) {
      const auto src = normalize(embed(*filter->model, pair.source));
      for (int redraw = 0; redraw < filter->max_redraws; ++redraw) {
        const auto dst = normalize(embed(*filter->model, pair.target));
        if (squared_distance(src, dst) >= filter->threshold) break;
        pair.target = generate_image(size, rng);
      }
    }
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

const AsrRow& AsrReport::find(const std::string& attack, std::optional<int> qf,
                              const std::string& victim) const {
  for (const auto& row : rows) {
    if (row.attack == attack && row.qf == qf && row.victim == victim) return row;
  }
  throw ArgumentError("report has no row for " + attack);
}

void write_csv(std::ostream& out, const AsrReport& report) {
  out << "attack,base,f_inter,qf,surrogate,victim,success,total,asr,threshold,"
         "far_target,config_hash\n";
  for (const auto& r : report.rows) {
    out << r.attack << ',' << r.base << ',' << format_double("%.4f", r.f_inter) << ','
        << (r.qf ? std::to_string(*r.qf) : std::string("uncompressed")) << ','
        << r.surrogate << ',' << r.victim << ',' << r.success << ',' << r.total << ','
        << format_double("%.2f", r.asr) << ',' << format_double("%.9g", r.threshold)
        << ',' << format_double("%.4g", r.far_target) << ',' << r.config_hash << '\n';
  }
}

std::string to_csv(const AsrReport& report) {
  std::ostringstream out;
  write_csv(out, report);
  return out.str();
}

std::string serialize_config(const AttackConfig& cfg, const AttackSpec& spec) {
  nlohmann::json j;
  j["attack"] = spec.name();
  j["epsilon"] = cfg.epsilon;
  j["step"] = cfg.step;
  j["n_max"] = cfg.n_max;
  j["f_inter"] = spec.iam ? cfg.f_inter : 1.0;
  j["momentum_decay"] = cfg.momentum_decay;
  j["di_probability"] = cfg.di_probability;
  j["di_max_pad"] = cfg.di_max_pad;
  j["jpegss_qf"] = cfg.jpegss_qf ? nlohmann::json(*cfg.jpegss_qf) : nlohmann::json();
  j["seed"] = cfg.seed;
  return j.dump();
}

std::string config_hash(const AttackConfig& cfg, const AttackSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(cfg, spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AttackConfig pair_config(const AttackConfig& cfg, std::size_t pair_index) {
  AttackConfig out = cfg;
  out.seed = Rng(cfg.seed).child(pair_index).seed();
  return out;
}

std::vector<ImageTensor> craft_all(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                                   const AttackConfig& cfg, AttackSpec spec,
                                   std::size_t threads) {
  std::vector<ImageTensor> out(corpus.pairs.size());
  parallel_for(corpus.pairs.size(), threads, [&](std::size_t i) {
    const auto& pair = corpus.pairs[i];
    out[i] = run_attack(surrogate, pair.source, pair.target, pair_config(cfg, i), spec)
                 .adversarial;
  });
  return out;
}

std::vector<bool> score(const PairCorpus& corpus, std::span<const ImageTensor> adversarial,
                        const Victim& victim, std::optional<int> qf) {
  if (adversarial.size() != corpus.pairs.size()) {
    throw StructuralError("score: adversarial count does not match corpus");
  }
  std::optional<jpeg::JpegProfile> profile;
  if (qf) profile = jpeg::tables_for_qf(*qf);
  std::vector<bool> hits(adversarial.size());
  for (std::size_t i = 0; i < adversarial.size(); ++i) {
    const ImageTensor probe =
        profile ? jpeg::jpeg_roundtrip(adversarial[i], *profile) : adversarial[i];
    const double d = squared_distance(normalize(embed(*victim.model, probe)),
                                      normalize(embed(*victim.model, corpus.pairs[i].target)));
    hits[i] = d < victim.threshold.threshold;
  }
  return hits;
}

namespace {

void check_victims(const EmbeddingModel& surrogate, std::span<const Victim> victims,
                   const RunOptions& options) {
  if (victims.empty()) throw ArgumentError("run_matrix: no victim models");
  for (const auto& v : victims) {
    if (!v.model) throw ArgumentError("run_matrix: null victim model");
    if (!options.allow_white_box && v.model->id() == surrogate.id()) {
      throw ArgumentError("run_matrix: surrogate " + surrogate.id() +
                          " listed as victim; enable white-box rows explicitly");
    }
  }
}

AsrRow make_row(const AttackSpec& spec, const AttackConfig& cfg, std::optional<int> qf,
                const EmbeddingModel& surrogate, const Victim& victim,
                const std::vector<bool>& hits) {
  AsrRow row;
  row.attack = spec.name();
  row.base = to_string(spec.method);
  row.f_inter = spec.iam ? cfg.f_inter : 1.0;
  row.qf = qf;
  row.surrogate = surrogate.id();
  row.victim = victim.model->id();
  row.success = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), true));
  row.total = hits.size();
  row.asr = row.total ? 100.0 * static_cast<double>(row.success) / row.total : 0.0;
  row.threshold = victim.threshold.threshold;
  row.far_target = victim.threshold.far_target;
  row.config_hash = config_hash(cfg, spec);
  return row;
}

}  // namespace

AsrReport run_matrix(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                     std::span<const Victim> victims, std::span<const AttackSpec> attacks,
                     std::span<const std::optional<int>> qfs, const AttackConfig& cfg,
                     const RunOptions& options) {
  if (attacks.empty()) throw ArgumentError("run_matrix: empty attack list");
  if (qfs.empty()) throw ArgumentError("run_matrix: empty qf list");
  check_victims(surrogate, victims, options);
  cfg.validate();
  AsrReport report;
  for (const AttackSpec& spec : attacks) {
    const auto adversarial = craft_all(corpus, surrogate, cfg, spec, options.threads);
    for (const auto& qf : qfs) {
      for (const Victim& victim : victims) {
        report.rows.push_back(make_row(spec, cfg, qf, surrogate, victim,
                                       score(corpus, adversarial, victim, qf)));
      }
    }
  }
  return report;
}

AsrReport sweep_qf(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                   std::span<const Victim> victims, std::span<const AttackSpec> attacks,
                   std::span<const int> qf_range, const AttackConfig& cfg,
                   const RunOptions& options) {
  if (qf_range.empty()) throw ArgumentError("sweep_qf: empty qf range");
  if (!std::is_sorted(qf_range.begin(), qf_range.end())) {
    throw ArgumentError("sweep_qf: qf range must be ascending");
  }
  std::vector<std::optional<int>> qfs(qf_range.begin(), qf_range.end());
  return run_matrix(corpus, surrogate, victims, attacks, qfs, cfg, options);
}

AsrReport sweep_finter(const PairCorpus& corpus, const EmbeddingModel& surrogate,
                       std::span<const Victim> victims, std::span<const double> factors,
                       const AttackConfig& cfg, int qf, const RunOptions& options) {
  if (factors.empty()) throw ArgumentError("sweep_finter: no factors");
  const AttackSpec spec{Method::kBim, true};
  const std::optional<int> qfs[] = {qf};
  AsrReport report;
  for (double f : factors) {
    if (!(f > 0.0 && f <= 1.0)) throw ArgumentError("sweep_finter: factor outside (0, 1]");
    AttackConfig c = cfg;
    c.f_inter = f;
    auto part = run_matrix(corpus, surrogate, victims, std::span(&spec, 1), qfs, c, options);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
  }
  return report;
}

std::vector<Victim> DeskExperiment::black_box_victims() const {
  return {Victim{victim.get(), victim_threshold}};
}

std::vector<Victim> DeskExperiment::white_box_victims() const {
  return {Victim{surrogate.get(), surrogate_threshold}};
}

DeskExperiment make_desk_experiment(const DeskSetup& setup) {
  DeskExperiment ex;
  ex.surrogate = std::make_unique<ToyConvModel>(setup.surrogate_seed);
  ex.victim = std::make_unique<ToyConvModel>(setup.victim_seed);
  const PairCorpus calibration =
      generate_corpus(setup.calibration_pairs, setup.image_size, setup.calibration_seed);
  ex.surrogate_threshold =
      calibrate_threshold(*ex.surrogate, calibration.pairs, setup.far_target);
  ex.victim_threshold = calibrate_threshold(*ex.victim, calibration.pairs, setup.far_target);
  ex.corpus = generate_corpus(setup.pairs, setup.image_size, setup.corpus_seed,
                              NegativeFilter{ex.victim.get(), ex.victim_threshold.threshold});
  return ex;
}

}  // namespace iam::harness
