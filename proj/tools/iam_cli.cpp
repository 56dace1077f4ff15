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


// Command-line driver: corpus generation, single attacks, ASR matrices and
// sweeps, and perturbation analysis.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "iam/analysis.hpp"
#include "iam/attack.hpp"
#include "iam/errors.hpp"
#include "iam/harness.hpp"
#include "iam/jpeg.hpp"
#include "iam/model.hpp"
#include "iam/ppm.hpp"

namespace fs = std::filesystem;
using namespace iam;

namespace {

struct AttackFlags {
  double eps = 10.0;
  double step = 1.0;
  int iters = 10;
  double f_inter = 0.5;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"bim"};
  std::string iam = "both";
  std::optional<int> jpegss_qf;
  double momentum = 1.0;
  double di_prob = 0.5;
  int di_pad = 6;

  AttackConfig config() const {
    AttackConfig cfg;
    cfg.epsilon = eps;
    cfg.step = step;
    cfg.n_max = iters;
    cfg.f_inter = f_inter;
    cfg.seed = seed;
    cfg.momentum_decay = momentum;
    cfg.di_probability = di_prob;
    cfg.di_max_pad = di_pad;
    cfg.jpegss_qf = jpegss_qf;
    for (const auto& m : methods) {
      if (parse_method(m) == Method::kJpegss && !cfg.jpegss_qf) cfg.jpegss_qf = 25;
    }
    cfg.validate();
    return cfg;
  }

  std::vector<AttackSpec> specs() const {
    std::vector<AttackSpec> out;
    for (const auto& m : methods) {
      const Method method = parse_method(m);
      if (iam != "on") out.push_back({method, false});
      if (iam != "off") out.push_back({method, true});
    }
    return out;
  }
};

void add_attack_flags(CLI::App* app, AttackFlags& f, bool single) {
  app->add_option("--eps", f.eps, "L-infinity budget on the 0..255 scale")->capture_default_str();
  app->add_option("--step", f.step, "sign step per iteration")->capture_default_str();
  app->add_option("--iters", f.iters, "iterations")->capture_default_str();
  app->add_option("--f-inter", f.f_inter, "interpolation factor in (0, 1]")->capture_default_str();
  app->add_option("--seed", f.seed, "attack seed")->capture_default_str();
  app->add_option("--jpegss-qf", f.jpegss_qf, "preset quality for jpegss (default 25)");
  app->add_option("--momentum", f.momentum, "MI decay")->capture_default_str();
  app->add_option("--di-prob", f.di_prob, "DI transform probability")->capture_default_str();
  app->add_option("--di-pad", f.di_pad, "DI maximum shrink in pixels")->capture_default_str();
  const auto methods = CLI::IsMember({"bim", "mi", "di", "jpegss"});
  if (single) {
    f.methods.resize(1);
    f.iam = "on";
    app->add_option("--method", f.methods[0], "bim|mi|di|jpegss")->check(methods)->capture_default_str();
    app->add_option("--iam", f.iam, "on|off")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  } else {
    app->add_option("--method", f.methods, "bim|mi|di|jpegss (repeatable)")->check(methods)->capture_default_str();
    app->add_option("--iam", f.iam, "on|off|both")->check(CLI::IsMember({"on", "off", "both"}))->capture_default_str();
  }
}

struct DeskFlags {
  harness::DeskSetup setup;
  std::size_t threads = 1;
  bool white_box = false;
  std::string out;
};

void add_desk_flags(CLI::App* app, DeskFlags& d) {
  app->add_option("--pairs", d.setup.pairs, "evaluation pairs")->capture_default_str();
  app->add_option("--size", d.setup.image_size, "image side in pixels")->capture_default_str();
  app->add_option("--surrogate-seed", d.setup.surrogate_seed)->capture_default_str();
  app->add_option("--victim-seed", d.setup.victim_seed)->capture_default_str();
  app->add_option("--corpus-seed", d.setup.corpus_seed)->capture_default_str();
  app->add_option("--calibration-pairs", d.setup.calibration_pairs)->capture_default_str();
  app->add_option("--far", d.setup.far_target, "false-accept target")->capture_default_str();
  app->add_option("--threads", d.threads, "worker threads")->capture_default_str();
  app->add_flag("--white-box", d.white_box, "score against the surrogate instead of the victim");
  app->add_option("--out", d.out, "CSV path (stdout when absent)");
}

std::optional<int> parse_qf(const std::string& s) {
  if (s == "uncompressed" || s == "none") return std::nullopt;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || v < 1 || v > 100) {
    throw ArgumentError("bad quality factor '" + s + "'");
  }
  return v;
}

void emit_csv(const harness::AsrReport& report, const std::string& out) {
  if (out.empty()) {
    harness::write_csv(std::cout, report);
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + out);
  harness::write_csv(file, report);
}

std::vector<harness::Victim> victims_for(const harness::DeskExperiment& ex, bool white_box) {
  return white_box ? ex.white_box_victims() : ex.black_box_victims();
}

std::string pair_name(std::size_t i, const char* role) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "pair_%04zu_%s.ppm", i, role);
  return buf;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << j.dump(2) << '\n';
}

// One JSON object on stderr per failure.
int report_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpolation attack toolkit"};
  app.require_subcommand(1);

  // gen-corpus
  std::size_t gen_pairs = 100, gen_size = 64;
  std::uint64_t gen_seed = 7;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic pair corpus as PPM files");
  gen->add_option("--pairs", gen_pairs)->capture_default_str();
  gen->add_option("--size", gen_size)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->required();

  // attack
  AttackFlags single;
  std::string source_path, target_path, attack_out;
  std::uint64_t model_seed = 1;
  auto* attack = app.add_subcommand("attack", "attack one pair; writes adversarial PPM and trace JSON");
  add_attack_flags(attack, single, true);
  attack->add_option("--source", source_path, "attacker image (PPM)")->required();
  attack->add_option("--target", target_path, "victim image (PPM)")->required();
  attack->add_option("--model-seed", model_seed, "surrogate toy model seed")->capture_default_str();
  attack->add_option("--qf", single.jpegss_qf, "preset quality for jpegss");
  attack->add_option("--out", attack_out, "output directory")->required();

  // matrix
  AttackFlags matrix_flags;
  DeskFlags matrix_desk;
  std::vector<std::string> matrix_qf{"uncompressed", "25", "50", "75"};
  auto* matrix = app.add_subcommand("matrix", "ASR for every attack and quality factor");
  add_attack_flags(matrix, matrix_flags, false);
  add_desk_flags(matrix, matrix_desk);
  matrix->add_option("--qf", matrix_qf, "quality factors or 'uncompressed'")->capture_default_str();

  // sweep-qf
  AttackFlags sweep_flags;
  DeskFlags sweep_desk;
  std::vector<int> sweep_range{10, 20, 30, 40, 50, 60, 70, 80, 90};
  auto* sweep = app.add_subcommand("sweep-qf", "ASR across an ascending quality range");
  add_attack_flags(sweep, sweep_flags, false);
  add_desk_flags(sweep, sweep_desk);
  sweep->add_option("--qf", sweep_range, "ascending quality factors")->capture_default_str();

  // sweep-finter
  AttackFlags finter_flags;
  DeskFlags finter_desk;
  std::vector<double> factors{0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75, 1.0};
  int finter_qf = 50;
  auto* finter = app.add_subcommand("sweep-finter", "bim+iam ASR per interpolation factor");
  add_attack_flags(finter, finter_flags, false);
  add_desk_flags(finter, finter_desk);
  finter->add_option("--factors", factors)->capture_default_str();
  finter->add_option("--qf", finter_qf)->capture_default_str();

  // analyze
  std::string an_input, an_reference, an_heatmap, an_name;
  bool an_raw = false;
  double an_cutoff = analysis::kDefaultCutoff;
  std::optional<int> an_qf;
  auto* analyze = app.add_subcommand("analyze", "spectrum and smoothness metrics of an image or perturbation");
  analyze->add_option("--input", an_input, "adversarial image (PPM)")->required();
  analyze->add_option("--reference", an_reference, "source image; metrics use input - reference");
  analyze->add_flag("--raw", an_raw, "measure the input itself");
  analyze->add_option("--cutoff", an_cutoff)->capture_default_str();
  analyze->add_option("--qf", an_qf, "JPEG round-trip the input first");
  analyze->add_option("--heatmap", an_heatmap, "write the log-magnitude DCT map (PGM)");
  analyze->add_option("--name", an_name, "row label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    if (*gen) {
      const auto corpus = harness::generate_corpus(gen_pairs, gen_size, gen_seed);
      fs::create_directories(gen_out);
      for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        write_ppm(corpus.pairs[i].source, fs::path(gen_out) / pair_name(i, "source"));
        write_ppm(corpus.pairs[i].target, fs::path(gen_out) / pair_name(i, "target"));
      }
      write_json({{"pairs", gen_pairs}, {"size", gen_size}, {"seed", gen_seed}},
                 fs::path(gen_out) / "corpus.json");
      std::cout << corpus.pairs.size() << " pairs written to " << gen_out << '\n';
    } else if (*attack) {
      const AttackConfig cfg = single.config();
      const AttackSpec spec = single.specs().front();
      const ImageTensor x_s = read_ppm(source_path);
      const ImageTensor x_t = read_ppm(target_path);
      const ToyConvModel model(model_seed);
      const AttackResult r = run_attack(model, x_s, x_t, cfg, spec);
      fs::create_directories(attack_out);
      write_ppm(r.adversarial, fs::path(attack_out) / "adversarial.ppm");
      write_json({{"method", r.trace.method},
                  {"model", model.id()},
                  {"losses", r.trace.losses},
                  {"final_linf", r.trace.final_linf},
                  {"initial_loss", loss(model, x_s, x_t)},
                  {"config", nlohmann::json::parse(harness::serialize_config(cfg, spec))},
                  {"config_hash", harness::config_hash(cfg, spec)}},
                 fs::path(attack_out) / "trace.json");
      std::cout << r.trace.method << " final loss "
                << (r.trace.losses.empty() ? 0.0 : r.trace.losses.back()) << '\n';
    } else if (*matrix || *sweep || *finter) {
      const DeskFlags& desk = *matrix ? matrix_desk : (*sweep ? sweep_desk : finter_desk);
      const AttackFlags& flags = *matrix ? matrix_flags : (*sweep ? sweep_flags : finter_flags);
      const AttackConfig cfg = flags.config();
      std::vector<std::optional<int>> qfs;
      for (const auto& q : matrix_qf) qfs.push_back(parse_qf(q));
      const auto ex = harness::make_desk_experiment(desk.setup);
      const auto victims = victims_for(ex, desk.white_box);
      const harness::RunOptions options{desk.threads, desk.white_box};
      harness::AsrReport report;
      if (*matrix) {
        report = harness::run_matrix(ex.corpus, *ex.surrogate, victims, flags.specs(), qfs,
                                     cfg, options);
      } else if (*sweep) {
        report = harness::sweep_qf(ex.corpus, *ex.surrogate, victims, flags.specs(),
                                   sweep_range, cfg, options);
      } else {
        report = harness::sweep_finter(ex.corpus, *ex.surrogate, victims, factors, cfg,
                                       finter_qf, options);
      }
      emit_csv(report, desk.out);
    } else if (*analyze) {
      ImageTensor x = read_ppm(an_input);
      if (an_qf) x = jpeg::jpeg_roundtrip(x, jpeg::tables_for_qf(*an_qf));
      const bool raw = an_raw || an_reference.empty();
      const ImageTensor ref = raw ? x : read_ppm(an_reference);
      const auto metrics =
          analysis::measure(an_name.empty() ? an_input : an_name, x, ref, raw, an_cutoff);
      analysis::write_metrics_csv(std::cout, {metrics});
      if (!an_heatmap.empty()) {
        const ImageTensor subject = raw ? x : subtract(x, ref);
        write_pgm(analysis::log_magnitude_heatmap(analysis::full_dct(subject)), an_heatmap);
      }
    }
  } catch (const ArgumentError& e) {
    return report_error("argument", e.what());
  } catch (const StructuralError& e) {
    return report_error("structural", e.what());
  } catch (const ParseError& e) {
    return report_error("parse", e.what());
  } catch (const UnsupportedFormatError& e) {
    return report_error("unsupported_format", e.what());
  } catch (const NumericError& e) {
    return report_error("numeric", e.what());
  } catch (const std::exception& e) {
    return report_error("runtime", e.what());
  }
  return 0;
}
