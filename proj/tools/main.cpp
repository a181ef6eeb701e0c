/*
 * Copyright 2026 The SGRNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sgrnn: run experiments, generate fixtures, describe datasets.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "sgrnn/data/io.hpp"
#include "sgrnn/errors.hpp"

namespace {

using namespace sgrnn;
using experiment::ExperimentConfig;

struct RunFlags {
  std::string config;
  std::string task, dataset, gnn, variant, sweep, seeds, out;
  bool synthetic = false, sivi = false, no_wall_clock = false, quiet = false;
  std::optional<double> gamma, lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, patience, test_snapshots, nll_samples;
  std::size_t log_every = 100;
};

// "3" means three seeds counting up from the base seed; "4,7,9" lists them.
std::vector<std::uint64_t> parse_seeds(const std::string& spec, std::uint64_t base) {
  std::vector<std::uint64_t> out;
  try {
    if (spec.find(',') == std::string::npos) {
      const auto n = std::stoull(spec);
      for (std::uint64_t i = 0; i < n; ++i) out.push_back(base + i);
    } else {
      std::stringstream ss(spec);
      for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoull(item));
    }
  } catch (const std::exception&) {
    throw ConfigError("invalid --seeds '" + spec + "'");
  }
  if (out.empty()) throw ConfigError("--seeds selects no seeds");
  return out;
}

ExperimentConfig resolve(const RunFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{}
                                          : experiment::load_config_file(f.config);
  experiment::apply_environment(cfg);
  if (!f.dataset.empty()) {
    cfg.dataset_path = f.dataset;
    cfg.synthetic.reset();
  }
  if (f.synthetic) {
    if (!cfg.synthetic) cfg.synthetic = data::SyntheticSpec{};
    cfg.dataset_path.clear();
  }
  if (!f.task.empty()) cfg.task = model::parse_task(f.task);
  if (!f.gnn.empty()) cfg.model.gnn_type = gnn::parse_gnn_type(f.gnn);
  if (!f.variant.empty()) cfg.model.variant = model::parse_variant(f.variant);
  if (!f.sweep.empty()) cfg.sweep = experiment::parse_sweep(f.sweep);
  if (f.gamma) cfg.model.gamma = *f.gamma;
  if (f.lr) cfg.train.learning_rate = *f.lr;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.patience) cfg.train.patience = *f.patience;
  if (f.test_snapshots) cfg.test_snapshots = *f.test_snapshots;
  if (f.nll_samples) cfg.nll_samples = *f.nll_samples;
  if (f.sivi) cfg.model.sivi.enabled = true;
  if (f.no_wall_clock) cfg.record_wall_clock = false;
  if (!f.seeds.empty()) {
    cfg.seeds = parse_seeds(f.seeds, f.seed.value_or(1));
  } else if (f.seed) {
    cfg.seeds = {*f.seed};
  }
  if (!f.out.empty()) cfg.out_dir = f.out;
  return cfg;
}

int run_command(const RunFlags& f) {
  ExperimentConfig cfg;
  try {
    cfg = resolve(f);
    cfg.validate();
  } catch (const ContractError& e) {
    // Name parsers in the core library report ContractError.
    throw ConfigError(e.what());
  }
  const experiment::Dataset dataset = experiment::load_dataset(cfg);
  auto progress = [&](const experiment::Progress& p) {
    if (f.quiet) return;
    if (p.epoch && f.log_every > 0 && p.epoch->epoch % f.log_every == 0) {
      std::fprintf(stderr, "[run %zu/%zu] epoch %zu loss %.4f kl %.4f val_auc %.4f\n",
                   p.run_index + 1, p.run_count, p.epoch->epoch, p.epoch->loss, p.epoch->kl,
                   p.epoch->val_auc);
    }
    if (p.finished) {
      const auto& r = *p.finished;
      std::fprintf(stderr,
                   "[run %zu/%zu] %s variant=%s gamma=%g seed=%llu auc=%.4f ap=%.4f nll=%.4f "
                   "best_epoch=%zu (%.1fs)\n",
                   p.run_index + 1, p.run_count, std::string(model::to_string(r.task)).c_str(),
                   std::string(model::to_string(r.variant)).c_str(), r.gamma,
                   static_cast<unsigned long long>(r.seed), r.auc, r.ap, r.nll, r.best_epoch,
                   r.wall_seconds);
    }
  };
  const auto rows = experiment::run_experiment(cfg, dataset, progress);
  experiment::emit_results(rows, cfg.out_dir);
  std::cout << experiment::results_csv(rows);
  if (!f.quiet) std::fprintf(stderr, "wrote %s\n", (cfg.out_dir / "results.csv").c_str());
  return 0;
}

struct GenerateFlags {
  std::string kind = "enron";
  std::string out;
  data::SyntheticSpec spec;
  std::uint64_t seed = 2026;
};

int generate_command(const GenerateFlags& f) {
  data::SnapshotSequence seq;
  if (f.kind == "enron") {
    seq = data::enron_like_sequence(f.seed);
  } else if (f.kind == "synthetic") {
    seq = data::generate_synthetic(f.spec).sequence;
  } else {
    throw ConfigError("unknown --kind '" + f.kind + "' (enron, synthetic)");
  }
  if (f.out.empty()) {
    data::write_snapshots(std::cout, seq);
  } else {
    data::save_snapshots(f.out, seq);
  }
  return 0;
}

int describe_command(const std::string& dataset, bool synthetic) {
  ExperimentConfig cfg;
  if (synthetic) {
    cfg.synthetic = data::SyntheticSpec{};
  } else {
    cfg.dataset_path = dataset;
  }
  const auto d = experiment::load_dataset(cfg);
  const auto meta = data::describe(d.sequence, d.name);
  std::size_t total = 0;
  for (auto e : meta.edge_counts) total += e;
  nlohmann::json j{{"name", meta.name},
                   {"snapshots", meta.num_snapshots},
                   {"max_nodes", d.sequence.max_nodes()},
                   {"node_counts", meta.node_counts},
                   {"edge_counts", meta.edge_counts},
                   {"total_edges", total},
                   {"density", meta.density},
                   {"attributes", d.sequence.has_attributes()}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGRNN dynamic link detection and prediction"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Train and evaluate over seeds; writes results.csv/json");
  run->add_option("-c,--config", rf.config, "TOML experiment file");
  run->add_option("--task", rf.task, "detection | prediction | new_prediction");
  run->add_option("--dataset", rf.dataset, "Snapshot file");
  run->add_flag("--synthetic", rf.synthetic, "Use the synthetic generator ([synthetic] table)");
  run->add_option("--gnn", rf.gnn, "gcn | sage | gin");
  run->add_option("--variant", rf.variant, "plain | fixed_bn | res | no_std");
  run->add_option("--gamma", rf.gamma, "Fixed BN scale");
  run->add_option("--seed", rf.seed, "Seed, or the first seed with --seeds N");
  run->add_option("--seeds", rf.seeds, "Seed count N or a list a,b,c");
  run->add_option("--epochs", rf.epochs, "Maximum epochs");
  run->add_option("--lr", rf.lr, "Learning rate");
  run->add_option("--patience", rf.patience, "Early-stopping patience");
  run->add_option("--test-snapshots", rf.test_snapshots, "Final snapshots held out for test");
  run->add_option("--nll-samples", rf.nll_samples, "Prior draws for the NLL estimate");
  run->add_option("--sweep", rf.sweep, "none | gamma | variant");
  run->add_flag("--sivi", rf.sivi, "Semi-implicit posterior");
  run->add_option("--out", rf.out, "Output directory (overrides SGRNN_OUT_DIR)");
  run->add_flag("--no-wall-clock", rf.no_wall_clock, "Write wall_seconds as 0");
  run->add_option("--log-every", rf.log_every, "Progress line every N epochs (0: off)");
  run->add_flag("-q,--quiet", rf.quiet, "No progress output");

  GenerateFlags gf;
  auto* gen = app.add_subcommand("generate", "Write a fixture in the snapshot text format");
  gen->add_option("--kind", gf.kind, "enron | synthetic");
  gen->add_option("--out", gf.out, "Output file (stdout when absent)");
  gen->add_option("--seed", gf.seed, "Seed of the Enron-shaped generator");
  gen->add_option("--nodes", gf.spec.n_nodes);
  gen->add_option("--snapshots", gf.spec.n_snapshots);
  gen->add_option("--blocks", gf.spec.n_blocks);
  gen->add_option("--p-in", gf.spec.p_in);
  gen->add_option("--p-out", gf.spec.p_out);
  gen->add_option("--drift", gf.spec.drift_prob);
  gen->add_option("--synthetic-seed", gf.spec.seed);

  std::string describe_path;
  bool describe_synthetic = false;
  auto* desc = app.add_subcommand("describe", "Print dataset statistics as JSON");
  desc->add_option("--dataset", describe_path, "Snapshot file");
  desc->add_flag("--synthetic", describe_synthetic, "Describe the default synthetic fixture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return run_command(rf);
    if (*gen) return generate_command(gf);
    if (*desc) {
      if (describe_path.empty() && !describe_synthetic) {
        throw ConfigError("describe needs --dataset or --synthetic");
      }
      return describe_command(describe_path, describe_synthetic);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "sgrnn: configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sgrnn: %s\n", e.what());
    return 2;
  }
  return 2;
}
