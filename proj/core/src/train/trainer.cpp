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
#include "sgrnn/train/trainer.hpp"

#include <chrono>
#include <cmath>

#include "json.hpp"
#include "sgrnn/data/split.hpp"
#include "sgrnn/errors.hpp"
#include "sgrnn/train/metrics.hpp"

namespace sgrnn::train {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Task preparation

TaskData prepare_task(const data::SnapshotSequence& seq, model::Task task,
                      std::size_t test_snapshots, std::uint64_t seed) {
  const std::size_t T = seq.size();
  if (test_snapshots < 1) throw SplitError("at least one test snapshot is required");
  TaskData out;
  out.task = task;
  if (!model::is_prediction(task)) {
    if (T < test_snapshots) {
      throw SplitError("detection needs at least " + std::to_string(test_snapshots) +
                       " snapshots, got " + std::to_string(T));
    }
    const auto split = data::split_edges_detection(seq, 0.05, 0.10, seed);
    out.graphs = model::GraphSequence(seq, split);
    out.train_end = T;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& s = split.snapshots[t];
      if (!s.val_pos.empty()) out.validation.push_back({t, s.val_pos, s.val_neg});
      if (t >= T - test_snapshots && !s.test_pos.empty())
        out.test.push_back({t, s.test_pos, s.test_neg});
    }
  } else {
    if (T < test_snapshots + 2) {
      throw SplitError("prediction needs at least " + std::to_string(test_snapshots + 2) +
                       " snapshots, got " + std::to_string(T));
    }
    const bool new_only = task == model::Task::kNewPrediction;
    auto targets = data::build_prediction_targets(seq, new_only, seed);
    out.warnings = std::move(targets.warnings);
    out.graphs = model::GraphSequence(seq);
    out.train_end = T - test_snapshots;
    const auto to_set = [](const data::TransitionTargets& tr) {
      return model::EvalSet{tr.target, tr.positives, tr.negatives};
    };
    // Latest usable transition whose target lies inside the training window.
    for (std::size_t target = out.train_end - 1; target >= 1; --target) {
      const auto& tr = targets.transitions[target - 1];
      if (!tr.skipped && !tr.positives.empty()) {
        out.validation.push_back(to_set(tr));
        break;
      }
    }
    for (std::size_t target = out.train_end; target < T; ++target) {
      const auto& tr = targets.transitions[target - 1];
      if (tr.skipped || tr.positives.empty()) {
        out.warnings.push_back("test target " + std::to_string(target) + " has no positives");
        continue;
      }
      out.test.push_back(to_set(tr));
    }
  }
  if (out.validation.empty()) throw SplitError("no validation pairs available");
  if (out.test.empty()) throw SplitError("no test pairs available");
  return out;
}

model::SgrnnConfig fit_config(model::SgrnnConfig base, const TaskData& data) {
  base.task = data.task;
  base.input_dim = data.graphs.feature_dim();
  base.max_nodes = data.graphs.max_nodes();
  return base;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(const model::SgrnnModel& model, const TaskData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (model.config().task != data.task) throw ContractError("train: model task differs from data");
  const auto start = std::chrono::steady_clock::now();
  const auto& mc = model.config();

  std::mt19937_64 init_rng(config.seed);
  TrainResult result;
  model::ParameterStore params = model.init_parameters(init_rng);
  result.params = params;
  auto streams = model::RngStreams::from_seed(config.seed);
  OptimizerState state;
  RunRecord& record = result.record;
  record.model = mc;
  record.train = config;
  std::vector<double> history;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    {
      ad::Tape tape;
      model::TapeBinding p(tape, params);
      const model::ElboTerms terms = model.elbo_loss(p, data.graphs, data.train_end, streams);
      rec.loss = terms.loss.value().item();
      if (!std::isfinite(rec.loss)) throw TrainingDiverged(epoch);
      for (std::size_t t = 0; t < terms.kl.size(); ++t) {
        rec.recon += terms.recon_ll[t];
        rec.kl += terms.kl[t];
        rec.shift_stat += terms.shift_stat[t];
      }
      rec.shift_stat /= static_cast<double>(terms.kl.size());
      tape.backward(terms.loss);
      adam_step(params, p.gradients(), state, config);
    }
    if (!params.all_finite()) throw TrainingDiverged(epoch);
    if (params.contains("q.beta")) {
      const auto& beta = params.at("q.beta").values();
      rec.kl_floor = model::kl_floor(mc.gamma, beta, mc.latent_dim);
    } else {
      rec.kl_floor = model::kl_floor(mc.gamma, {}, mc.latent_dim);
    }

    std::vector<model::PairScores> scores;
    try {
      scores = model::rollout_predict(model, params, data.graphs, data.validation);
    } catch (const NonFiniteError&) {
      // Finite parameters can still overflow the forward pass.
      throw TrainingDiverged(epoch);
    }
    const AucAp m = pooled_auc_ap(scores);
    rec.val_auc = m.auc;
    rec.val_ap = m.ap;
    history.push_back(m.auc);
    const StopDecision decision = early_stopping_check(history, config.patience);
    if (decision.best_epoch == epoch) {
      result.params = params;
      record.best_epoch = epoch;
      record.best_val_auc = m.auc;
      record.best_val_ap = m.ap;
    }
    record.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (decision.stop) break;
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json config_json(const model::SgrnnConfig& c) {
  return {{"input_dim", c.input_dim},
          {"max_nodes", c.max_nodes},
          {"hidden_dim", c.hidden_dim},
          {"head_dim", c.head_dim},
          {"latent_dim", c.latent_dim},
          {"gnn_type", gnn::to_string(c.gnn_type)},
          {"variant", model::to_string(c.variant)},
          {"gamma", c.gamma},
          {"bn_epsilon", c.bn_epsilon},
          {"task", model::to_string(c.task)},
          {"cell", model::to_string(c.cell)},
          {"pos_weight_mode", model::to_string(c.pos_weight_mode)},
          {"full_pair_limit", c.full_pair_limit},
          {"negative_ratio", c.negative_ratio},
          {"sivi",
           {{"enabled", c.sivi.enabled},
            {"layers", c.sivi.layers},
            {"noise_dim", c.sivi.noise_dim},
            {"width", c.sivi.width}}}};
}

model::SgrnnConfig config_of(const json& j) {
  model::SgrnnConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.max_nodes = j.at("max_nodes").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.head_dim = j.at("head_dim").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.gnn_type = gnn::parse_gnn_type(j.at("gnn_type").get<std::string>());
  c.variant = model::parse_variant(j.at("variant").get<std::string>());
  c.gamma = j.at("gamma").get<double>();
  c.bn_epsilon = j.at("bn_epsilon").get<double>();
  c.task = model::parse_task(j.at("task").get<std::string>());
  c.cell = model::parse_cell(j.at("cell").get<std::string>());
  c.pos_weight_mode = model::parse_pos_weight_mode(j.at("pos_weight_mode").get<std::string>());
  c.full_pair_limit = j.at("full_pair_limit").get<std::size_t>();
  c.negative_ratio = j.at("negative_ratio").get<std::size_t>();
  const json& s = j.at("sivi");
  c.sivi.enabled = s.at("enabled").get<bool>();
  c.sivi.layers = s.at("layers").get<std::size_t>();
  c.sivi.noise_dim = s.at("noise_dim").get<std::size_t>();
  c.sivi.width = s.at("width").get<std::size_t>();
  return c;
}

json train_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"patience", c.patience},
          {"seed", c.seed},   {"beta1", c.beta1},   {"beta2", c.beta2},
          {"epsilon", c.epsilon}};
}

TrainConfig train_of(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  return c;
}

template <typename F>
auto parse_guarded(const std::string& text, const char* what, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string config_to_json(const model::SgrnnConfig& config) { return config_json(config).dump(); }

model::SgrnnConfig config_from_json(const std::string& text) {
  return parse_guarded(text, "model config", [](const json& j) { return config_of(j); });
}

std::string RunRecord::to_json() const {
  json epochs_json = json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"loss", e.loss},
                           {"recon", e.recon},
                           {"kl", e.kl},
                           {"shift_stat", e.shift_stat},
                           {"kl_floor", e.kl_floor},
                           {"val_auc", e.val_auc},
                           {"val_ap", e.val_ap}});
  }
  json j{{"format", "sgrnn-run"},
         {"version", 1},
         {"model", config_json(model)},
         {"train", train_json(train)},
         {"epochs", std::move(epochs_json)},
         {"best_epoch", best_epoch},
         {"best_val_auc", best_val_auc},
         {"best_val_ap", best_val_ap},
         {"wall_seconds", wall_seconds}};
  return j.dump(2);
}

RunRecord RunRecord::from_json(const std::string& text) {
  return parse_guarded(text, "run record", [](const json& j) {
    if (j.at("format") != "sgrnn-run" || j.at("version") != 1) {
      throw ConfigError("run record: unsupported format");
    }
    RunRecord r;
    r.model = config_of(j.at("model"));
    r.train = train_of(j.at("train"));
    for (const auto& e : j.at("epochs")) {
      EpochRecord rec;
      rec.epoch = e.at("epoch").get<std::size_t>();
      rec.loss = e.at("loss").get<double>();
      rec.recon = e.at("recon").get<double>();
      rec.kl = e.at("kl").get<double>();
      rec.shift_stat = e.at("shift_stat").get<double>();
      rec.kl_floor = e.at("kl_floor").get<double>();
      rec.val_auc = e.at("val_auc").get<double>();
      rec.val_ap = e.at("val_ap").get<double>();
      r.epochs.push_back(rec);
    }
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.best_val_auc = j.at("best_val_auc").get<double>();
    r.best_val_ap = j.at("best_val_ap").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
  });
}

}  // namespace sgrnn::train
