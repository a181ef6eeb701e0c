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

#include "experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "sgrnn/data/io.hpp"
#include "sgrnn/errors.hpp"
#include "sgrnn/train/metrics.hpp"
#include "toml.hpp"

namespace sgrnn::experiment {

using nlohmann::json;

std::string_view to_string(SweepMode m) {
  switch (m) {
    case SweepMode::kNone: return "none";
    case SweepMode::kGamma: return "gamma";
    case SweepMode::kVariant: return "variant";
  }
  return "none";
}

SweepMode parse_sweep(std::string_view s) {
  if (s == "none") return SweepMode::kNone;
  if (s == "gamma") return SweepMode::kGamma;
  if (s == "variant") return SweepMode::kVariant;
  throw ConfigError("unknown sweep mode '" + std::string(s) + "' (none, gamma, variant)");
}

namespace {

// Name parsers report ConfigError so the CLI maps them to exit code 1.
template <typename F>
auto parse_name(F&& f, std::string_view value, const char* what) {
  try {
    return f(value);
  } catch (const std::exception&) {
    throw ConfigError(std::string("invalid ") + what + " '" + std::string(value) + "'");
  }
}

model::Task task_of(std::string_view s) { return parse_name(model::parse_task, s, "task"); }
model::PosteriorVariant variant_of(std::string_view s) {
  return parse_name(model::parse_variant, s, "variant");
}
gnn::GnnType gnn_of(std::string_view s) { return parse_name(gnn::parse_gnn_type, s, "gnn type"); }

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset_path.empty() && !synthetic) throw ConfigError("no dataset path or synthetic spec");
  if (!dataset_path.empty() && synthetic) {
    throw ConfigError("dataset path and synthetic spec are mutually exclusive");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (test_snapshots < 1) throw ConfigError("test_snapshots must be >= 1");
  if (nll_samples < 1) throw ConfigError("nll_samples must be >= 1");
  if (sweep == SweepMode::kGamma && sweep_gammas.empty()) throw ConfigError("empty gamma sweep");
  if (sweep == SweepMode::kVariant && sweep_variants.empty()) {
    throw ConfigError("empty variant sweep");
  }
  for (double g : sweep_gammas)
    if (!(g > 0.0)) throw ConfigError("sweep gammas must be positive");
  train.validate();
  model::SgrnnConfig probe = model;
  probe.input_dim = probe.max_nodes = 1;
  try {
    probe.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// TOML

namespace {

void check_keys(const toml::table& t, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t) {
    if (!allowed.count(std::string(k.str()))) {
      throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + section + "]");
    }
  }
}

template <typename T>
std::optional<T> get(const toml::table& t, const char* key, const std::string& section) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = n->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
    if (auto v = n->value<std::int64_t>(); v && *v >= 0) return static_cast<T>(*v);
  } else {
    if (auto v = n->value<T>()) return *v;
  }
  throw ConfigError("[" + section + "] " + key + " has the wrong type");
}

template <typename T>
void assign(T& dst, const toml::table& t, const char* key, const std::string& section) {
  if (auto v = get<T>(t, key, section)) dst = *v;
}

const toml::table* section(const toml::table& root, const char* name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
  return n->as_table();
}

template <typename T, typename F>
std::vector<T> array_of(const toml::table& t, const char* key, const std::string& sec, F&& conv) {
  const toml::array* arr = t.get_as<toml::array>(key);
  if (!arr) throw ConfigError("[" + sec + "] " + key + " must be an array");
  std::vector<T> out;
  for (const auto& e : *arr) out.push_back(conv(e));
  return out;
}

}  // namespace

ExperimentConfig load_config_toml(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  check_keys(root, "root", {"dataset", "synthetic", "experiment", "model", "train"});
  ExperimentConfig cfg;

  if (const auto* t = section(root, "dataset")) {
    check_keys(*t, "dataset", {"path", "name", "test_snapshots"});
    assign(cfg.dataset_path, *t, "path", "dataset");
    assign(cfg.dataset_name, *t, "name", "dataset");
    assign(cfg.test_snapshots, *t, "test_snapshots", "dataset");
  }
  if (const auto* t = section(root, "synthetic")) {
    check_keys(*t, "synthetic",
               {"n_nodes", "n_snapshots", "n_blocks", "p_in", "p_out", "drift_prob", "seed"});
    data::SyntheticSpec s;
    assign(s.n_nodes, *t, "n_nodes", "synthetic");
    assign(s.n_snapshots, *t, "n_snapshots", "synthetic");
    assign(s.n_blocks, *t, "n_blocks", "synthetic");
    assign(s.p_in, *t, "p_in", "synthetic");
    assign(s.p_out, *t, "p_out", "synthetic");
    assign(s.drift_prob, *t, "drift_prob", "synthetic");
    assign(s.seed, *t, "seed", "synthetic");
    cfg.synthetic = s;
  }
  if (const auto* t = section(root, "experiment")) {
    const std::string sec = "experiment";
    check_keys(*t, sec,
               {"task", "seeds", "n_seeds", "seed", "sweep", "gammas", "variants", "nll_samples",
                "out", "wall_clock"});
    if (auto v = get<std::string>(*t, "task", sec)) cfg.task = task_of(*v);
    if (t->get("seeds")) {
      cfg.seeds = array_of<std::uint64_t>(*t, "seeds", sec, [&](const toml::node& n) {
        auto v = n.value<std::int64_t>();
        if (!v || *v < 0) throw ConfigError("[experiment] seeds must be non-negative integers");
        return static_cast<std::uint64_t>(*v);
      });
    } else if (t->get("n_seeds") || t->get("seed")) {
      const std::size_t n = get<std::size_t>(*t, "n_seeds", sec).value_or(1);
      const std::uint64_t base = get<std::uint64_t>(*t, "seed", sec).value_or(1);
      cfg.seeds.clear();
      for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(base + i);
    }
    if (auto v = get<std::string>(*t, "sweep", sec)) cfg.sweep = parse_sweep(*v);
    if (t->get("gammas")) {
      cfg.sweep_gammas = array_of<double>(*t, "gammas", sec, [&](const toml::node& n) {
        auto v = n.value<double>();
        if (!v) throw ConfigError("[experiment] gammas must be numbers");
        return *v;
      });
    }
    if (t->get("variants")) {
      cfg.sweep_variants =
          array_of<model::PosteriorVariant>(*t, "variants", sec, [&](const toml::node& n) {
            auto v = n.value<std::string>();
            if (!v) throw ConfigError("[experiment] variants must be strings");
            return variant_of(*v);
          });
    }
    assign(cfg.nll_samples, *t, "nll_samples", sec);
    if (auto v = get<std::string>(*t, "out", sec)) cfg.out_dir = *v;
    assign(cfg.record_wall_clock, *t, "wall_clock", sec);
  }
  if (const auto* t = section(root, "model")) {
    const std::string sec = "model";
    check_keys(*t, sec,
               {"hidden_dim", "head_dim", "latent_dim", "gnn", "variant", "gamma", "cell",
                "pos_weight", "full_pair_limit", "negative_ratio", "sivi", "sivi_layers",
                "noise_dim", "sivi_width"});
    auto& m = cfg.model;
    assign(m.hidden_dim, *t, "hidden_dim", sec);
    assign(m.head_dim, *t, "head_dim", sec);
    assign(m.latent_dim, *t, "latent_dim", sec);
    if (auto v = get<std::string>(*t, "gnn", sec)) m.gnn_type = gnn_of(*v);
    if (auto v = get<std::string>(*t, "variant", sec)) m.variant = variant_of(*v);
    assign(m.gamma, *t, "gamma", sec);
    if (auto v = get<std::string>(*t, "cell", sec)) {
      m.cell = parse_name(model::parse_cell, *v, "cell");
    }
    if (auto v = get<std::string>(*t, "pos_weight", sec)) {
      m.pos_weight_mode = parse_name(model::parse_pos_weight_mode, *v, "pos_weight");
    }
    assign(m.full_pair_limit, *t, "full_pair_limit", sec);
    assign(m.negative_ratio, *t, "negative_ratio", sec);
    assign(m.sivi.enabled, *t, "sivi", sec);
    assign(m.sivi.layers, *t, "sivi_layers", sec);
    assign(m.sivi.noise_dim, *t, "noise_dim", sec);
    assign(m.sivi.width, *t, "sivi_width", sec);
  }
  if (const auto* t = section(root, "train")) {
    const std::string sec = "train";
    check_keys(*t, sec, {"lr", "epochs", "patience", "beta1", "beta2", "epsilon"});
    auto& tr = cfg.train;
    assign(tr.learning_rate, *t, "lr", sec);
    assign(tr.epochs, *t, "epochs", sec);
    assign(tr.patience, *t, "patience", sec);
    assign(tr.beta1, *t, "beta1", sec);
    assign(tr.beta2, *t, "beta2", sec);
    assign(tr.epsilon, *t, "epsilon", sec);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_toml(ss.str());
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("SGRNN_OUT_DIR"); dir && *dir) cfg.out_dir = dir;
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  if (cfg.synthetic) {
    d.sequence = data::generate_synthetic(*cfg.synthetic).sequence;
    d.name = cfg.dataset_name.empty() ? "synthetic" : cfg.dataset_name;
    return d;
  }
  if (cfg.dataset_path.empty()) throw ConfigError("no dataset configured");
  if (!std::filesystem::exists(cfg.dataset_path)) {
    throw ConfigError("dataset file not found: " + cfg.dataset_path);
  }
  d.sequence = data::load_snapshots(cfg.dataset_path);
  d.name = cfg.dataset_name.empty() ? std::filesystem::path(cfg.dataset_path).stem().string()
                                    : cfg.dataset_name;
  return d;
}

// ---------------------------------------------------------------------------
// Runs

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                                      const ProgressCallback& progress) {
  cfg.validate();
  std::vector<model::SgrnnConfig> points;
  switch (cfg.sweep) {
    case SweepMode::kNone: points.push_back(cfg.model); break;
    case SweepMode::kGamma:
      for (double g : cfg.sweep_gammas) {
        points.push_back(cfg.model);
        points.back().gamma = g;
      }
      break;
    case SweepMode::kVariant:
      for (auto v : cfg.sweep_variants) {
        points.push_back(cfg.model);
        points.back().variant = v;
      }
      break;
  }

  std::vector<ResultRow> rows;
  const std::size_t total = points.size() * cfg.seeds.size();
  for (const auto& point : points) {
    for (std::uint64_t seed : cfg.seeds) {
      Progress p;
      p.run_index = rows.size();
      p.run_count = total;
      const train::TaskData data =
          train::prepare_task(dataset.sequence, cfg.task, cfg.test_snapshots, seed);
      const model::SgrnnModel model(train::fit_config(point, data));
      train::TrainConfig tc = cfg.train;
      tc.seed = seed;
      train::EpochCallback on_epoch;
      if (progress) {
        on_epoch = [&](const train::EpochRecord& e) {
          Progress q = p;
          q.epoch = &e;
          progress(q);
        };
      }
      train::TrainResult result = train::train(model, data, tc, on_epoch);

      ResultRow row;
      row.dataset = dataset.name;
      row.task = cfg.task;
      row.variant = point.variant;
      row.gnn_type = point.gnn_type;
      row.gamma = point.gamma;
      row.seed = seed;
      const auto scores = model::rollout_predict(model, result.params, data.graphs, data.test);
      for (const auto& s : scores) {
        const auto m = train::evaluate_auc_ap(s.pos, s.neg);
        row.test_auc.push_back(m.auc);
        row.test_ap.push_back(m.ap);
      }
      const auto mean = train::mean_auc_ap(scores);
      row.auc = mean.auc;
      row.ap = mean.ap;
      row.nll = train::estimate_nll(model, result.params, data.graphs, data.test,
                                    cfg.nll_samples, seed)
                    .total;
      if (!cfg.record_wall_clock) result.record.wall_seconds = 0.0;
      row.best_epoch = result.record.best_epoch;
      row.wall_seconds = result.record.wall_seconds;
      row.run = std::move(result.record);
      rows.push_back(std::move(row));
      if (progress) {
        p.finished = &rows.back();
        progress(p);
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string gamma_cell(double g) {
  std::ostringstream ss;
  ss << g;
  return ss.str();
}

}  // namespace

std::string format_mean_std(const std::vector<double>& values) {
  if (values.empty()) return "";
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd =
      values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  return fixed(mean, 2) + "±" + fixed(sd, 2);
}

bool same_row(const ResultRow& a, const ResultRow& b) {
  return a.dataset == b.dataset && a.task == b.task && a.variant == b.variant &&
         a.gnn_type == b.gnn_type && a.gamma == b.gamma && a.seed == b.seed && a.auc == b.auc &&
         a.ap == b.ap && a.nll == b.nll && a.best_epoch == b.best_epoch &&
         a.wall_seconds == b.wall_seconds && a.test_auc == b.test_auc && a.test_ap == b.test_ap &&
         a.run.to_json() == b.run.to_json();
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  std::size_t i = 0;
  while (i < rows.size()) {
    // Rows of one sweep point are contiguous.
    std::size_t j = i;
    const auto same_point = [&](const ResultRow& a, const ResultRow& b) {
      return a.dataset == b.dataset && a.task == b.task && a.variant == b.variant &&
             a.gnn_type == b.gnn_type && a.gamma == b.gamma;
    };
    std::vector<double> auc, ap, nll, epoch, wall;
    for (; j < rows.size() && same_point(rows[i], rows[j]); ++j) {
      const ResultRow& r = rows[j];
      out << csv_cell(r.dataset) << "," << model::to_string(r.task) << ","
          << model::to_string(r.variant) << "," << gnn::to_string(r.gnn_type) << ","
          << gamma_cell(r.gamma) << "," << r.seed << "," << fixed(100.0 * r.auc, 4) << ","
          << fixed(100.0 * r.ap, 4) << "," << fixed(r.nll, 4) << "," << r.best_epoch << ","
          << fixed(r.wall_seconds, 3) << "\n";
      auc.push_back(100.0 * r.auc);
      ap.push_back(100.0 * r.ap);
      nll.push_back(r.nll);
      epoch.push_back(static_cast<double>(r.best_epoch));
      wall.push_back(r.wall_seconds);
    }
    // Sample std needs two seeds; a lone record is its own summary.
    if (j - i < 2) {
      i = j;
      continue;
    }
    const ResultRow& r = rows[i];
    out << csv_cell(r.dataset) << "," << model::to_string(r.task) << ","
        << model::to_string(r.variant) << "," << gnn::to_string(r.gnn_type) << ","
        << gamma_cell(r.gamma) << ",aggregate," << format_mean_std(auc) << ","
        << format_mean_std(ap) << "," << format_mean_std(nll) << "," << format_mean_std(epoch)
        << "," << format_mean_std(wall) << "\n";
    i = j;
  }
  return out.str();
}

std::string results_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"dataset", r.dataset},
                   {"task", model::to_string(r.task)},
                   {"variant", model::to_string(r.variant)},
                   {"gnn_type", gnn::to_string(r.gnn_type)},
                   {"gamma", r.gamma},
                   {"seed", r.seed},
                   {"auc", r.auc},
                   {"ap", r.ap},
                   {"nll", r.nll},
                   {"best_epoch", r.best_epoch},
                   {"wall_seconds", r.wall_seconds},
                   {"test_auc", r.test_auc},
                   {"test_ap", r.test_ap},
                   {"run", json::parse(r.run.to_json())}});
  }
  return json{{"format", "sgrnn-results"}, {"version", 1}, {"rows", arr}}.dump(1);
}

std::vector<ResultRow> parse_results_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "sgrnn-results" || j.at("version") != 1) {
      throw ConfigError("results: unsupported format");
    }
    std::vector<ResultRow> rows;
    for (const auto& e : j.at("rows")) {
      ResultRow r;
      r.dataset = e.at("dataset").get<std::string>();
      r.task = task_of(e.at("task").get<std::string>());
      r.variant = variant_of(e.at("variant").get<std::string>());
      r.gnn_type = gnn_of(e.at("gnn_type").get<std::string>());
      r.gamma = e.at("gamma").get<double>();
      r.seed = e.at("seed").get<std::uint64_t>();
      r.auc = e.at("auc").get<double>();
      r.ap = e.at("ap").get<double>();
      r.nll = e.at("nll").get<double>();
      r.best_epoch = e.at("best_epoch").get<std::size_t>();
      r.wall_seconds = e.at("wall_seconds").get<double>();
      r.test_auc = e.at("test_auc").get<std::vector<double>>();
      r.test_ap = e.at("test_ap").get<std::vector<double>>();
      r.run = train::RunRecord::from_json(e.at("run").dump());
      rows.push_back(std::move(r));
    }
    return rows;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("results: ") + e.what());
  }
}

void emit_results(const std::vector<ResultRow>& rows, const std::filesystem::path& dir) {
  if (rows.empty()) throw ContractError("emit_results: no records");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  const auto write = [&](const char* name, const std::string& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    if (!out) throw std::runtime_error("failed writing " + path.string());
  };
  write("results.csv", results_csv(rows));
  write("results.json", results_json(rows));
}

}  // namespace sgrnn::experiment
