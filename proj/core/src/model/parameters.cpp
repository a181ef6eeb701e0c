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

#include "sgrnn/model/parameters.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgrnn/errors.hpp"

namespace sgrnn::model {

using nlohmann::json;

void ParameterStore::add(const std::string& key, ad::Tensor value) {
  if (!values_.emplace(key, std::move(value)).second) {
    throw ContractError("parameter '" + key + "' already exists");
  }
}

const ad::Tensor& ParameterStore::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ContractError("unknown parameter '" + key + "'");
  return it->second;
}

ad::Tensor& ParameterStore::at(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ContractError("unknown parameter '" + key + "'");
  return it->second;
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [k, v] : values_) n += v.size();
  return n;
}

bool ParameterStore::all_finite() const noexcept {
  for (const auto& [k, v] : values_)
    if (!v.all_finite()) return false;
  return true;
}

ParameterStore ParameterStore::zeros_like() const {
  ParameterStore out;
  for (const auto& [k, v] : values_) out.add(k, ad::Tensor(v.rows(), v.cols()));
  return out;
}

std::string ParameterStore::to_json() const {
  json params = json::object();
  for (const auto& [key, t] : values_) {
    if (!t.all_finite()) throw ContractError("parameter '" + key + "' is not finite");
    params[key] = {{"rows", t.rows()}, {"cols", t.cols()}, {"values", t.values()}};
  }
  json doc = {{"format", "sgrnn-params"}, {"version", 1}, {"params", params}};
  return doc.dump();
}

ParameterStore ParameterStore::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "sgrnn-params" || doc.value("version", 0) != 1) {
    throw ConfigError("unsupported checkpoint format");
  }
  ParameterStore out;
  for (const auto& [key, entry] : doc.at("params").items()) {
    const auto rows = entry.at("rows").get<std::size_t>();
    const auto cols = entry.at("cols").get<std::size_t>();
    auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != rows * cols) {
      throw ConfigError("checkpoint entry '" + key + "' has the wrong number of values");
    }
    out.add(key, ad::Tensor(ad::Shape{rows, cols}, std::move(values)));
  }
  return out;
}

void ParameterStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json() << '\n';
}

ParameterStore ParameterStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

ad::Var TapeBinding::operator()(const std::string& key) {
  auto it = bound_.find(key);
  if (it != bound_.end()) return it->second;
  ad::Var v = tape_.leaf(store_.at(key));
  bound_.emplace(key, v);
  return v;
}

void TapeBinding::bind(const std::string& key, ad::Var v) {
  if (v.shape() != store_.at(key).shape()) {
    throw ShapeError("bind: '" + key + "' expects shape " + store_.at(key).shape().str());
  }
  bound_[key] = v;
}

ParameterStore TapeBinding::gradients() const {
  ParameterStore out;
  for (const auto& [key, value] : store_.entries()) {
    auto it = bound_.find(key);
    out.add(key, it == bound_.end() ? ad::Tensor(value.rows(), value.cols()) : it->second.grad());
  }
  return out;
}

}  // namespace sgrnn::model
