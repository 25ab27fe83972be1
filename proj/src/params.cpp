/*
 * Copyright 2026 The kgar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kgar/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace kgar {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

void Parameter::add_grad(const Eigen::Ref<const Matrix>& g) {
  if (g.rows() != value.rows() || g.cols() != value.cols())
    throw DimensionError("gradient " + shape_str(g) + " for parameter '" + name + "' of shape " + shape_str(value));
  if (!has_grad) {
    grad = g;
    has_grad = true;
  } else {
    grad += g;
  }
}

Parameter& ModelParams::add(std::string name, Matrix value, bool regularized) {
  if (by_name_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  by_name_[name] = params_.size();
  auto& p = params_.emplace_back();
  p.name = std::move(name);
  p.value = std::move(value);
  p.regularized = regularized;
  return p;
}

Parameter& ModelParams::add_random(std::string name, Index rows, Index cols, InitScheme scheme,
                                   std::mt19937_64& rng, bool regularized) {
  const double std = scheme == InitScheme::scaled ? std::sqrt(2.0 / static_cast<double>(rows + cols)) : 1.0;
  std::normal_distribution<double> dist(0.0, std);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return add(std::move(name), std::move(m), regularized);
}

Parameter& ModelParams::at(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConfigError("no parameter named '" + name + "'");
  return params_[it->second];
}

const Parameter& ModelParams::at(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConfigError("no parameter named '" + name + "'");
  return params_[it->second];
}

void ModelParams::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

std::size_t ModelParams::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void sgd_step(ModelParams& params, double learning_rate) {
  for (auto& p : params)
    if (!p.has_grad) throw ConfigError("sgd_step: parameter '" + p.name + "' has no gradient");
  for (auto& p : params) {
    p.value.noalias() -= learning_rate * p.grad;
    p.zero_grad();
  }
}

void AdamOptimizer::step(ModelParams& params) {
  for (auto& p : params)
    if (!p.has_grad) throw ConfigError("adam step: parameter '" + p.name + "' has no gradient");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& p : params) {
    auto [it, fresh] = moments_.try_emplace(p.name);
    auto& [m, v] = it->second;
    if (fresh) {
      m = Matrix::Zero(p.value.rows(), p.value.cols());
      v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    m = beta1_ * m + (1.0 - beta1_) * p.grad;
    v = beta2_ * v + (1.0 - beta2_) * p.grad.cwiseAbs2();
    p.value.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    p.zero_grad();
  }
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

constexpr char kMagic[8] = {'K', 'G', 'A', 'R', 'S', 'N', 'P', '1'};

}  // namespace

void save_snapshot(const std::filesystem::path& path, const ModelParams& params, const std::string& meta_json) {
  nlohmann::ordered_json header;
  header["meta"] = nlohmann::ordered_json::parse(meta_json);
  auto& list = header["params"] = nlohmann::ordered_json::array();
  for (const auto& p : params)
    list.push_back({{"name", p.name},
                    {"rows", p.value.rows()},
                    {"cols", p.value.cols()},
                    {"dtype", "f64"},
                    {"regularized", p.regularized}});
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write snapshot " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params)
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * static_cast<Index>(sizeof(double))));
  if (!out) throw IoError("short write to snapshot " + path.string());
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ParseError(path.string() + ": not a kgar snapshot");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError(path.string() + ": truncated header");

  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": bad header: " + e.what());
  }

  Snapshot snap;
  snap.meta_json = header.value("meta", nlohmann::ordered_json::object()).dump();
  for (const auto& entry : header.at("params")) {
    if (entry.at("dtype") != "f64") throw ParseError(path.string() + ": unsupported dtype");
    Matrix m(entry.at("rows").get<Index>(), entry.at("cols").get<Index>());
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * static_cast<Index>(sizeof(double))));
    if (!in) throw ParseError(path.string() + ": truncated values for '" + entry.at("name").get<std::string>() + "'");
    snap.params.add(entry.at("name").get<std::string>(), std::move(m), entry.at("regularized").get<bool>());
  }
  return snap;
}

}  // namespace kgar
