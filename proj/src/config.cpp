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

#include "kgar/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace kgar {

const char* task_name(Task t) { return t == Task::classify ? "classify" : "linkpred"; }

Task parse_task(const std::string& s) {
  if (s == "classify") return Task::classify;
  if (s == "linkpred") return Task::linkpred;
  throw ConfigError("task must be classify or linkpred, got '" + s + "'");
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      {"dataset", "dataset directory (relative names resolve under KGAR_DATA_DIR)", "", "", "required"},
      {"task", "classify or linkpred", "classify", "classify", "chosen"},
      {"embed_dim", "entity embedding and hidden width", "500", "500", "published tuned value"},
      {"num_layers", "stacked convolution layers", "2", "2", "published tuned value"},
      {"num_blocks", "diagonal blocks per relation weight; must divide embed_dim", "10", "10",
       "unspecified upstream; chosen to divide 500"},
      {"dropout_attention", "dropout on attention coefficients", "0.6", "0.6", "published tuned value"},
      {"dropout_conv", "dropout on the convolution pre-activation", "0.4", "0.5", "published tuned value"},
      {"l2", "L2 coefficient (classify: relation blocks; linkpred: decoder and entity features)", "0.0005", "0.01",
       "published tuned value"},
      {"learning_rate", "step size", "0.01", "0.01", "classify: tuned here; linkpred: published"},
      {"batch_size", "positives per step (linkpred) or labeled nodes per step, 0 = all (classify)", "0", "50",
       "linkpred: published; classify: full batch"},
      {"iterations", "optimisation steps", "50", "6000", "classify: tuned here; linkpred: published"},
      {"seed", "random seed", "1", "1", "chosen"},
      {"decoder", "complex or distmult", "complex", "complex", "published model; distmult is the baseline"},
      {"init", "scaled or std-normal", "scaled", "scaled", "scaled chosen; std-normal is the literal reading"},
      {"filtered_negatives", "redraw corruptions that hit known triples", "false", "false",
       "off: the published procedure does not filter"},
      {"optimizer", "gd or adam", "gd", "gd", "plain gradient descent as published"},
      {"eval_interval", "validation every N iterations, 0 = only at the end", "0", "500", "chosen"},
      {"drop_relations", "comma-separated relation names removed before training", "", "",
       "per-dataset lists ship in dataset.conf"},
      {"dedup", "remove exact duplicate triples", "false", "false", "keep duplicates by default"},
  };
  return fields;
}

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool known_key(const std::string& key) {
  const auto& f = config_fields();
  return std::any_of(f.begin(), f.end(), [&](const ConfigField& c) { return c.key == key; });
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');)
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Settings read_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  Settings out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    // '#' opens a comment at line start or after whitespace; URIs keep theirs
    for (std::size_t pos = line.find('#'); pos != std::string::npos; pos = line.find('#', pos + 1))
      if (pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == '\t') {
        line.erase(pos);
        break;
      }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ParseError(where + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (!known_key(key)) throw ParseError(where + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig resolve_config(const std::vector<Settings>& layers) {
  Settings merged;
  for (const auto& layer : layers)
    for (const auto& [k, v] : layer) {
      if (!known_key(k)) throw ConfigError("unknown setting '" + k + "'");
      merged[k] = v;
    }
  const Task task = merged.count("task") ? parse_task(merged.at("task")) : Task::classify;
  for (const auto& f : config_fields())
    if (!merged.count(f.key)) merged[f.key] = task == Task::classify ? f.classify_default : f.linkpred_default;

  RunConfig c;
  c.task = task;
  c.dataset_dir = merged["dataset"];
  c.dataset_name = c.dataset_dir.filename().string();
  if (c.dataset_name.empty()) c.dataset_name = c.dataset_dir.parent_path().filename().string();
  c.embed_dim = parse_integer<Index>("embed_dim", merged["embed_dim"]);
  c.num_layers = parse_integer<int>("num_layers", merged["num_layers"]);
  c.num_blocks = parse_integer<Index>("num_blocks", merged["num_blocks"]);
  c.dropout_attention = parse_real("dropout_attention", merged["dropout_attention"]);
  c.dropout_conv = parse_real("dropout_conv", merged["dropout_conv"]);
  c.l2 = parse_real("l2", merged["l2"]);
  c.learning_rate = parse_real("learning_rate", merged["learning_rate"]);
  c.batch_size = parse_integer<Index>("batch_size", merged["batch_size"]);
  c.iterations = parse_integer<int>("iterations", merged["iterations"]);
  c.seed = parse_integer<std::uint64_t>("seed", merged["seed"]);
  const auto& dec = merged["decoder"];
  if (dec == "complex") c.decoder = DecoderKind::complex;
  else if (dec == "distmult") c.decoder = DecoderKind::distmult;
  else throw ConfigError("decoder must be complex or distmult, got '" + dec + "'");
  const auto& init = merged["init"];
  if (init == "scaled") c.init = InitScheme::scaled;
  else if (init == "std-normal") c.init = InitScheme::std_normal;
  else throw ConfigError("init must be scaled or std-normal, got '" + init + "'");
  c.filtered_negatives = parse_bool("filtered_negatives", merged["filtered_negatives"]);
  const auto& opt = merged["optimizer"];
  if (opt == "gd") c.optimizer = OptimizerKind::gd;
  else if (opt == "adam") c.optimizer = OptimizerKind::adam;
  else throw ConfigError("optimizer must be gd or adam, got '" + opt + "'");
  c.eval_interval = parse_integer<int>("eval_interval", merged["eval_interval"]);
  c.drop_relations = split_list(merged["drop_relations"]);
  c.dedup = parse_bool("dedup", merged["dedup"]);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  encoder().validate();
  if (decoder == DecoderKind::complex && embed_dim % 2 != 0)
    throw ConfigError("embed_dim must be even for the complex decoder, got " + std::to_string(embed_dim));
  if (!(l2 >= 0)) throw ConfigError("l2 must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
  if (task == Task::linkpred && batch_size == 0) throw ConfigError("batch_size must be >= 1 for linkpred");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (eval_interval < 0) throw ConfigError("eval_interval must be >= 0");
}

EncoderConfig RunConfig::encoder() const {
  EncoderConfig e;
  e.embed_dim = embed_dim;
  e.num_layers = num_layers;
  e.num_blocks = num_blocks;
  e.dropout_attention = dropout_attention;
  e.dropout_conv = dropout_conv;
  e.init = init;
  return e;
}

Settings RunConfig::to_settings() const {
  Settings s;
  s["dataset"] = dataset_dir.string();
  s["task"] = task_name(task);
  s["embed_dim"] = std::to_string(embed_dim);
  s["num_layers"] = std::to_string(num_layers);
  s["num_blocks"] = std::to_string(num_blocks);
  s["dropout_attention"] = format_real(dropout_attention);
  s["dropout_conv"] = format_real(dropout_conv);
  s["l2"] = format_real(l2);
  s["learning_rate"] = format_real(learning_rate);
  s["batch_size"] = std::to_string(batch_size);
  s["iterations"] = std::to_string(iterations);
  s["seed"] = std::to_string(seed);
  s["decoder"] = decoder_name(decoder);
  s["init"] = init == InitScheme::scaled ? "scaled" : "std-normal";
  s["filtered_negatives"] = filtered_negatives ? "true" : "false";
  s["optimizer"] = optimizer == OptimizerKind::gd ? "gd" : "adam";
  s["eval_interval"] = std::to_string(eval_interval);
  std::string drops;
  for (const auto& d : drop_relations) drops += (drops.empty() ? "" : ",") + d;
  s["drop_relations"] = drops;
  s["dedup"] = dedup ? "true" : "false";
  return s;
}

}  // namespace kgar
