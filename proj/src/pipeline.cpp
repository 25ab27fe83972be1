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

#include "kgar/pipeline.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>


namespace kgar {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

RunConfig configure_run(const Settings& command_line, const std::optional<fs::path>& config_file) {
  Settings file_layer;
  if (config_file) file_layer = read_settings(*config_file);
  std::string dataset;
  if (auto it = file_layer.find("dataset"); it != file_layer.end()) dataset = it->second;
  if (auto it = command_line.find("dataset"); it != command_line.end()) dataset = it->second;
  if (dataset.empty()) throw ConfigError("no dataset given (--dataset or dataset= in the config file)");
  const fs::path dir = fs::absolute(resolve_dataset_dir(dataset)).lexically_normal();

  Settings base{{"task", task_name(detect_task(dir))}};
  Settings resolved{{"dataset", dir.string()}};
  return resolve_config({base, read_dataset_conf(dir), file_layer, command_line, resolved});
}

// ---------------------------------------------------------------------------

std::string Metrics::json() const {
  return task == Task::classify ? classify_report_json(dataset, accuracy) : link_report_json(dataset, link);
}

std::string Metrics::csv_header() const {
  return task == Task::classify ? classify_report_csv_header() : link_report_csv_header();
}

std::string Metrics::csv_row() const {
  return task == Task::classify ? classify_report_csv_row(dataset, accuracy) : link_report_csv_row(dataset, link);
}

namespace {

std::string snapshot_meta(const RunConfig& c, const Dataset& d) {
  ordered_json m;
  m["task"] = task_name(c.task);
  m["dataset"] = d.name;
  m["num_entities"] = d.vocab.entities.size();
  m["num_relations"] = d.vocab.relations.size();
  m["num_classes"] = d.classes.size();
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : c.to_settings()) cfg[k] = v;
  m["config"] = cfg;
  return m.dump();
}

Dataset load_for(const RunConfig& c) { return load_dataset(c.dataset_dir, c.task, c.drop_relations, c.dedup); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

Metrics score(const RunConfig& c, const Dataset& d, const EncoderGraph& graph, ModelParams& params) {
  Metrics m;
  m.task = c.task;
  m.dataset = d.name;
  if (c.task == Task::classify) {
    m.accuracy = evaluate_classifier(c, graph, params, labeled_nodes(d.labels_test));
  } else {
    m.link = evaluate_link_predictor(c, graph, params, d.test, d.known());
  }
  return m;
}

struct LoadedSnapshot {
  RunConfig config;
  Snapshot snapshot;
  Dataset dataset;
};

LoadedSnapshot open_snapshot(const fs::path& path, const std::optional<std::string>& dataset,
                             const std::optional<Task>& task) {
  LoadedSnapshot out{{}, load_snapshot(path), {}};
  ordered_json meta;
  try {
    meta = ordered_json::parse(out.snapshot.meta_json);
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": unreadable snapshot metadata: " + e.what());
  }
  if (!meta.contains("config") || !meta.contains("task")) throw DataError(path.string() + ": snapshot has no run config");
  Settings s;
  for (const auto& [k, v] : meta["config"].items()) s[k] = v.get<std::string>();
  const Task trained = parse_task(s["task"]);
  if (task && *task != trained)
    throw DataError("snapshot " + path.string() + " was trained for " + task_name(trained) + ", not " +
                    task_name(*task));
  if (dataset) s["dataset"] = fs::absolute(resolve_dataset_dir(*dataset)).lexically_normal().string();
  out.config = resolve_config({s});
  out.dataset = load_for(out.config);

  const auto& d = out.dataset;
  const auto ne = static_cast<Index>(d.vocab.entities.size()), nr = static_cast<Index>(d.vocab.relations.size());
  check_encoder_params(out.snapshot.params, out.config.encoder(), ne, nr);
  auto expect = [&](const std::string& name, Index rows, Index cols) {
    if (!out.snapshot.params.contains(name)) throw DimensionError("snapshot lacks parameter " + name);
    const auto& v = out.snapshot.params.at(name).value;
    if (v.rows() != rows || v.cols() != cols)
      throw DimensionError("parameter " + name + " has shape " + shape_str(v) + ", dataset needs " +
                           std::to_string(rows) + "x" + std::to_string(cols));
  };
  const Index dim = out.config.embed_dim;
  if (trained == Task::classify) {
    expect(class_head_name(), dim, static_cast<Index>(d.classes.size()));
  } else if (out.config.decoder == DecoderKind::complex) {
    expect(relation_real_name(), nr, dim / 2);
    expect(relation_imag_name(), nr, dim / 2);
  } else {
    expect(relation_diag_name(), nr, dim);
  }
  return out;
}

}  // namespace

TrainOutcome train_and_save(const RunConfig& config, const fs::path& out_dir, std::ostream* progress) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset d = load_for(config);
  if (progress) {
    *progress << "dataset " << d.name << ": " << d.vocab.entities.size() << " entities, " << d.vocab.relations.size()
              << " relations, " << d.train.size() << " train triples\n";
    for (const auto& u : d.unknown_drops) *progress << "warning: relation to drop not found: " << u << "\n";
  }
  const auto graph = EncoderGraph::from(d.graph());
  const int every = std::max(1, config.iterations / 20);
  IterationHook hook;
  if (progress)
    hook = [&](const LogRow& r) {
      if (r.iteration % every == 0 || r.iteration == 1 || !std::isnan(r.valid_metric)) {
        *progress << "iter " << r.iteration << " loss " << r.loss;
        if (!std::isnan(r.valid_metric)) *progress << " valid " << r.valid_metric;
        *progress << "\n" << std::flush;
      }
    };

  TrainResult result = config.task == Task::classify
                           ? train_classifier(config, graph, static_cast<Index>(d.classes.size()),
                                              labeled_nodes(d.labels_train), {}, hook)
                           : train_link_predictor(config, graph, d.train, d.valid, d.known(), hook);

  fs::create_directories(out_dir);
  TrainOutcome out;
  out.snapshot = out_dir / "snapshot.kgar";
  out.loss_log = out_dir / "loss.csv";
  save_snapshot(out.snapshot, result.params, snapshot_meta(config, d));
  result.log.write_csv(out.loss_log);
  std::string conf;
  for (const auto& [k, v] : config.to_settings()) conf += k + " = " + v + "\n";
  write_text(out_dir / "run.conf", conf);
  out.test = score(config, d, graph, result.params);
  write_text(out_dir / "metrics.json", out.test.json() + "\n");
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Metrics evaluate_snapshot(const fs::path& snapshot, const std::optional<std::string>& dataset,
                          const std::optional<Task>& task) {
  auto loaded = open_snapshot(snapshot, dataset, task);
  const auto graph = EncoderGraph::from(loaded.dataset.graph());
  return score(loaded.config, loaded.dataset, graph, loaded.snapshot.params);
}

LinkMetrics link_metrics_for_relations(const fs::path& snapshot, const std::vector<std::string>& relations) {
  auto loaded = open_snapshot(snapshot, std::nullopt, Task::linkpred);
  const auto& d = loaded.dataset;
  std::set<RelationId> wanted;
  for (const auto& r : relations)
    if (auto id = d.vocab.relations.find(r)) wanted.insert(*id);
  std::vector<Triple> subset;
  for (const auto& t : d.test)
    if (wanted.count(t.relation)) subset.push_back(t);
  if (subset.empty()) throw DataError("no test triples carry the requested relations");
  const auto graph = EncoderGraph::from(d.graph());
  return evaluate_link_predictor(loaded.config, graph, loaded.snapshot.params, subset, d.known());
}

// ---------------------------------------------------------------------------
// tables

namespace {

struct ClassRow {
  std::string dataset;
  double reference;
  double reference_rgcn;
};

struct LinkRow {
  std::string dataset;
  DecoderKind decoder;
  std::array<double, 5> reference;  // mrr raw, mrr filtered, hits 1/3/10
};

std::string fmt(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::optional<fs::path> find_dataset(const std::string& name, std::ostream* progress) {
  try {
    return resolve_dataset_dir(name);
  } catch (const DataError& e) {
    if (progress) *progress << "warning: skipping row: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int reproduce_table(const ReproOptions& o, std::ostream* progress) {
  if (o.table != 2 && o.table != 4) throw ConfigError("table must be 2 or 4, got " + std::to_string(o.table));
  if (o.seeds < 1) throw ConfigError("seeds must be >= 1");
  fs::create_directories(o.out_dir);
  const std::string scale = o.scale == Scale::desk ? "desk" : "full";
  const auto csv_path = o.out_dir / ("table" + std::to_string(o.table) + "_" + scale + ".csv");
  std::string csv;
  int missing = 0;

  if (o.table == 2) {
    std::vector<ClassRow> rows = {{"aifb", 98.10, 95.83}, {"mutag", 76.56, 75.23}};
    if (o.scale == Scale::full) {
      rows.push_back({"bgs", 86.21, 83.10});
      rows.push_back({"am", 91.34, 89.29});
    }
    csv = "dataset,seeds,mean_accuracy,best_accuracy,reference,reference_rgcn,status\n";
    for (const auto& row : rows) {
      const auto dir = find_dataset(row.dataset, progress);
      if (!dir) {
        ++missing;
        csv += row.dataset + ",0,,," + fmt(row.reference, 2) + "," + fmt(row.reference_rgcn, 2) + ",missing\n";
        continue;
      }
      double total = 0, best = 0;
      for (int seed = 1; seed <= o.seeds; ++seed) {
        const auto config = configure_run({{"dataset", dir->string()}, {"task", "classify"},
                                           {"seed", std::to_string(seed)}}, std::nullopt);
        const auto run = train_and_save(config, o.out_dir / (row.dataset + "-seed" + std::to_string(seed)), progress);
        if (progress)
          *progress << row.dataset << " seed " << seed << ": accuracy " << fmt(run.test.accuracy, 2) << " ("
                    << fmt(run.seconds, 1) << " s)\n";
        total += run.test.accuracy;
        best = std::max(best, run.test.accuracy);
      }
      csv += row.dataset + "," + std::to_string(o.seeds) + "," + fmt(total / o.seeds, 2) + "," + fmt(best, 2) + "," +
             fmt(row.reference, 2) + "," + fmt(row.reference_rgcn, 2) + ",ok\n";
    }
  } else {
    const std::array<double, 5> att_gcn{0.169, 0.260, 0.166, 0.277, 0.433};
    const std::array<double, 5> distmult{0.100, 0.191, 0.106, 0.207, 0.376};
    std::vector<LinkRow> rows = {{"synthetic", DecoderKind::complex, att_gcn},
                                 {"synthetic", DecoderKind::distmult, distmult}};
    if (o.scale == Scale::full) rows.push_back({"fb15k-237", DecoderKind::complex, att_gcn});
    csv = "dataset,decoder,mrr_raw,mrr_filtered,hits1,hits3,hits10,"
          "ref_mrr_raw,ref_mrr_filtered,ref_hits1,ref_hits3,ref_hits10,status\n";
    for (const auto& row : rows) {
      std::string refs;
      for (double r : row.reference) refs += "," + fmt(r, 3);
      const std::string head = row.dataset + "," + decoder_name(row.decoder);
      const auto dir = find_dataset(row.dataset, progress);
      if (!dir) {
        ++missing;
        csv += head + ",,,,," + refs + ",missing\n";
        continue;
      }
      const auto config = configure_run({{"dataset", dir->string()}, {"task", "linkpred"},
                                         {"decoder", decoder_name(row.decoder)}}, std::nullopt);
      const auto run = train_and_save(config, o.out_dir / (row.dataset + "-" + decoder_name(row.decoder)), progress);
      const auto& m = run.test.link;
      csv += head + "," + fmt(m.mrr_raw, 4) + "," + fmt(m.mrr_filtered, 4) + "," + fmt(m.hits1, 4) + "," +
             fmt(m.hits3, 4) + "," + fmt(m.hits10, 4) + refs + ",ok\n";
    }
  }
  write_text(csv_path, csv);
  if (progress) *progress << "wrote " << csv_path.string() << "\n";
  return missing;
}

}  // namespace kgar
