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

// kgar: preprocess, train, evaluate, repro-table, synth.
//
// Exit codes: 0 success, 1 usage, 2 data, 3 numeric failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "kgar/pipeline.hpp"
#include "kgar/synthetic.hpp"

namespace {

using namespace kgar;

enum Exit { ok = 0, usage = 1, data = 2, numeric = 3 };

std::string flag_name(const std::string& key) {
  std::string s = "--" + key;
  for (auto& c : s)
    if (c == '_') c = '-';
  return s;
}

bool is_switch(const std::string& key) { return key == "filtered_negatives" || key == "dedup"; }

/// One CLI option per config field; only fields given on the command line
/// become settings, so lower layers keep their values.
struct FieldOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app, const std::vector<std::string>& skip = {}) {
    for (const auto& f : config_fields()) {
      if (std::find(skip.begin(), skip.end(), f.key) != skip.end()) continue;
      std::string desc = f.help;
      if (!f.classify_default.empty() || !f.linkpred_default.empty()) {
        desc += f.classify_default == f.linkpred_default
                    ? " [default " + f.classify_default
                    : " [default classify " + f.classify_default + ", linkpred " + f.linkpred_default;
        desc += "; " + f.provenance + "]";
      } else {
        desc += " [" + f.provenance + "]";
      }
      if (is_switch(f.key))
        options[f.key] = app.add_flag(flag_name(f.key), switches[f.key], desc);
      else
        options[f.key] = app.add_option(flag_name(f.key), values[f.key], desc);
    }
  }

  Settings given() const {
    Settings s;
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      s[key] = is_switch(key) ? (switches.at(key) ? "true" : "false") : values.at(key);
    }
    return s;
  }
};

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgar: attention-weighted relational graph convolution for knowledge graphs"};
  app.require_subcommand(1);
  app.footer(
      "Datasets: a directory path, or a name under $KGAR_DATA_DIR or ./data.\n"
      "Settings precedence: command line > --config file > dataset.conf > built-in defaults.\n"
      "Exit codes: 0 success, 1 usage, 2 data, 3 numeric failure.");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Build the vocabulary/index bundle for a dataset");
  std::string pre_dataset, pre_config;
  pre->add_option("dataset", pre_dataset, "dataset directory or name")->required();
  pre->add_option("--config", pre_config, "key=value settings file");
  FieldOptions pre_fields;
  pre->add_option("--drop-relations", pre_fields.values["drop_relations"],
                  "comma-separated relation names to remove [default from dataset.conf]");
  pre_fields.options["drop_relations"] = pre->get_option("--drop-relations");
  pre_fields.options["dedup"] = pre->add_flag("--dedup", pre_fields.switches["dedup"], "remove exact duplicate triples");

  // train
  auto* train = app.add_subcommand("train", "Train a model and write snapshot, loss log and metrics");
  std::string train_config, train_out;
  train->add_option("--config", train_config, "key=value settings file");
  train->add_option("--out", train_out, "output directory [default runs/<dataset>-<task>-seed<seed>]");
  FieldOptions train_fields;
  train_fields.attach(*train);
  std::string fields_help = "\nConfig fields (key = default; provenance):\n";
  for (const auto& f : config_fields())
    fields_help += "  " + f.key + " = " +
                   (f.classify_default == f.linkpred_default ? f.classify_default
                                                             : f.classify_default + " | " + f.linkpred_default) +
                   "; " + f.provenance + "\n";
  train->footer(fields_help + "Defaults shown as 'a | b' differ by task (classify | linkpred).");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score a snapshot on its dataset's test split");
  std::string eval_snapshot, eval_dataset, eval_task, eval_format = "json", eval_out;
  eval->add_option("--snapshot", eval_snapshot, "snapshot file")->required();
  eval->add_option("--dataset", eval_dataset, "dataset override [default: the one it was trained on]");
  eval->add_option("--task", eval_task, "expected task (classify or linkpred)");
  eval->add_option("--format", eval_format, "json or csv [default json]")->check(CLI::IsMember({"json", "csv"}));
  eval->add_option("--out", eval_out, "also write the report to this file");

  // repro-table
  auto* repro = app.add_subcommand("repro-table", "Re-run the rows of a results table (2: classification, 4: links)");
  int repro_table = 0, repro_seeds = 5;
  std::string repro_scale = "desk", repro_out = "runs/repro";
  repro->add_option("table", repro_table, "2 or 4")->required()->check(CLI::IsMember({2, 4}));
  repro->add_option("--scale", repro_scale, "desk or full [default desk]")->check(CLI::IsMember({"desk", "full"}));
  repro->add_option("--seeds", repro_seeds, "seeds per classification row [default 5]");
  repro->add_option("--out", repro_out, "output directory [default runs/repro]");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the planted-pattern link prediction graph");
  std::string synth_out = "data/synthetic";
  std::uint64_t synth_seed = 13;
  synth->add_option("--out", synth_out, "output directory [default data/synthetic]");
  synth->add_option("--seed", synth_seed, "split seed [default 13]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    if (*pre) {
      Settings s = pre_fields.given();
      s["dataset"] = pre_dataset;
      const auto config = configure_run(s, optional_path(pre_config));
      const auto d = load_dataset(config.dataset_dir, config.task, config.drop_relations, config.dedup);
      for (const auto& u : d.unknown_drops) std::cerr << "warning: relation to drop not found: " << u << "\n";
      const auto b = write_bundle(d);
      std::cout << "bundle " << b.dir.string() << "\n"
                << "entities " << b.num_entities << "\nrelations " << b.num_relations << "\ntrain " << b.num_train
                << "\nvalid " << b.num_valid << "\ntest " << b.num_test << "\n";
      if (config.task == Task::classify)
        std::cout << "labeled_train " << b.num_labeled_train << "\nlabeled_test " << b.num_labeled_test
                  << "\nclasses " << b.num_classes << "\n";
      std::cout << "dropped_triples " << d.dropped_triples << "\nduplicate_triples " << d.duplicate_triples
                << "\nchecksum " << b.checksum << "\n";
    } else if (*train) {
      const auto config = configure_run(train_fields.given(), optional_path(train_config));
      const std::filesystem::path out =
          train_out.empty() ? std::filesystem::path("runs") / (config.dataset_name + "-" + task_name(config.task) +
                                                               "-seed" + std::to_string(config.seed))
                            : std::filesystem::path(train_out);
      const auto run = train_and_save(config, out, &std::cerr);
      std::cerr << "snapshot " << run.snapshot.string() << " (" << run.seconds << " s)\n";
      std::cout << run.test.json() << "\n";
    } else if (*eval) {
      std::optional<Task> task;
      if (!eval_task.empty()) task = parse_task(eval_task);
      std::optional<std::string> dataset;
      if (!eval_dataset.empty()) dataset = eval_dataset;
      const auto m = evaluate_snapshot(eval_snapshot, dataset, task);
      const std::string report = eval_format == "json" ? m.json() + "\n" : m.csv_header() + "\n" + m.csv_row() + "\n";
      std::cout << report;
      if (!eval_out.empty()) {
        std::ofstream f(eval_out);
        if (!f) throw IoError("cannot write " + eval_out);
        f << report;
      }
    } else if (*repro) {
      ReproOptions o;
      o.table = repro_table;
      o.scale = repro_scale == "full" ? Scale::full : Scale::desk;
      o.out_dir = repro_out;
      o.seeds = repro_seeds;
      const int missing = reproduce_table(o, &std::cerr);
      if (missing > 0 && o.scale == Scale::desk) return data;
    } else if (*synth) {
      SyntheticOptions o;
      o.seed = synth_seed;
      const auto g = generate_synthetic(o);
      write_synthetic(g, synth_out, synthetic_defaults());
      std::cout << "wrote " << synth_out << ": " << g.train.size() << " train, " << g.valid.size() << " valid, "
                << g.test.size() << " test triples\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return numeric;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return data;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return data;
  }
  return ok;
}
