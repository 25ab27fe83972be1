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

// End-to-end runs: configuration layering, train-and-save, snapshot
// evaluation, and table reproduction. The command-line tool is a thin shell
// over these.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kgar/dataset.hpp"
#include "kgar/training.hpp"

namespace kgar {

/// Resolves the dataset, then merges (lowest first) the detected task,
/// dataset.conf, the config file, and command-line settings.
RunConfig configure_run(const Settings& command_line, const std::optional<std::filesystem::path>& config_file);

struct Metrics {
  Task task = Task::classify;
  std::string dataset;
  double accuracy = 0;  // classify
  LinkMetrics link;     // linkpred

  std::string json() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

struct TrainOutcome {
  std::filesystem::path snapshot;
  std::filesystem::path loss_log;
  Metrics test;  // held-out split, eval mode
  double seconds = 0;
};

/// Loads the dataset, trains, and writes snapshot.kgar, loss.csv,
/// run.conf and metrics.json into `out_dir`. Progress goes to `progress`
/// when it is non-null.
TrainOutcome train_and_save(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream* progress);

/// Re-reads the snapshot's dataset and scores its test split. A `task`
/// different from the snapshot's own is a DataError. The snapshot file is
/// only read.
Metrics evaluate_snapshot(const std::filesystem::path& snapshot, const std::optional<std::string>& dataset,
                          const std::optional<Task>& task);

/// Metrics restricted to test triples whose relation is in `relations`.
LinkMetrics link_metrics_for_relations(const std::filesystem::path& snapshot, const std::vector<std::string>& relations);

enum class Scale { desk, full };

struct ReproOptions {
  int table = 2;
  Scale scale = Scale::desk;
  std::filesystem::path out_dir = "runs/repro";
  int seeds = 5;
};

/// Runs every row of the table and writes table<N>_<scale>.csv in out_dir.
/// Rows whose dataset is missing are written with status "missing" and a
/// warning on `progress`. Returns the number of missing rows.
int reproduce_table(const ReproOptions& options, std::ostream* progress);

}  // namespace kgar
