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

#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "kgar/config.hpp"
#include "kgar/evaluation.hpp"

namespace kgar {

struct LogRow {
  int iteration = 0;
  double loss = 0;
  double valid_metric = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
};

struct TrainingLog {
  std::vector<LogRow> rows;

  /// CSV `iteration,loss,valid_metric`; unevaluated metrics are left empty.
  void write_csv(const std::filesystem::path& path) const;
};

/// Adds encoder and head/decoder parameters for a run. num_classes is ignored
/// for link prediction.
ModelParams init_model(const RunConfig& config, Index num_entities, Index num_relations, Index num_classes,
                       std::mt19937_64& rng);

struct LabeledNodes {
  std::vector<EntityId> nodes;
  std::vector<ClassId> labels;
  std::size_t size() const { return nodes.size(); }
};

LabeledNodes labeled_nodes(const LabelSet& labels);

/// Optional per-iteration observer (progress printing).
using IterationHook = std::function<void(const LogRow&)>;

struct TrainResult {
  ModelParams params;
  TrainingLog log;
};

/// Cross-entropy training of the encoder and classification head. The
/// validation metric is accuracy on `valid` (skipped when it is empty).
TrainResult train_classifier(const RunConfig& config, const EncoderGraph& graph, Index num_classes,
                             const LabeledNodes& train, const LabeledNodes& valid, const IterationHook& hook = {});

/// Binary cross-entropy training of the encoder and link decoder on sampled
/// positives and 1:1 corruptions. `known` feeds filtered negatives and the
/// filtered validation MRR.
TrainResult train_link_predictor(const RunConfig& config, const EncoderGraph& graph, std::span<const Triple> train,
                                 std::span<const Triple> valid, const TripleSet& known,
                                 const IterationHook& hook = {});

/// Eval-mode encoder output.
Matrix infer_features(const RunConfig& config, const EncoderGraph& graph, ModelParams& params);

/// Eval-mode class probabilities for `nodes`.
Matrix predict_probabilities(const RunConfig& config, const EncoderGraph& graph, ModelParams& params,
                             std::span<const EntityId> nodes);

double evaluate_classifier(const RunConfig& config, const EncoderGraph& graph, ModelParams& params,
                           const LabeledNodes& nodes);

LinkMetrics evaluate_link_predictor(const RunConfig& config, const EncoderGraph& graph, ModelParams& params,
                                    std::span<const Triple> test, const TripleSet& known);

}  // namespace kgar
