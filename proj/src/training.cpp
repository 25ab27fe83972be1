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

#include "kgar/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace kgar {

void TrainingLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  out << "iteration,loss,valid_metric\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.loss << ',';
    if (!std::isnan(r.valid_metric)) out << r.valid_metric;
    out << '\n';
  }
}

ModelParams init_model(const RunConfig& config, Index num_entities, Index num_relations, Index num_classes,
                       std::mt19937_64& rng) {
  config.validate();
  ModelParams params;
  const bool classify = config.task == Task::classify;
  add_encoder_params(params, config.encoder(), num_entities, num_relations, rng, /*regularize_blocks=*/classify);
  if (classify) {
    if (num_classes < 2) throw DataError("classification needs at least 2 classes, got " + std::to_string(num_classes));
    add_classifier_params(params, config.embed_dim, num_classes, rng);
  } else {
    add_link_decoder_params(params, config.decoder, config.embed_dim, num_relations, rng, /*regularized=*/true);
  }
  return params;
}

LabeledNodes labeled_nodes(const LabelSet& labels) {
  LabeledNodes out;
  for (const auto& [node, cls] : labels.pairs) {
    out.nodes.push_back(node);
    out.labels.push_back(cls);
  }
  return out;
}

namespace {

class Stepper {
 public:
  explicit Stepper(const RunConfig& c) : kind_(c.optimizer), lr_(c.learning_rate), adam_(c.learning_rate) {}
  void step(ModelParams& params) {
    if (kind_ == OptimizerKind::adam)
      adam_.step(params);
    else
      sgd_step(params, lr_);
  }

 private:
  OptimizerKind kind_;
  double lr_;
  AdamOptimizer adam_;
};

void check_loss(double loss, int iteration) {
  if (!std::isfinite(loss))
    throw NumericError("non-finite loss at iteration " + std::to_string(iteration));
}

}  // namespace

TrainResult train_classifier(const RunConfig& config, const EncoderGraph& graph, Index num_classes,
                             const LabeledNodes& train, const LabeledNodes& valid, const IterationHook& hook) {
  if (train.size() == 0) throw DataError("no labeled training nodes");
  std::mt19937_64 rng(config.seed);
  TrainResult result{init_model(config, graph.num_entities, graph.num_relations, num_classes, rng), {}};
  auto& params = result.params;
  const auto enc = config.encoder();
  Stepper stepper(config);

  const bool minibatch = config.batch_size > 0 && static_cast<std::size_t>(config.batch_size) < train.size();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int it = 1; it <= config.iterations; ++it) {
    std::vector<EntityId> nodes = train.nodes;
    std::vector<ClassId> labels = train.labels;
    if (minibatch) {
      std::shuffle(order.begin(), order.end(), rng);
      nodes.clear();
      labels.clear();
      for (Index k = 0; k < config.batch_size; ++k) {
        nodes.push_back(train.nodes[order[static_cast<std::size_t>(k)]]);
        labels.push_back(train.labels[order[static_cast<std::size_t>(k)]]);
      }
    }
    LogRow row{it};
    {
      Tape tape;
      Var features = encode(tape, graph, params, enc, /*training=*/true, rng);
      Var probs = classify_forward(features, tape.parameter(params.at(class_head_name())), nodes);
      Var loss = add(classification_loss(probs, labels), l2_penalty(tape, params, config.l2));
      row.loss = loss.scalar();
      check_loss(row.loss, it);
      tape.backward(loss);
    }
    stepper.step(params);
    const bool eval_now = (config.eval_interval > 0 && it % config.eval_interval == 0) || it == config.iterations;
    if (eval_now && valid.size() > 0) row.valid_metric = evaluate_classifier(config, graph, params, valid);
    result.log.rows.push_back(row);
    if (hook) hook(row);
  }
  return result;
}

TrainResult train_link_predictor(const RunConfig& config, const EncoderGraph& graph, std::span<const Triple> train,
                                 std::span<const Triple> valid, const TripleSet& known, const IterationHook& hook) {
  if (train.empty()) throw DataError("no training triples");
  std::mt19937_64 rng(config.seed);
  TrainResult result{init_model(config, graph.num_entities, graph.num_relations, 0, rng), {}};
  auto& params = result.params;
  const auto enc = config.encoder();
  Stepper stepper(config);

  std::vector<Triple> pool(train.begin(), train.end());
  std::size_t cursor = pool.size();  // forces a shuffle on the first draw
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int it = 1; it <= config.iterations; ++it) {
    std::vector<Triple> positives;
    positives.reserve(batch);
    while (positives.size() < batch) {
      if (cursor == pool.size()) {
        std::shuffle(pool.begin(), pool.end(), rng);
        cursor = 0;
      }
      positives.push_back(pool[cursor++]);
    }
    const auto samples = sample_negatives(positives, graph.num_entities, rng,
                                          config.filtered_negatives ? &known : nullptr);
    LogRow row{it};
    {
      Tape tape;
      Var features = encode(tape, graph, params, enc, /*training=*/true, rng);
      Var scores = link_scores(tape, features, params, config.decoder, samples);
      Var loss = add(link_loss(scores, samples), add(l2_penalty(tape, params, config.l2),
                                                     entity_feature_penalty(features, samples, config.l2)));
      row.loss = loss.scalar();
      check_loss(row.loss, it);
      tape.backward(loss);
    }
    stepper.step(params);
    const bool eval_now = (config.eval_interval > 0 && it % config.eval_interval == 0) || it == config.iterations;
    if (eval_now && !valid.empty())
      row.valid_metric = evaluate_link_predictor(config, graph, params, valid, known).mrr_filtered;
    result.log.rows.push_back(row);
    if (hook) hook(row);
  }
  return result;
}

Matrix infer_features(const RunConfig& config, const EncoderGraph& graph, ModelParams& params) {
  std::mt19937_64 unused(0);
  Tape tape;
  return encode(tape, graph, params, config.encoder(), /*training=*/false, unused).value();
}

Matrix predict_probabilities(const RunConfig& config, const EncoderGraph& graph, ModelParams& params,
                             std::span<const EntityId> nodes) {
  std::mt19937_64 unused(0);
  Tape tape;
  Var features = encode(tape, graph, params, config.encoder(), /*training=*/false, unused);
  return classify_forward(features, tape.parameter(params.at(class_head_name())), nodes).value();
}

double evaluate_classifier(const RunConfig& config, const EncoderGraph& graph, ModelParams& params,
                           const LabeledNodes& nodes) {
  const Matrix probs = predict_probabilities(config, graph, params, nodes.nodes);
  return classification_accuracy(predict_classes(probs), nodes.labels);
}

LinkMetrics evaluate_link_predictor(const RunConfig& config, const EncoderGraph& graph, ModelParams& params,
                                    std::span<const Triple> test, const TripleSet& known) {
  const Matrix features = infer_features(config, graph, params);
  const auto results = rank_link_prediction(features, params, config.decoder, test, known);
  return link_metrics(results);
}

}  // namespace kgar
