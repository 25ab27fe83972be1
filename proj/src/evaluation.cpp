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

#include "kgar/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace kgar {

RankingResult rank_candidates(const Triple& test, CorruptedSide side, std::span<const Scalar> scores,
                              const TripleSet& known) {
  const EntityId target = side == CorruptedSide::head ? test.head : test.tail;
  if (target < 0 || static_cast<std::size_t>(target) >= scores.size())
    throw DimensionError("rank_candidates: target " + std::to_string(target) + " outside " +
                         std::to_string(scores.size()) + " candidates");
  const Scalar s = scores[static_cast<std::size_t>(target)];
  if (!std::isfinite(s)) throw NumericError("rank_candidates: non-finite target score");

  double raw_greater = 0, raw_equal = 0, flt_greater = 0, flt_equal = 0;
  Triple candidate = test;
  EntityId& slot = side == CorruptedSide::head ? candidate.head : candidate.tail;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (static_cast<EntityId>(e) == target) continue;
    const Scalar c = scores[e];
    if (c < s) continue;
    slot = static_cast<EntityId>(e);
    const bool filtered_out = known.count(candidate) != 0;
    if (c > s) {
      ++raw_greater;
      if (!filtered_out) ++flt_greater;
    } else {
      ++raw_equal;
      if (!filtered_out) ++flt_equal;
    }
  }
  return {test, side, 1.0 + raw_greater + 0.5 * raw_equal, 1.0 + flt_greater + 0.5 * flt_equal};
}

std::vector<RankingResult> rank_link_prediction(const Matrix& features, const ModelParams& params, DecoderKind kind,
                                                std::span<const Triple> test, const TripleSet& known) {
  std::vector<RankingResult> out;
  out.reserve(2 * test.size());
  for (const auto& t : test) {
    for (auto side : {CorruptedSide::head, CorruptedSide::tail}) {
      const Vector scores = candidate_scores(features, params, kind, t, side == CorruptedSide::head);
      out.push_back(rank_candidates(t, side, std::span<const Scalar>(scores.data(), scores.size()), known));
    }
  }
  return out;
}

double mrr(std::span<const RankingResult> results, RankSetting setting) {
  if (results.empty()) throw DataError("mrr of an empty result set");
  double total = 0;
  for (const auto& r : results) total += 1.0 / r.rank(setting);
  return total / static_cast<double>(results.size());
}

double hits_at_k(std::span<const RankingResult> results, int k, RankSetting setting) {
  if (k < 1) throw ConfigError("hits_at_k needs k >= 1");
  if (results.empty()) throw DataError("hits_at_k of an empty result set");
  std::size_t hits = 0;
  for (const auto& r : results) hits += r.rank(setting) <= k;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

LinkMetrics link_metrics(std::span<const RankingResult> results) {
  LinkMetrics m;
  m.mrr_raw = mrr(results, RankSetting::raw);
  m.mrr_filtered = mrr(results, RankSetting::filtered);
  m.hits1 = hits_at_k(results, 1, RankSetting::filtered);
  m.hits3 = hits_at_k(results, 3, RankSetting::filtered);
  m.hits10 = hits_at_k(results, 10, RankSetting::filtered);
  m.num_ranked = results.size();
  return m;
}

std::vector<ClassId> predict_classes(const Matrix& probabilities) {
  std::vector<ClassId> out(static_cast<std::size_t>(probabilities.rows()));
  for (Index i = 0; i < probabilities.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < probabilities.cols(); ++k)
      if (probabilities(i, k) > probabilities(i, best)) best = k;
    out[static_cast<std::size_t>(i)] = static_cast<ClassId>(best);
  }
  return out;
}

double classification_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels) {
  if (predictions.size() != labels.size())
    throw DataError("classification_accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(labels.size()) + " labels");
  if (labels.empty()) throw DataError("classification_accuracy: no labeled nodes");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string link_report_json(const std::string& dataset, const LinkMetrics& m) {
  nlohmann::ordered_json j;
  j["task"] = "linkpred";
  j["dataset"] = dataset;
  j["mrr_raw"] = m.mrr_raw;
  j["mrr_filtered"] = m.mrr_filtered;
  j["hits1"] = m.hits1;
  j["hits3"] = m.hits3;
  j["hits10"] = m.hits10;
  return j.dump(2);
}

std::string classify_report_json(const std::string& dataset, double accuracy) {
  nlohmann::ordered_json j;
  j["task"] = "classify";
  j["dataset"] = dataset;
  j["accuracy"] = accuracy;
  return j.dump(2);
}

std::string link_report_csv_header() { return "task,dataset,mrr_raw,mrr_filtered,hits1,hits3,hits10"; }

std::string link_report_csv_row(const std::string& dataset, const LinkMetrics& m) {
  return "linkpred," + dataset + "," + fmt(m.mrr_raw) + "," + fmt(m.mrr_filtered) + "," + fmt(m.hits1) + "," +
         fmt(m.hits3) + "," + fmt(m.hits10);
}

std::string classify_report_csv_header() { return "task,dataset,accuracy"; }

std::string classify_report_csv_row(const std::string& dataset, double accuracy) {
  return "classify," + dataset + "," + fmt(accuracy);
}

}  // namespace kgar
