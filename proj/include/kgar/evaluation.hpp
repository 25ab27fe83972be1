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

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "kgar/decoders.hpp"

namespace kgar {

enum class CorruptedSide { head, tail };
enum class RankSetting { raw, filtered };

using TripleSet = std::unordered_set<Triple, TripleHash>;

/// Ranks use the average tie policy, so they may be half-integers.
struct RankingResult {
  Triple triple;
  CorruptedSide side = CorruptedSide::tail;
  double raw_rank = 1.0;
  double filtered_rank = 1.0;

  double rank(RankSetting s) const { return s == RankSetting::raw ? raw_rank : filtered_rank; }
};

/// Rank of the true entity among all |V| substitutions on `side`.
/// scores[e] is the score of the triple with entity e substituted.
/// Filtering drops candidates whose substituted triple is in `known`, except
/// the true entity itself.
RankingResult rank_candidates(const Triple& test, CorruptedSide side, std::span<const Scalar> scores,
                              const TripleSet& known);

/// Head- and tail-corrupted results for each test triple, in test order
/// (head result first).
std::vector<RankingResult> rank_link_prediction(const Matrix& features, const ModelParams& params, DecoderKind kind,
                                                std::span<const Triple> test, const TripleSet& known);

/// Mean reciprocal rank. Throws DataError on empty input.
double mrr(std::span<const RankingResult> results, RankSetting setting);

/// Fraction of ranks <= k.
double hits_at_k(std::span<const RankingResult> results, int k, RankSetting setting);

struct LinkMetrics {
  double mrr_raw = 0;
  double mrr_filtered = 0;
  double hits1 = 0;  // Hits@k columns use the filtered setting
  double hits3 = 0;
  double hits10 = 0;
  std::size_t num_ranked = 0;
};

LinkMetrics link_metrics(std::span<const RankingResult> results);

/// argmax per row, ties broken toward the lowest class id.
std::vector<ClassId> predict_classes(const Matrix& probabilities);

/// 100 x correct / total. Throws DataError on empty or mismatched input.
double classification_accuracy(std::span<const ClassId> predictions, std::span<const ClassId> labels);

// ---------------------------------------------------------------------------
// reports

std::string link_report_json(const std::string& dataset, const LinkMetrics& m);
std::string classify_report_json(const std::string& dataset, double accuracy);

std::string link_report_csv_header();
std::string link_report_csv_row(const std::string& dataset, const LinkMetrics& m);
std::string classify_report_csv_header();
std::string classify_report_csv_row(const std::string& dataset, double accuracy);

}  // namespace kgar
