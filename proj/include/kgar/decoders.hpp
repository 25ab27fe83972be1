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

#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "kgar/autodiff.hpp"
#include "kgar/kg_data.hpp"

namespace kgar {

enum class DecoderKind { complex, distmult };

const char* decoder_name(DecoderKind kind);

/// Clamp applied inside every log of a loss.
inline constexpr Scalar kLogFloor = 1e-12;

// ================================================================
// triple scorers (templated so tests can run them on any scalar)
// ================================================================

/// Re(<w, s, conj(o)>) expanded into its four real terms. Entity rows hold
/// [Re | Im] halves; relation real and imaginary parts are separate rows.
template <typename S, typename W, typename O>
typename S::Scalar complex_score(const Eigen::MatrixBase<S>& s, const Eigen::MatrixBase<W>& w_re,
                                 const Eigen::MatrixBase<W>& w_im, const Eigen::MatrixBase<O>& o) {
  const Index half = w_re.size();
  const auto s_re = s.head(half), s_im = s.tail(half);
  const auto o_re = o.head(half), o_im = o.tail(half);
  return (w_re.array() * s_re.array() * o_re.array()).sum() + (w_re.array() * s_im.array() * o_im.array()).sum() +
         (w_im.array() * s_re.array() * o_im.array()).sum() - (w_im.array() * s_im.array() * o_re.array()).sum();
}

/// Σ_d w[d]·s[d]·o[d].
template <typename S, typename W, typename O>
typename S::Scalar distmult_score(const Eigen::MatrixBase<S>& s, const Eigen::MatrixBase<W>& w,
                                  const Eigen::MatrixBase<O>& o) {
  return (w.array() * s.array() * o.array()).sum();
}

// ================================================================
// decoder parameters
// ================================================================

std::string class_head_name();
std::string relation_real_name();
std::string relation_imag_name();
std::string relation_diag_name();

/// D x K classification weight.
void add_classifier_params(ModelParams& params, Index feature_dim, Index num_classes, std::mt19937_64& rng);

/// ComplEx: |R| x D/2 real and imaginary relation parts. DistMult: |R| x D diagonal.
void add_link_decoder_params(ModelParams& params, DecoderKind kind, Index feature_dim, Index num_relations,
                             std::mt19937_64& rng, bool regularized);

// ================================================================
// classification
// ================================================================

/// Row-softmax of features[labeled]·W. Returns |labeled| x K probabilities.
Var classify_forward(Var features, Var head_weight, std::span<const EntityId> labeled);

/// Σ_i -ln(max(p_i[t_i], 1e-12)) over the rows of `probabilities`.
Var classification_loss(Var probabilities, std::span<const ClassId> targets);

// ================================================================
// link prediction
// ================================================================

struct TrainingSample {
  Triple triple;
  int label = 0;  // 1 = observed triple, 0 = corruption
};

/// Emits, per positive, the positive and one corruption: with probability
/// 1/2 the head, otherwise the tail, is replaced by a uniformly drawn
/// different entity. When `known` is given, corruptions that hit a known
/// triple are redrawn (bounded retries).
std::vector<TrainingSample> sample_negatives(std::span<const Triple> positives, Index num_entities,
                                             std::mt19937_64& rng,
                                             const std::unordered_set<Triple, TripleHash>* known = nullptr);

/// One ComplEx score per sample. Features are the encoder output (|V| x D).
Var complex_scores(Var features, Var relation_real, Var relation_imag, std::span<const TrainingSample> samples);

/// One DistMult score per sample.
Var distmult_scores(Var features, Var relation_diag, std::span<const TrainingSample> samples);

/// Dispatches on `kind`, pulling the decoder's relation parameters from `params`.
Var link_scores(Tape& tape, Var features, ModelParams& params, DecoderKind kind,
                std::span<const TrainingSample> samples);

/// -(1/|Γ|) Σ [y log2 σ(f) + (1-y) log2 (1-σ(f))], each log clamped at 1e-12.
Var link_loss(Var scores, std::span<const TrainingSample> samples);

/// coefficient · (1/(|Γ|·D)) Σ over samples of (|f_s|² + |f_o|²).
Var entity_feature_penalty(Var features, std::span<const TrainingSample> samples, Scalar coefficient);

/// Candidate scores for every entity substituted into one side of a triple.
/// `replace_head` selects which side is corrupted.
Vector candidate_scores(const Matrix& features, const ModelParams& params, DecoderKind kind, const Triple& triple,
                        bool replace_head);

}  // namespace kgar
