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

#include "kgar/decoders.hpp"

#include <cmath>
#include <numbers>

namespace kgar {

namespace {

void check_sample_ids(const Matrix& features, std::span<const TrainingSample> samples, Index num_relations) {
  for (const auto& s : samples) {
    const auto& t = s.triple;
    if (t.head < 0 || t.head >= features.rows() || t.tail < 0 || t.tail >= features.rows() || t.relation < 0 ||
        t.relation >= num_relations)
      throw DimensionError("sample (" + std::to_string(t.head) + "," + std::to_string(t.relation) + "," +
                           std::to_string(t.tail) + ") out of range");
  }
}

}  // namespace

const char* decoder_name(DecoderKind kind) { return kind == DecoderKind::complex ? "complex" : "distmult"; }

std::string class_head_name() { return "head.class_weight"; }
std::string relation_real_name() { return "decoder.relation_real"; }
std::string relation_imag_name() { return "decoder.relation_imag"; }
std::string relation_diag_name() { return "decoder.relation_diag"; }

void add_classifier_params(ModelParams& params, Index feature_dim, Index num_classes, std::mt19937_64& rng) {
  params.add_random(class_head_name(), feature_dim, num_classes, InitScheme::scaled, rng);
}

void add_link_decoder_params(ModelParams& params, DecoderKind kind, Index feature_dim, Index num_relations,
                             std::mt19937_64& rng, bool regularized) {
  if (kind == DecoderKind::complex) {
    if (feature_dim % 2 != 0) throw ConfigError("ComplEx needs an even feature dimension, got " + std::to_string(feature_dim));
    params.add_random(relation_real_name(), num_relations, feature_dim / 2, InitScheme::scaled, rng, regularized);
    params.add_random(relation_imag_name(), num_relations, feature_dim / 2, InitScheme::scaled, rng, regularized);
  } else {
    params.add_random(relation_diag_name(), num_relations, feature_dim, InitScheme::scaled, rng, regularized);
  }
}

// ---------------------------------------------------------------------------
// classification

Var classify_forward(Var features, Var head_weight, std::span<const EntityId> labeled) {
  if (features.cols() != head_weight.rows())
    throw DimensionError("classify_forward: features " + shape_str(features.value()) + " vs head " +
                         shape_str(head_weight.value()));
  std::vector<Index> rows(labeled.begin(), labeled.end());
  return softmax_rows(matmul(gather_rows(features, rows), head_weight));
}

Var classification_loss(Var probabilities, std::span<const ClassId> targets) {
  auto& tape = probabilities.tape();
  const Matrix& p = probabilities.value();
  if (static_cast<Index>(targets.size()) != p.rows())
    throw DimensionError("classification_loss: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(p.rows()) + " rows");
  std::vector<ClassId> t(targets.begin(), targets.end());
  Matrix loss = Matrix::Zero(1, 1);
  for (Index i = 0; i < p.rows(); ++i) {
    const auto c = t[static_cast<std::size_t>(i)];
    if (c < 0 || c >= p.cols()) throw DimensionError("classification_loss: class " + std::to_string(c) + " out of range");
    loss(0, 0) -= std::log(std::max(p(i, c), kLogFloor));
  }
  return tape.record(std::move(loss), {probabilities}, [&tape, probabilities, t = std::move(t)](const Matrix& g) {
    const Matrix& p = probabilities.value();
    Matrix dp = Matrix::Zero(p.rows(), p.cols());
    for (Index i = 0; i < p.rows(); ++i) {
      const auto c = t[static_cast<std::size_t>(i)];
      if (p(i, c) > kLogFloor) dp(i, c) = -g(0, 0) / p(i, c);
    }
    tape.accumulate(probabilities, dp);
  });
}

// ---------------------------------------------------------------------------
// negative sampling

std::vector<TrainingSample> sample_negatives(std::span<const Triple> positives, Index num_entities,
                                             std::mt19937_64& rng, const std::unordered_set<Triple, TripleHash>* known) {
  if (num_entities < 2) throw ConfigError("sample_negatives needs at least 2 entities");
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(num_entities - 2));
  std::vector<TrainingSample> out;
  out.reserve(2 * positives.size());
  for (const auto& pos : positives) {
    out.push_back({pos, 1});
    const bool replace_head = coin(rng);
    Triple neg = pos;
    for (int attempt = 0; attempt < 32; ++attempt) {
      const EntityId original = replace_head ? pos.head : pos.tail;
      EntityId e = pick(rng);
      if (e >= original) ++e;  // uniform over the other entities
      (replace_head ? neg.head : neg.tail) = e;
      if (!known || !known->count(neg)) break;
    }
    out.push_back({neg, 0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// link scores

Var complex_scores(Var features, Var relation_real, Var relation_imag, std::span<const TrainingSample> samples) {
  auto& tape = features.tape();
  const Matrix& f = features.value();
  const Matrix& wr = relation_real.value();
  const Matrix& wi = relation_imag.value();
  const Index half = wr.cols();
  if (f.cols() != 2 * half || wi.cols() != half || wi.rows() != wr.rows())
    throw DimensionError("complex_scores: features " + shape_str(f) + ", relation parts " + shape_str(wr) + "/" +
                         shape_str(wi));
  check_sample_ids(f, samples, wr.rows());
  std::vector<TrainingSample> kept(samples.begin(), samples.end());
  Matrix scores(static_cast<Index>(kept.size()), 1);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& t = kept[k].triple;
    scores(static_cast<Index>(k), 0) = complex_score(f.row(t.head), wr.row(t.relation), wi.row(t.relation), f.row(t.tail));
  }
  return tape.record(std::move(scores), {features, relation_real, relation_imag},
                     [&tape, features, relation_real, relation_imag, kept = std::move(kept)](const Matrix& g) {
    const Matrix& f = features.value();
    const Matrix& wr = relation_real.value();
    const Matrix& wi = relation_imag.value();
    const Index half = wr.cols();
    const bool need_f = tape.requires_grad(features);
    Matrix* df = need_f ? &tape.grad_buffer(features) : nullptr;
    Matrix dwr = Matrix::Zero(wr.rows(), wr.cols());
    Matrix dwi = Matrix::Zero(wi.rows(), wi.cols());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto& t = kept[k].triple;
      const Scalar gk = g(static_cast<Index>(k), 0);
      const auto s_re = f.row(t.head).head(half).array(), s_im = f.row(t.head).tail(half).array();
      const auto o_re = f.row(t.tail).head(half).array(), o_im = f.row(t.tail).tail(half).array();
      const auto w_re = wr.row(t.relation).array(), w_im = wi.row(t.relation).array();
      dwr.row(t.relation).array() += gk * (s_re * o_re + s_im * o_im);
      dwi.row(t.relation).array() += gk * (s_re * o_im - s_im * o_re);
      if (need_f) {
        const RowVector<Scalar> ds_re = gk * (w_re * o_re + w_im * o_im);
        const RowVector<Scalar> ds_im = gk * (w_re * o_im - w_im * o_re);
        const RowVector<Scalar> do_re = gk * (w_re * s_re - w_im * s_im);
        const RowVector<Scalar> do_im = gk * (w_re * s_im + w_im * s_re);
        df->row(t.head).head(half) += ds_re;
        df->row(t.head).tail(half) += ds_im;
        df->row(t.tail).head(half) += do_re;
        df->row(t.tail).tail(half) += do_im;
      }
    }
    tape.accumulate(relation_real, dwr);
    tape.accumulate(relation_imag, dwi);
  });
}

Var distmult_scores(Var features, Var relation_diag, std::span<const TrainingSample> samples) {
  auto& tape = features.tape();
  const Matrix& f = features.value();
  const Matrix& w = relation_diag.value();
  if (f.cols() != w.cols())
    throw DimensionError("distmult_scores: features " + shape_str(f) + ", relations " + shape_str(w));
  check_sample_ids(f, samples, w.rows());
  std::vector<TrainingSample> kept(samples.begin(), samples.end());
  Matrix scores(static_cast<Index>(kept.size()), 1);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& t = kept[k].triple;
    scores(static_cast<Index>(k), 0) = distmult_score(f.row(t.head), w.row(t.relation), f.row(t.tail));
  }
  return tape.record(std::move(scores), {features, relation_diag},
                     [&tape, features, relation_diag, kept = std::move(kept)](const Matrix& g) {
    const Matrix& f = features.value();
    const Matrix& w = relation_diag.value();
    const bool need_f = tape.requires_grad(features);
    Matrix* df = need_f ? &tape.grad_buffer(features) : nullptr;
    Matrix dw = Matrix::Zero(w.rows(), w.cols());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto& t = kept[k].triple;
      const Scalar gk = g(static_cast<Index>(k), 0);
      const auto s = f.row(t.head).array(), o = f.row(t.tail).array(), wr = w.row(t.relation).array();
      dw.row(t.relation).array() += gk * s * o;
      if (need_f) {
        const RowVector<Scalar> ds = gk * wr * o;
        const RowVector<Scalar> dobj = gk * wr * s;
        df->row(t.head) += ds;
        df->row(t.tail) += dobj;
      }
    }
    tape.accumulate(relation_diag, dw);
  });
}

Var link_scores(Tape& tape, Var features, ModelParams& params, DecoderKind kind,
                std::span<const TrainingSample> samples) {
  if (kind == DecoderKind::complex)
    return complex_scores(features, tape.parameter(params.at(relation_real_name())),
                          tape.parameter(params.at(relation_imag_name())), samples);
  return distmult_scores(features, tape.parameter(params.at(relation_diag_name())), samples);
}

Var link_loss(Var scores, std::span<const TrainingSample> samples) {
  auto& tape = scores.tape();
  const Matrix& f = scores.value();
  if (f.rows() != static_cast<Index>(samples.size()) || f.cols() != 1)
    throw DimensionError("link_loss: scores " + shape_str(f) + " for " + std::to_string(samples.size()) + " samples");
  if (samples.empty()) throw DimensionError("link_loss: no samples");
  const Scalar log_floor = std::log(kLogFloor);
  const Scalar n = static_cast<Scalar>(samples.size());
  std::vector<int> labels;
  Matrix loss = Matrix::Zero(1, 1);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    labels.push_back(samples[k].label);
    const Scalar x = f(static_cast<Index>(k), 0);
    // log σ(x) for positives, log(1 − σ(x)) = log σ(−x) for negatives
    const Scalar ls = samples[k].label == 1 ? log_sigmoid(x) : log_sigmoid(-x);
    loss(0, 0) -= std::max(ls, log_floor);
  }
  loss(0, 0) /= n * std::numbers::ln2;
  return tape.record(std::move(loss), {scores}, [&tape, scores, labels = std::move(labels), n, log_floor](const Matrix& g) {
    const Matrix& f = scores.value();
    Matrix df(f.rows(), 1);
    for (Index k = 0; k < f.rows(); ++k) {
      const Scalar x = f(k, 0);
      const bool positive = labels[static_cast<std::size_t>(k)] == 1;
      const Scalar ls = positive ? log_sigmoid(x) : log_sigmoid(-x);
      const Scalar d = ls < log_floor ? 0.0 : (positive ? -(1.0 - sigmoid(x)) : sigmoid(x));
      df(k, 0) = g(0, 0) * d / (n * std::numbers::ln2);
    }
    tape.accumulate(scores, df);
  });
}

Var entity_feature_penalty(Var features, std::span<const TrainingSample> samples, Scalar coefficient) {
  auto& tape = features.tape();
  const Matrix& f = features.value();
  // mean over samples and feature coordinates
  const Scalar n = static_cast<Scalar>(std::max<std::size_t>(samples.size(), 1)) * static_cast<Scalar>(f.cols());
  std::vector<EntityId> ids;
  Matrix total = Matrix::Zero(1, 1);
  for (const auto& s : samples) {
    ids.push_back(s.triple.head);
    ids.push_back(s.triple.tail);
    total(0, 0) += f.row(s.triple.head).squaredNorm() + f.row(s.triple.tail).squaredNorm();
  }
  total *= coefficient / n;
  return tape.record(std::move(total), {features}, [&tape, features, ids = std::move(ids), coefficient, n](const Matrix& g) {
    Matrix& df = tape.grad_buffer(features);
    const Scalar c = 2.0 * coefficient * g(0, 0) / n;
    for (auto id : ids) df.row(id) += c * features.value().row(id);
  });
}

Vector candidate_scores(const Matrix& features, const ModelParams& params, DecoderKind kind, const Triple& triple,
                        bool replace_head) {
  const auto fixed = features.row(replace_head ? triple.tail : triple.head);
  if (kind == DecoderKind::distmult) {
    const auto w = params.at(relation_diag_name()).value.row(triple.relation);
    return features * w.cwiseProduct(fixed).transpose();
  }
  const auto w_re = params.at(relation_real_name()).value.row(triple.relation).array();
  const auto w_im = params.at(relation_imag_name()).value.row(triple.relation).array();
  const Index half = w_re.size();
  const auto x_re = fixed.head(half).array(), x_im = fixed.tail(half).array();
  Vector coef(2 * half);
  if (replace_head) {
    // score = s_re·(w_re o_re + w_im o_im) + s_im·(w_re o_im − w_im o_re)
    coef.head(half) = (w_re * x_re + w_im * x_im).transpose();
    coef.tail(half) = (w_re * x_im - w_im * x_re).transpose();
  } else {
    // score = o_re·(w_re s_re − w_im s_im) + o_im·(w_re s_im + w_im s_re)
    coef.head(half) = (w_re * x_re - w_im * x_im).transpose();
    coef.tail(half) = (w_re * x_im + w_im * x_re).transpose();
  }
  return features * coef;
}

}  // namespace kgar
