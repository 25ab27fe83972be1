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

#include "kgar/autodiff.hpp"

#include <memory>

namespace kgar {

const Matrix& Var::value() const { return tape_->value(*this); }

Scalar Var::scalar() const {
  const auto& v = value();
  if (v.size() != 1) throw DimensionError("scalar() on a node of shape " + shape_str(v));
  return v(0, 0);
}

// ---------------------------------------------------------------------------
// Tape

Var Tape::constant(Matrix value) {
  auto& n = nodes_.emplace_back();
  n.value = std::move(value);
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  auto& n = nodes_.emplace_back();
  n.requires_grad = true;
  n.param = &p;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const auto& v : inputs) {
    if (v.tape_ != this) throw Error("tape: input belongs to a different tape");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  auto& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(Var v, const Eigen::Ref<const Matrix>& g) {
  auto& n = nodes_[v.id()];
  if (!n.requires_grad) return;
  const auto& val = value(v);
  if (g.rows() != val.rows() || g.cols() != val.cols())
    throw DimensionError("gradient " + shape_str(g) + " for node of shape " + shape_str(val));
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Matrix& Tape::grad_buffer(Var v) {
  auto& n = nodes_[v.id()];
  if (!n.requires_grad) throw Error("grad_buffer on a node that does not require gradients");
  if (!n.has_grad) {
    n.grad = Matrix::Zero(value(v).rows(), value(v).cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  auto& root = nodes_[loss.id()];
  if (value(loss).size() != 1) throw DimensionError("backward() needs a 1x1 loss, got " + shape_str(value(loss)));
  if (!root.requires_grad) return;
  root.grad = Matrix::Ones(1, 1);
  root.has_grad = true;
  for (std::size_t k = loss.id() + 1; k-- > 0;) {
    auto& n = nodes_[k];
    if (!n.has_grad) continue;
    if (n.param) {
      n.param->add_grad(n.grad);
    } else if (n.backward) {
      n.backward(n.grad);
    }
    n.grad.resize(0, 0);
    n.has_grad = false;
  }
}

void check_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw NumericError(what + ": non-finite value");
}

// ---------------------------------------------------------------------------
// Ops

Var matmul(Var a, Var b) {
  auto& t = a.tape();
  if (a.cols() != b.rows()) throw DimensionError("matmul: " + shape_str(a.value()) + " x " + shape_str(b.value()));
  Matrix c = a.value() * b.value();
  return t.record(std::move(c), {a, b}, [&t, a, b](const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(Var a, Var b) {
  auto& t = a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("add: " + shape_str(a.value()) + " + " + shape_str(b.value()));
  return t.record(a.value() + b.value(), {a, b}, [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var scale(Var a, Scalar s) {
  auto& t = a.tape();
  return t.record(s * a.value(), {a}, [&t, a, s](const Matrix& g) { t.accumulate(a, s * g); });
}

Var hadamard(Var a, Var b) {
  auto& t = a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hadamard: " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [&t, a, b](const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var relu(Var x) {
  auto& t = x.tape();
  return t.record(kgar::relu(x.value()), {x}, [&t, x](const Matrix& g) {
    // derivative at 0 taken from the positive branch
    t.accumulate(x, (x.value().array() >= 0.0).select(g, 0.0));
  });
}

Var leaky_relu(Var x, Scalar slope) {
  auto& t = x.tape();
  return t.record(kgar::leaky_relu(x.value(), slope), {x}, [&t, x, slope](const Matrix& g) {
    t.accumulate(x, (x.value().array() >= 0.0).select(g, slope * g));
  });
}

Var sigmoid(Var x) {
  auto& t = x.tape();
  Matrix y = kgar::sigmoid(x.value());
  return t.record(y, {x}, [&t, x, y](const Matrix& g) {
    t.accumulate(x, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var dropout(Var x, double rate, bool training, std::mt19937_64& rng) {
  if (!training || rate == 0.0) return x;
  auto& t = x.tape();
  Matrix mask = dropout_mask<Scalar>(x.rows(), x.cols(), rate, rng);
  Matrix y = x.value().cwiseProduct(mask);
  return t.record(std::move(y), {x}, [&t, x, mask = std::move(mask)](const Matrix& g) {
    t.accumulate(x, g.cwiseProduct(mask));
  });
}

Var softmax_rows(Var x) {
  auto& t = x.tape();
  Matrix y = kgar::softmax_rows(x.value());
  return t.record(y, {x}, [&t, x, y](const Matrix& g) {
    // dx = y ⊙ (g − rowsum(g ⊙ y))
    Vector dots = g.cwiseProduct(y).rowwise().sum();
    Matrix dx = y.array() * (g.colwise() - dots).array();
    t.accumulate(x, dx);
  });
}

Var gather_rows(Var x, std::span<const Index> rows) {
  auto& t = x.tape();
  std::vector<Index> idx(rows.begin(), rows.end());
  Matrix y(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= x.rows())
      throw DimensionError("gather_rows: row " + std::to_string(idx[k]) + " outside " + shape_str(x.value()));
    y.row(static_cast<Index>(k)) = x.value().row(idx[k]);
  }
  return t.record(std::move(y), {x}, [&t, x, idx = std::move(idx)](const Matrix& g) {
    auto& gx = t.grad_buffer(x);
    for (std::size_t k = 0; k < idx.size(); ++k) gx.row(idx[k]) += g.row(static_cast<Index>(k));
  });
}

Var sparse_dense_matmul(const SparseMatrix& s, Var d, bool transpose) {
  auto& t = d.tape();
  Matrix y = kgar::sparse_dense_matmul(s, d.value(), transpose);
  return t.record(std::move(y), {d}, [&t, s, d, transpose](const Matrix& g) {
    t.accumulate(d, kgar::sparse_dense_matmul(s, g, !transpose));
  });
}

Var sum(Var x) {
  auto& t = x.tape();
  Matrix y(1, 1);
  y(0, 0) = x.value().sum();
  return t.record(std::move(y), {x}, [&t, x](const Matrix& g) {
    t.accumulate(x, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var l2_penalty(Tape& tape, ModelParams& params, Scalar coefficient) {
  if (coefficient < 0) throw ConfigError("l2 coefficient must be >= 0");
  std::vector<Var> leaves;
  Matrix total = Matrix::Zero(1, 1);
  for (auto& p : params) {
    if (!p.regularized) continue;
    leaves.push_back(tape.parameter(p));
    total(0, 0) += p.value.squaredNorm();
  }
  total *= coefficient;
  auto shared = std::make_shared<std::vector<Var>>(leaves);
  return tape.record(std::move(total), std::span<const Var>(leaves), [&tape, shared, coefficient](const Matrix& g) {
    for (auto v : *shared) tape.accumulate(v, (2.0 * coefficient * g(0, 0)) * v.value());
  });
}

}  // namespace kgar
