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

#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "kgar/types.hpp"

namespace kgar {

/// A named learned matrix with a gradient slot.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;             // same shape as value once has_grad is set
  bool has_grad = false;
  bool regularized = false;

  void zero_grad() {
    grad.resize(0, 0);
    has_grad = false;
  }
  void add_grad(const Eigen::Ref<const Matrix>& g);
};

enum class InitScheme { scaled, std_normal };

/// Ordered parameter collection. Names are unique; references stay valid
/// for the lifetime of the collection.
class ModelParams {
 public:
  Parameter& add(std::string name, Matrix value, bool regularized = false);

  /// Adds a rows x cols parameter drawn from N(0, s²) where s is
  /// sqrt(2/(rows+cols)) for the scaled scheme and 1 for std_normal.
  Parameter& add_random(std::string name, Index rows, Index cols, InitScheme scheme, std::mt19937_64& rng,
                        bool regularized = false);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t num_scalars() const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> by_name_;
};

/// Plain gradient descent: w <- w - lr * grad, then clears gradients.
/// Throws ConfigError naming the first parameter without a gradient.
void sgd_step(ModelParams& params, double learning_rate);

/// Adam; state is keyed by parameter name.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ModelParams& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::map<std::string, std::pair<Matrix, Matrix>> moments_;
};

// ---------------------------------------------------------------------------
// Snapshots
//
// Layout: 8-byte magic "KGARSNP1", little-endian u64 header length, a UTF-8
// JSON header {"meta": {...}, "params": [{"name", "rows", "cols", "dtype":
// "f64", "regularized"}...]}, then every parameter's values as raw row-major
// IEEE-754 doubles in header order. Loading reproduces the values bit for bit.

struct Snapshot {
  std::string meta_json = "{}";  // free-form run metadata (task, dataset, config)
  ModelParams params;
};

void save_snapshot(const std::filesystem::path& path, const ModelParams& params, const std::string& meta_json);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace kgar
