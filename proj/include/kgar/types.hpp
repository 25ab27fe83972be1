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

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kgar {

using Scalar = double;

template <typename T, int Rows = Eigen::Dynamic, int Cols = Eigen::Dynamic>
using RowMatrix = Eigen::Matrix<T, Rows, Cols, Eigen::RowMajor>;

template <typename T>
using ColVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = RowMatrix<Scalar>;
using Vector = ColVector<Scalar>;
using Index = Eigen::Index;

using EntityId = std::int32_t;
using RelationId = std::int32_t;
using ClassId = std::int32_t;

// Error categories. The CLI maps them onto exit codes.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input data (bad line, unknown entity, missing file).
struct DataError : Error {
  using Error::Error;
};

struct ParseError : DataError {
  using DataError::DataError;
};

struct IoError : DataError {
  using DataError::DataError;
};

/// Operand shapes that do not compose.
struct DimensionError : Error {
  using Error::Error;
};

/// NaN/Inf produced during a forward or backward pass.
struct NumericError : Error {
  using Error::Error;
};

/// Invalid run configuration or command usage.
struct ConfigError : Error {
  using Error::Error;
};

inline std::string shape_str(Index rows, Index cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

template <typename Derived>
std::string shape_str(const Eigen::EigenBase<Derived>& m) {
  return shape_str(m.rows(), m.cols());
}

}  // namespace kgar
