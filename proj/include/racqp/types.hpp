// Copyright 2026 The racqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace racqp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using IndexVector = std::vector<Index>;

/// Category of a failure raised by the library.
enum class Errc {
  invalid_argument,
  io,
  parse,
  dimension,
  asymmetric,
  not_positive_definite,
  singular,
  cap_exceeded,
  convergence,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Matrix Market parse failure. `line()` is 1-based; 0 when the failure is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::int64_t line)
      : Error(Errc::parse, line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::int64_t line() const noexcept { return line_; }

 private:
  std::int64_t line_;
};

/// A sub-problem matrix H_bb + beta A_b^T A_b (+ prox) was not positive definite.
class BlockNotPositiveDefinite : public Error {
 public:
  BlockNotPositiveDefinite(Index block, IndexVector indices)
      : Error(Errc::not_positive_definite,
              "block " + std::to_string(block) + " (size " + std::to_string(indices.size()) +
                  ") is not positive definite"),
        block_(block),
        indices_(std::move(indices)) {}
  Index block() const noexcept { return block_; }
  const IndexVector& indices() const noexcept { return indices_; }

 private:
  Index block_;
  IndexVector indices_;
};

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace racqp
