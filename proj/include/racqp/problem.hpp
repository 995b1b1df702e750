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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "racqp/types.hpp"

namespace racqp {

enum class VarKind { continuous, binary, integer };

const char* to_string(VarKind kind) noexcept;
VarKind parse_var_kind(const std::string& text);

/// Linearly constrained quadratic program
///
///   min  0.5 x'Hx + c'x + c0
///   s.t. A_eq x = b_eq,  A_ineq x <= b_ineq,  lb <= x <= ub,
///        x_i integral where kinds[i] != continuous.
///
/// H is stored with both triangles. Bounds may be +-infinity.
struct Lcqp {
  std::string name;
  SparseMatrix H;
  Vector c;
  SparseMatrix A_eq;
  Vector b_eq;
  SparseMatrix A_ineq;
  Vector b_ineq;
  Vector lb;
  Vector ub;
  std::vector<VarKind> kinds;
  double c0 = 0.0;

  Index num_vars() const { return c.size(); }
  Index num_eq() const { return b_eq.size(); }
  Index num_ineq() const { return b_ineq.size(); }
  bool has_integers() const;
  bool is_bounded(Index i) const;

  double objective(const Vector& x) const;
};

/// Fills defaults and checks the record: empty constraint systems get n columns, missing bounds
/// become (-inf, +inf), missing kinds become continuous and binary variables are clipped to
/// [0, 1]. Throws Error(dimension | asymmetric | invalid_argument).
void finalize(Lcqp& problem, double symmetry_tol = 1e-10);

/// Unconstrained continuous problem with free variables.
Lcqp make_unconstrained(SparseMatrix H, Vector c);

// ---------------------------------------------------------------------------
// Matrix Market

struct MatrixMarketHeader {
  bool coordinate = true;
  bool pattern = false;
  bool symmetric = false;
  bool skew = false;
};

SparseMatrix parse_matrix_market(std::istream& in, MatrixMarketHeader* header = nullptr);
SparseMatrix load_matrix_market(const std::filesystem::path& path,
                                MatrixMarketHeader* header = nullptr);
/// Writes a general coordinate real file with round-trip precision.
void save_matrix_market(const SparseMatrix& m, const std::filesystem::path& path);
/// Single-column Matrix Market file (array or coordinate) as a dense vector.
Vector load_vector_market(const std::filesystem::path& path);
void save_vector_market(const Vector& v, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON manifest

/// Manifest describing where the pieces of an Lcqp live. Matrices are Matrix Market paths
/// relative to `base_dir`; vectors are inline or single-column Matrix Market paths.
struct ProblemManifest {
  using VectorSource = std::variant<std::monostate, std::vector<double>, std::filesystem::path>;

  std::string name;
  std::filesystem::path base_dir;
  std::optional<std::filesystem::path> H;
  std::optional<std::filesystem::path> A_eq;
  std::optional<std::filesystem::path> A_ineq;
  VectorSource c;
  VectorSource b_eq;
  VectorSource b_ineq;
  VectorSource lb;
  VectorSource ub;
  std::vector<VarKind> kinds;
  double c0 = 0.0;
  nlohmann::json metadata = nlohmann::json::object();

  static ProblemManifest from_json(const nlohmann::json& j, std::filesystem::path base_dir);
  nlohmann::json to_json() const;
};

ProblemManifest read_manifest(const std::filesystem::path& path);
Lcqp load_problem(const ProblemManifest& manifest);
Lcqp load_problem(const std::filesystem::path& manifest_path);

/// Writes `<stem>.json` plus `<stem>.H.mtx` etc. next to it. Vectors are inlined.
void save_problem(const Lcqp& problem, const std::filesystem::path& manifest_path,
                  const nlohmann::json& metadata = nlohmann::json::object());

// ---------------------------------------------------------------------------

struct RowScaling {
  Lcqp problem;
  Vector eq_factors;    // row i of the scaled A_eq = original row / eq_factors[i]
  Vector ineq_factors;
};

/// Divides each nonzero constraint row (and its rhs) by the row's infinity norm.
RowScaling row_scale(const Lcqp& problem);

enum class Severity { info, warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  std::optional<Index> index;
};

struct ValidateOptions {
  double symmetry_tol = 1e-10;
  /// Minimum-eigenvalue check of H; only performed when n <= eigen_check_limit.
  bool check_eigenvalues = false;
  Index eigen_check_limit = 500;
};

std::vector<Diagnostic> validate(const Lcqp& problem, const ValidateOptions& options = {});

}  // namespace racqp
