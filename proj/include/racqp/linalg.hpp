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

#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "racqp/types.hpp"

namespace racqp {

/// Cholesky factor of a symmetric positive definite matrix. Dense for small inputs, sparse
/// with approximate-minimum-degree ordering above the dense limit. Immutable and shareable.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;

  Index size() const noexcept { return n_; }
  bool is_sparse() const noexcept { return sparse_ != nullptr; }

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;
  /// Lower factor L with P M P' = L L' (P is the identity on the dense path).
  Matrix matrix_l() const;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> permutation() const;

 private:
  struct SparseImpl;
  friend CholeskyFactor cholesky(const Matrix&, double);
  friend CholeskyFactor cholesky(const SparseMatrix&, double, Index);

  Index n_ = 0;
  std::shared_ptr<const Eigen::LLT<Matrix>> dense_;
  std::shared_ptr<const SparseImpl> sparse_;
};

/// Throws Error(asymmetric) or Error(not_positive_definite) when a pivot falls below
/// `pivot_tol` times the largest diagonal entry.
CholeskyFactor cholesky(const Matrix& m, double pivot_tol = 1e-12);
CholeskyFactor cholesky(const SparseMatrix& m, double pivot_tol = 1e-12, Index dense_limit = 400);

Vector solve_chol(const CholeskyFactor& factor, const Vector& rhs);

/// Factorization of the bordered system
///
///   [ H + beta D    sqrt(beta) A' ] [x ]   [r1]
///   [ sqrt(beta) A  -I            ] [mu] = [r2]
///
/// where D is a diagonal weight (identity by default). With diagonal H only the m x m matrix
/// I + beta A (H + beta D)^-1 A' is factorized.
class KktFactor {
 public:
  KktFactor() = default;

  Index num_vars() const noexcept { return n_; }
  Index num_rows() const noexcept { return m_; }
  bool uses_diagonal_path() const noexcept { return diagonal_; }

  /// Solves for the stacked rhs (r1; r2) of length n + m and returns (x; mu).
  Vector solve(const Vector& rhs) const;
  /// x part of the solution for the rhs (-q; 0).
  Vector solve_x(const Vector& q) const;

 private:
  struct Impl;
  friend KktFactor kkt_factor_general(const SparseMatrix&, const SparseMatrix&, double, const Vector&);
  friend KktFactor kkt_factor_diagonal(const Vector&, const SparseMatrix&, double, const Vector&);

  Index n_ = 0;
  Index m_ = 0;
  bool diagonal_ = false;
  std::shared_ptr<const Impl> impl_;
};

/// Dense LDL' when n + m <= 400, sparse LDL' with AMD ordering otherwise. Empty `prox` means D = I.
KktFactor kkt_factor_general(const SparseMatrix& H, const SparseMatrix& A, double beta,
                             const Vector& prox = Vector());
KktFactor kkt_factor_diagonal(const Vector& h_diag, const SparseMatrix& A, double beta,
                              const Vector& prox = Vector());
/// One-shot diagonal solve for the rhs (-q; 0); returns x.
Vector kkt_solve_diagonal(const Vector& h_diag, const SparseMatrix& A, double beta, const Vector& q);

struct EigenResult {
  Eigen::VectorXcd values;
  double spectral_radius = 0.0;
};

/// All eigenvalues; exactly symmetric inputs take the self-adjoint path.
EigenResult eigenvalues(const Matrix& m);
Vector symmetric_eigenvalues(const Matrix& m);
double spectral_radius(const Matrix& m);

bool is_diagonal(const SparseMatrix& m);

}  // namespace racqp
