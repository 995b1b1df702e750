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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "racqp/blocks.hpp"
#include "racqp/problem.hpp"

namespace racqp {

/// Random LCQP with Hessian (eta U + (1-eta) I) V (eta U + (1-eta) I)' scaled to unit max entry
/// plus zeta ee'. Constraint rows are standard normal at the requested density; right-hand sides
/// are built from a random point in [0,1]^n so the instance is feasible.
struct RandomQpSpec {
  Index n = 100;
  Index m_eq = 0;
  Index m_ineq = 0;
  double density = 1.0;          // constraint matrices
  double hessian_density = 1.0;  // nonzero fraction of U
  double eta = 0.5;
  double zeta = 0.0;
  double condition = 100.0;
  bool nonnegative = false;  // x >= 0 instead of free
  std::uint64_t seed = 1;
};

struct RandomHessian {
  Matrix H;
  Vector spectrum;  // diagonal of V before normalization, min entry 1
};

/// Log-uniform values with min 1 and max exactly `condition` (for n >= 2).
Vector log_uniform_spectrum(Index n, double condition, Rng& rng);
RandomHessian gen_random_hessian(const RandomQpSpec& spec, Rng& rng);
Lcqp gen_random_lcqp(const RandomQpSpec& spec);

/// One-row Markowitz-like instance: min x'Hx + c'x + kappa|x|^2, e'x = 1 (or = cardinality with
/// binary x), x >= 0, with H from the random Hessian recipe and c ~ U(0,1).
struct MarkowitzLikeSpec {
  Index n = 300;
  double eta = 0.5;
  double zeta = 0.0;
  double condition = 100.0;
  double kappa = 1e-5;
  std::optional<Index> cardinality;
  std::uint64_t seed = 1;
};

Lcqp gen_markowitz_like(const MarkowitzLikeSpec& spec);

/// Markowitz portfolio: min x'Vx - tau m'x + kappa |x|^2 over the simplex, or with binary x and
/// e'x = cardinality. The low-rank form replaces x'Vx by |y|^2 with Bx - y = 0.
struct MarkowitzSpec {
  Matrix returns;                   // k x N observations; or
  std::optional<Matrix> covariance; // N x N
  std::optional<Vector> mean;       // defaults to column means of returns, else zero
  double tau = 1.0;
  double kappa = 1e-5;
  std::optional<Index> cardinality;
  bool binary = false;
  bool low_rank = false;
};

/// (R - (1/k) e e' R) / sqrt(k - 1); B'B is the sample covariance of the columns of R.
Matrix centered_returns_factor(const Matrix& returns);
Lcqp gen_markowitz(const MarkowitzSpec& spec);

/// Quadratic assignment: x = row-major vec(X) (x[i*r + j] = X_ij), objective x'(A kron B + dI)x,
/// rows 0..r-1 force each row of X to sum to one, rows r..2r-1 each column.
struct QapSpec {
  Matrix flow;
  Matrix distance;
  double delta = 0.1;
  bool relaxed = true;
};

/// Shift d = largest off-diagonal absolute row sum of A kron B plus delta.
double qap_shift(const QapSpec& spec);
/// A kron B + dI, the matrix in the x'Hx form of the objective.
Matrix qap_hessian(const QapSpec& spec);
Lcqp gen_qap(const QapSpec& spec);
/// One super-variable per row of X with its row-sum constraint as the local row.
SuperVariableSet qap_row_groups(Index r);

struct Edge {
  Index u = 0;
  Index v = 0;
  double weight = 1.0;
};

struct GraphSpec {
  Index vertices = 0;
  std::vector<Edge> edges;
  bool bisection = false;
};

/// h_ij = w_ij off the diagonal, h_ii = -(row sum + column sum)/2, so x'Hx = -cut(x) for binary x.
Matrix maxcut_matrix(const GraphSpec& spec);
double cut_value(const GraphSpec& spec, const Vector& x);
Lcqp gen_maxcut(const GraphSpec& spec);
/// Max-cut plus e'x = floor(n/2).
Lcqp gen_maxbisection(const GraphSpec& spec);

class GaussianKernel {
 public:
  GaussianKernel() = default;
  GaussianKernel(Matrix points, double sigma);

  double operator()(const Vector& a, const Vector& b) const;
  /// K(x_i, x) for every stored point.
  Vector column(const Vector& x) const;
  Matrix gram() const;
  const Matrix& points() const { return points_; }
  double sigma() const { return sigma_; }

 private:
  Matrix points_;  // one point per row
  double sigma_ = 1.0;
};

struct SvmSpec {
  Matrix features;  // n x r
  Vector labels;    // +-1
  double C = 1.0;
  double sigma = 1.0;
};

struct SvmDual {
  Lcqp problem;  // min 0.5 z'Qz - e'z, y'z = 0, 0 <= z <= C
  GaussianKernel kernel;
};

SvmDual gen_svm_dual(const SvmSpec& spec);

/// "u v w" per line, 0-based vertices; '#' and '%' start comments; w defaults to 1. The vertex
/// count is the larger of `vertices` and max index + 1.
GraphSpec load_edge_list(const std::filesystem::path& path, Index vertices = 0);
/// Dense numeric CSV; an optional non-numeric header line is skipped.
Matrix load_csv_matrix(const std::filesystem::path& path);

}  // namespace racqp
