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
#include <optional>
#include <vector>

#include "json.hpp"
#include "racqp/blocks.hpp"
#include "racqp/problem.hpp"

namespace racqp {

/// Linear mapping of one update combination for min 0.5 x'Hx + c'x s.t. Ax = b. With
/// S = H + beta A'A, L is the block lower-triangular part of S in update order and
/// M = Lbar^-1 Rbar advances (x; y) by one sweep plus the dual step.
struct MappingSet {
  Matrix S;
  Matrix L;
  Matrix R;
  Matrix L_bar;
  Matrix R_bar;
  Matrix M;
};

/// `order` lists positions of `partition` in update order.
MappingSet build_mapping(const Matrix& H, const Matrix& A, double beta,
                         const BlockPartition& partition, const UpdateOrder& order);

/// Per block: is H_bb + beta A_b'A_b positive definite.
std::vector<char> check_assumption1(const Matrix& H, const Matrix& A, double beta,
                                    const BlockPartition& partition);

struct ExpectationOptions {
  /// Exact enumeration up to this many update combinations.
  std::uint64_t cap = 10000;
  /// Monte Carlo sample size used above the cap; 0 disables the fallback.
  Index samples = 0;
  std::uint64_t seed = 1;
};

struct ExpectedQ {
  Matrix Q;
  bool exact = true;
  /// Number of update combinations averaged.
  Index terms = 0;
  /// Largest |Q_v - Q_v'| over the per-partition averages (exact mode only).
  double max_partition_asymmetry = 0.0;
};

/// Mean of L_sigma^-1 over all update combinations of (n, p).
ExpectedQ expected_Q(const Matrix& H, const Matrix& A, double beta, Index p,
                     const ExpectationOptions& options = {});
/// Mean of L_sigma^-1 over the p! orders of one partition.
Matrix partition_Q(const Matrix& H, const Matrix& A, double beta, const BlockPartition& partition);

/// [[I - QS, QA'], [-beta A + beta AQS, I - beta AQA']].
Matrix mapping_from_Q(const Matrix& Q, const Matrix& H, const Matrix& A, double beta);
Matrix expected_M(const Matrix& H, const Matrix& A, double beta, Index p,
                  const ExpectationOptions& options = {});
/// Direct average of M_sigma over every update combination (exact only).
Matrix average_M(const Matrix& H, const Matrix& A, double beta, Index p, std::uint64_t cap = 10000);

struct EigRange {
  double min = 0.0;
  double max = 0.0;
};

/// Real spectrum range of QS via the similar matrix Q^1/2 S Q^1/2. Q is symmetrized first.
EigRange eig_QS_bound(const Matrix& Q, const Matrix& S);

enum class SamplingMode { rac, rp };

struct KroneckerOptions {
  std::uint64_t cap = 10000;
  /// T = E(M kron M) is formed explicitly when (n+m)^2 is at most this; above it the
  /// spectral radius comes from power iteration on P -> E(M P M') (capped at 40,000).
  Index explicit_limit = 2500;
  Index max_dimension = 40000;
};

/// rho(E(M_sigma kron M_sigma)) over all update combinations (RAC) or over the orders of
/// `partition` (RP).
double almost_sure_rho(const Matrix& H, const Matrix& A, double beta, Index p, SamplingMode mode,
                       const BlockPartition* partition = nullptr, const KroneckerOptions& options = {});

struct RacRpComparison {
  double rho_rac = 0.0;
  std::vector<BlockPartition> partitions;
  std::vector<double> rho_rp;
  /// Some partition has rho_rp >= rho_rac.
  bool rp_not_better_somewhere = false;
  /// Every partition has rho_rp > rho_rac.
  bool rac_better_everywhere = false;
};

RacRpComparison compare_rac_rp(const Matrix& H, const Matrix& A, double beta, Index p,
                               std::uint64_t cap = 10000);

struct SimulationOptions {
  SamplingMode mode = SamplingMode::rac;
  /// Fixed composition for RP; contiguous when unset.
  std::optional<BlockPartition> partition;
  Index steps = 1000;
  Index trials = 20;
  std::uint64_t seed = 1;
  /// Initial (x; y) ~ N(0, variance I).
  double variance = 5.0;
  /// Linear term and rhs; zero when empty.
  Vector c;
  Vector b;
};

struct TrajectoryStats {
  /// norms[t][k] = ||z_k - z_star|| for trial t.
  std::vector<std::vector<double>> norms;
  /// Per-step median over trials.
  std::vector<double> median;
  double max_final = 0.0;
  Vector z_star;
};

TrajectoryStats simulate_iterates(const Matrix& H, const Matrix& A, double beta, Index p,
                                  const SimulationOptions& options);

struct SpectralReport {
  double rho_M = 0.0;
  double rho_T = 0.0;
  EigRange eig_QS;
  std::vector<BlockPartition> partitions;
  std::vector<double> rho_rp;
  bool assumption1_ok = true;
  bool expected_convergent = false;
  bool almost_sure_convergent = false;
  /// RP quantities for the supplied composition.
  std::optional<double> rho_M_rp;
  std::optional<double> rho_T_rp;

  nlohmann::json to_json() const;
};

struct AnalyzeOptions {
  Index p = 2;
  double beta = 1.0;
  std::optional<BlockPartition> rp_partition;
  ExpectationOptions expectation;
  KroneckerOptions kronecker;
  /// Include rho(E M_RP) for every partition (enumeration only).
  bool per_partition = true;
};

SpectralReport analyze(const Matrix& H, const Matrix& A, const AnalyzeOptions& options);
/// Dense (H, A) of an equality-constrained problem; rejects inequality rows and finite bounds.
std::pair<Matrix, Matrix> spectral_inputs(const Lcqp& problem);

/// Built-in 6 x 6 example: A_ij = 1 + gamma when i + j >= 6 (0-based), else 1.
Matrix divergence_example_matrix(double gamma = 1.0);

}  // namespace racqp
