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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "racqp/admm.hpp"
#include "racqp/blocks.hpp"

namespace racqp {

enum class PerturbKind { reassign, bit_flip, swap_balanced, qap_super_swap };

const char* to_string(PerturbKind kind) noexcept;
PerturbKind parse_perturb_kind(const std::string& text);

struct MipOptions {
  /// Mean of the truncated exponential for the number of perturbed atoms; 0.4 * atoms when unset.
  std::optional<double> lambda;
  Index np_min = 2;
  /// Number of atoms when unset (variables, or super-variables for qap_super_swap).
  std::optional<Index> np_max;
  /// Non-improving feasible hits before a perturbation; default_n_trial(n) when unset.
  std::optional<double> n_trial;
  double feasibility_eps = 1e-6;

  double max_time_s = 10.0;
  Index max_sweeps = 1000000;
  /// Consecutive perturbations without a better incumbent.
  Index max_no_improve = 1000;
  std::optional<double> target_objective;

  PerturbKind kind = PerturbKind::reassign;
  /// Perturb (from the incumbent, or the current point) after this many sweeps with no feasible point.
  Index stall_sweeps = 50;
  /// Block reformulation for one cardinality row: its residual is restricted to {0, 1} per block.
  bool bisection_blocks = false;

  Index enumeration_cap = 16;
  Index branch_and_bound_cap = 30;
};

/// N_trial as printed for the method: min(2, 0.005 n).
double default_n_trial(Index n);

struct BestSolution {
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  bool feasible = false;
  double found_at_s = 0.0;
};

struct ImprovementEvent {
  double time_s = 0.0;
  Index sweep = 0;
  double objective = 0.0;
};

struct MipResult {
  SolveResult result;
  BestSolution best;
  std::vector<ImprovementEvent> events;
  Index sweeps = 0;
  Index perturbations = 0;
};

/// Solve-perturb-solve driver. Binary blocks are minimized exactly; continuous variables in a
/// block are updated afterwards by a bounded block QP. General integers are rejected.
MipResult solve_mip(const Lcqp& problem, const SolverOptions& solver, const MipOptions& options);

/// min 0.5 x'Qx + q'x over x in {0,1}^d with E x = f and G x <= h.
struct BinarySubproblem {
  Matrix Q;
  Vector q;
  Matrix E;
  Vector f;
  Matrix G;
  Vector h;
};

struct BinaryAssignment {
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

enum class BinaryMethod { automatic, enumerate, branch_and_bound };

/// Global optimum; ties go to the lexicographically smallest assignment. Gray-code enumeration
/// up to `enumeration_cap` variables, depth-first branch-and-bound up to `bnb_cap`.
BinaryAssignment exact_binary_subsolve(const BinarySubproblem& sub,
                                       BinaryMethod method = BinaryMethod::automatic,
                                       Index enumeration_cap = 16, Index bnb_cap = 30);

struct PerturbResult {
  Vector x;
  /// Atoms actually modified (variables, or super-variables for qap_super_swap).
  Index changed = 0;
};

/// Integer in [lo, hi] from an exponential with mean `lambda` truncated to [lo, hi + 1)
/// by inverse CDF, then floored.
Index sample_perturbation_count(double lambda, Index lo, Index hi, Rng& rng);

/// Negates the listed binary coordinates.
Vector bit_flip(const Vector& x, const IndexVector& indices);

PerturbResult perturb(const Vector& x_best, PerturbKind kind, const MipOptions& options, Rng& rng,
                      const Lcqp& problem, const SuperVariableSet* supers = nullptr);

/// Largest violation of equality rows, inequality rows (one-sided) and bounds.
double constraint_violation(const Lcqp& problem, const Vector& x);

/// max(|A_eq x - b_eq|, |max(0, A_ineq x - b_ineq)|, bound violation) <= eps.
bool feasibility(const Lcqp& problem, const Vector& x, double eps);

/// (found - reference) / (1 + |reference|), negated when maximizing.
double gap(double found, double reference, bool maximize = false);

}  // namespace racqp
