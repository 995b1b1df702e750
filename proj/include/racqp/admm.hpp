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

#include <chrono>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "racqp/blocks.hpp"
#include "racqp/linalg.hpp"
#include "racqp/problem.hpp"

namespace racqp {

enum class SolverMode { rac, rp, cyclic, distributed, single_block };
enum class Grouping { none, supplied, auto_detect };
enum class Status { optimal, iteration_limit, time_limit, diverged };

const char* to_string(SolverMode mode) noexcept;
const char* to_string(Grouping grouping) noexcept;
const char* to_string(Status status) noexcept;
SolverMode parse_solver_mode(const std::string& text);

struct TraceRow {
  Index iter = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  double objective = 0.0;
  double elapsed_ms = 0.0;
};

/// Iterates of the augmented Lagrangian method. Duals follow the sign convention
/// H x + c - A_eq' y_eq - A_ineq' y_ineq - z = 0 at a KKT point (y_ineq <= 0).
struct SolverState {
  Vector x;
  Vector x_tilde;
  Vector s;
  Vector y_eq;
  Vector y_ineq;
  Vector z;
  Index iteration = 0;
  double elapsed_s = 0.0;
};

struct SolverOptions {
  SolverMode mode = SolverMode::rac;
  Index p = 1;
  double beta = 1.0;
  double eps = 1e-5;
  /// Separate dual tolerance; `eps` when unset.
  std::optional<double> eps_dual;
  Index max_iter = 10000;
  double max_time_s = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;

  Grouping grouping = Grouping::none;
  /// Super-variables for Grouping::supplied. With a partial Lagrangian, `local_rows[g]` lists
  /// rows of the stacked [A_eq; A_ineq] (equality rows first) enforced inside blocks.
  SuperVariableSet supers;
  bool partial_lagrangian = false;
  /// With a partial Lagrangian: enforce lb <= x <= ub inside the blocks and drop the split.
  bool local_bounds = false;

  /// Fixed composition for RP / CYCLIC / DISTRIBUTED; contiguous (or one random draw when
  /// super-variables are in use) when unset.
  std::optional<BlockPartition> partition;
  /// Split every variable, not only bounded ones, into x and x_tilde.
  bool split_free = false;
  /// Starting point; max(0, lb) clipped to ub when unset.
  std::optional<Vector> x0;
  /// Row-scale the constraints, solve, and keep tightening the inner tolerance (warm started)
  /// until the residuals recomputed on the unscaled model meet eps.
  bool scale_rows = false;
  /// Full iterate to resume from; takes precedence over x0.
  std::optional<SolverState> warm_start;

  bool record_trace = true;
  std::function<void(const TraceRow&)> on_iteration;

  double dual_eps() const { return eps_dual.value_or(eps); }
};

struct Residuals {
  double r_prim = 0.0;
  double r_dual = 0.0;
  double r_Aeq = 0.0;
  double r_Aineq = 0.0;
  double r_bounds = 0.0;
};

struct SolveResult {
  Vector x;
  double objective = 0.0;
  /// Relative residuals of the final iterate as used for termination.
  Residuals residuals;
  /// Recomputed on the unscaled model from (x, y, z) with the solver-agnostic formulas.
  Residuals verified;
  Status status = Status::iteration_limit;
  Index iterations = 0;
  double elapsed_s = 0.0;
  std::vector<TraceRow> trace;
  SolverState state;
  /// How blocks were solved, e.g. "cholesky", "kkt-diagonal", "kkt-general", "partial-lagrangian".
  std::string block_solver;
};

/// Whether x belongs to the x / x_tilde split (bounded, or every variable with split_free).
std::vector<char> split_mask(const Lcqp& problem, bool split_free);

SolverState initial_state(const Lcqp& problem, const SolverOptions& options);

/// Runs the configured mode. Throws BlockNotPositiveDefinite when a block matrix is not PD.
SolveResult solve(const Lcqp& problem, const SolverOptions& options);
SolveResult solve_single_block(const Lcqp& problem, const SolverOptions& options);
SolveResult solve_variant(const Lcqp& problem, const SolverOptions& options);

/// Exact minimization of the augmented Lagrangian over x[omega] with everything else fixed.
void update_block(SolverState& state, const Lcqp& problem, const IndexVector& omega,
                  const SolverOptions& options);
/// x_tilde = clamp(x - z / beta, lb, ub) on split coordinates (x elsewhere).
void update_xtilde(SolverState& state, const Lcqp& problem, const SolverOptions& options);
/// s = max(0, y_ineq / beta + b_ineq - A_ineq x).
void update_slack(SolverState& state, const Lcqp& problem, double beta);
/// y_eq, y_ineq and (on split coordinates) z ascent steps.
void update_duals(SolverState& state, const Lcqp& problem, const SolverOptions& options);

Residuals residuals(const SolverState& state, const Lcqp& problem, const SolverOptions& options);
/// y stacks equality then inequality multipliers; y_bounds are multipliers of lb <= x <= ub.
Residuals verify_solution(const Lcqp& problem, const Vector& x, const Vector& y, const Vector& y_bounds);

/// SINGLE_BLOCK for very sparse constraints on moderate n, RAC otherwise.
SolverMode choose_mode(const Lcqp& problem);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

/// Dense convex QP  min 0.5 x'Qx + g'x  s.t.  E x = f,  G x <= h, solved by a primal-dual
/// interior point method. Multipliers follow Q x + g - E' y_eq + G' lambda = 0, lambda >= 0.
struct SmallQpResult {
  Vector x;
  Vector y_eq;
  Vector lambda;
  bool converged = false;
  Index iterations = 0;
};
SmallQpResult solve_small_qp(const Matrix& Q, const Vector& g, const Matrix& E, const Vector& f,
                             const Matrix& G, const Vector& h, const Vector& x_start);

}  // namespace racqp
