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

#include <optional>
#include <vector>

#include "json.hpp"
#include "racqp/admm.hpp"
#include "racqp/generators.hpp"

namespace racqp {

// ---------------------------------------------------------------------------
// Elastic net: min 1/(2n) |y - X beta|^2 + lambda ((1 - alpha)/2 |beta|^2 + alpha |beta|_1)

/// -(a - b) for a > b, -(a + b) for a < -b, 0 when |a| <= b. Requires b >= 0.
double soft_threshold(double a, double b);

/// Closed-form minimizer of the split variable: S(xi - gamma beta, lambda alpha) / ((1 - alpha) lambda + gamma).
Vector update_z(const Vector& beta, const Vector& xi, double gamma, double lambda, double alpha);

struct ElasticNetOptions {
  /// rac reshuffles blocks every iteration, rp shuffles the order of fixed blocks, cyclic keeps both.
  SolverMode mode = SolverMode::rac;
  /// Coefficients per block; the block count is ceil(features / block_size).
  Index block_size = 100;
  /// 0.1 lambda for data density below 0.995, lambda otherwise, when unset.
  std::optional<double> gamma;
  Index max_iter = 1000;
  /// Stop once |beta - z| and gamma |z - z_prev| (infinity norms) fall below tol. Zero runs max_iter.
  double tol = 1e-8;
  std::uint64_t seed = 1;
  bool record_objective = false;
};

struct ElasticNetState {
  Vector beta;
  Vector z;
  Vector xi;
  double gamma = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  Index iterations = 0;
  bool converged = false;
  /// Objective at beta after each iteration when requested.
  std::vector<double> objective_trace;
};

double default_gamma(const Matrix& X, double lambda);

double elastic_net_objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                             double alpha);

ElasticNetState fit_elastic_net(const Matrix& X, const Vector& y, double lambda, double alpha,
                                const ElasticNetOptions& options = {});

// ---------------------------------------------------------------------------
// C-SVC on the dual: min 0.5 z'Qz - e'z, y'z = 0, 0 <= z <= C.

struct SvmOptions {
  SolverMode mode = SolverMode::rac;
  /// Points per block; p = ceil(n / block_size).
  Index block_size = 100;
  /// 0.1 p when unset.
  std::optional<double> beta;
  double eps = 1e-1;
  double eps_dual = 1.0;
  Index max_iter = 10;
  double max_time_s = std::numeric_limits<double>::infinity();
  double support_tol = 1e-8;
  std::uint64_t seed = 1;
  /// Dense kernel matrices above this many training points are refused.
  Index max_points = 5000;
};

struct SvmModel {
  /// Dual coefficients for every training point, inside [0, C].
  Vector z;
  IndexVector support;
  Vector support_coef;    // z on the support
  Vector support_labels;  // y on the support
  Matrix support_points;  // one row per support vector
  double bias = 0.0;
  double sigma = 1.0;
  double C = 1.0;
  Status status = Status::iteration_limit;
  Index iterations = 0;

  nlohmann::json to_json() const;
  static SvmModel from_json(const nlohmann::json& j);
};

SvmModel train_csvc(const SvmSpec& spec, const SvmOptions& options = {});

/// sum_i y_i z_i K(x_i, x) + b over the support.
double decision_value(const SvmModel& model, const Vector& x);

/// Sign of the decision value; values within round-off of zero count as +1.
int predict(const SvmModel& model, const Vector& x);

/// Percentage of rows of `features` whose prediction matches `labels`.
double accuracy(const SvmModel& model, const Matrix& features, const Vector& labels);

}  // namespace racqp
