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

#include "racqp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "racqp/linalg.hpp"

namespace racqp {

namespace {

void check_inputs(const Matrix& H, const Matrix& A, double beta) {
  require(H.rows() == H.cols(), Errc::dimension, "H must be square");
  require(A.cols() == H.rows(), Errc::dimension, "A must have n columns");
  require(beta > 0.0, Errc::invalid_argument, "beta must be positive");
}

Matrix build_L(const Matrix& S, const BlockPartition& partition, const UpdateOrder& order) {
  const Index n = S.rows();
  Matrix L = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      for (Index r : partition[order[i]])
        for (Index c : partition[order[j]]) L(r, c) = S(r, c);
    }
  }
  return L;
}

Matrix inverse_L(const Matrix& L) {
  return L.partialPivLu().solve(Matrix::Identity(L.rows(), L.cols()));
}

std::uint64_t combination_count(Index n, Index p) {
  try {
    return count_update_combinations(n, p);
  } catch (const Error&) {
    return std::numeric_limits<std::uint64_t>::max();
  }
}

/// Calls fn(partition, order) for every update combination in canonical order.
void for_each_combination(Index n, Index p, std::uint64_t cap,
                          const std::function<void(const BlockPartition&, const UpdateOrder&)>& fn) {
  const std::uint64_t total = combination_count(n, p);
  require(total <= cap, Errc::cap_exceeded,
          "update combinations exceed the enumeration cap; use Monte Carlo sampling");
  for (const BlockPartition& part : enumerate_partitions(n, p, cap)) {
    UpdateOrder order = identity_order(p);
    do {
      fn(part, order);
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

void for_each_order(const BlockPartition& part,
                    const std::function<void(const UpdateOrder&)>& fn) {
  UpdateOrder order = identity_order(static_cast<Index>(part.size()));
  do {
    fn(order);
  } while (std::next_permutation(order.begin(), order.end()));
}

Matrix kron_square(const Matrix& M) {
  const Index d = M.rows();
  Matrix K(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) K.block(i * d, j * d, d, d) = M(i, j) * M;
  return K;
}

/// Spectral radius of P -> mean(M P M') by power iteration from the identity. The operator
/// maps the PSD cone into itself, so its spectral radius is attained on a PSD eigenvector.
double cone_power_rho(const std::vector<Matrix>& maps) {
  const Index d = maps.front().rows();
  Matrix P = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d));
  double rho = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Matrix next = Matrix::Zero(d, d);
    for (const Matrix& M : maps) next.noalias() += M * P * M.transpose();
    next /= static_cast<double>(maps.size());
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    const double prev = rho;
    rho = norm;
    P = next / norm;
    if (it > 50 && std::abs(rho - prev) <= 1e-13 * std::max(1.0, rho)) break;
  }
  return rho;
}

double rho_of_maps(const std::vector<Matrix>& maps, const KroneckerOptions& opt) {
  const Index d = maps.front().rows();
  require(d * d <= opt.max_dimension, Errc::cap_exceeded,
          "Kronecker test size cap exceeded: (n+m)^2 = " + std::to_string(d * d));
  if (d * d <= opt.explicit_limit) {
    Matrix T = Matrix::Zero(d * d, d * d);
    for (const Matrix& M : maps) T += kron_square(M);
    T /= static_cast<double>(maps.size());
    return spectral_radius(T);
  }
  return cone_power_rho(maps);
}

nlohmann::json partition_json(const BlockPartition& part) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& g : part) j.push_back(g);
  return j;
}

}  // namespace

MappingSet build_mapping(const Matrix& H, const Matrix& A, double beta,
                         const BlockPartition& partition, const UpdateOrder& order) {
  check_inputs(H, A, beta);
  check_partition(partition, H.rows());
  require(order.size() == partition.size(), Errc::dimension, "order length must equal p");
  const Index n = H.rows(), m = A.rows();
  MappingSet ms;
  ms.S = H + beta * A.transpose() * A;
  for (std::size_t k = 0; k < partition.size(); ++k) {
    const auto& blk = partition[k];
    Matrix sb(static_cast<Index>(blk.size()), static_cast<Index>(blk.size()));
    for (std::size_t a = 0; a < blk.size(); ++a)
      for (std::size_t b = 0; b < blk.size(); ++b) sb(static_cast<Index>(a), static_cast<Index>(b)) = ms.S(blk[a], blk[b]);
    try {
      (void)cholesky(sb);
    } catch (const Error&) {
      throw BlockNotPositiveDefinite(static_cast<Index>(k), blk);
    }
  }
  ms.L = build_L(ms.S, partition, order);
  ms.R = ms.L - ms.S;
  ms.L_bar = Matrix::Zero(n + m, n + m);
  ms.L_bar.topLeftCorner(n, n) = ms.L;
  ms.L_bar.bottomLeftCorner(m, n) = beta * A;
  ms.L_bar.bottomRightCorner(m, m) = Matrix::Identity(m, m);
  ms.R_bar = Matrix::Zero(n + m, n + m);
  ms.R_bar.topLeftCorner(n, n) = ms.R;
  ms.R_bar.topRightCorner(n, m) = A.transpose();
  ms.R_bar.bottomRightCorner(m, m) = Matrix::Identity(m, m);
  ms.M = ms.L_bar.partialPivLu().solve(ms.R_bar);
  return ms;
}

std::vector<char> check_assumption1(const Matrix& H, const Matrix& A, double beta,
                                    const BlockPartition& partition) {
  check_inputs(H, A, beta);
  std::vector<char> ok;
  for (const auto& blk : partition) {
    const Index b = static_cast<Index>(blk.size());
    Matrix sb(b, b);
    for (Index i = 0; i < b; ++i)
      for (Index j = 0; j < b; ++j)
        sb(i, j) = H(blk[i], blk[j]) + beta * A.col(blk[i]).dot(A.col(blk[j]));
    try {
      (void)cholesky(sb);
      ok.push_back(1);
    } catch (const Error&) {
      ok.push_back(0);
    }
  }
  return ok;
}

Matrix partition_Q(const Matrix& H, const Matrix& A, double beta, const BlockPartition& partition) {
  check_inputs(H, A, beta);
  const Matrix S = H + beta * A.transpose() * A;
  Matrix Q = Matrix::Zero(S.rows(), S.cols());
  Index terms = 0;
  for_each_order(partition, [&](const UpdateOrder& order) {
    Q += inverse_L(build_L(S, partition, order));
    ++terms;
  });
  return Q / static_cast<double>(terms);
}

ExpectedQ expected_Q(const Matrix& H, const Matrix& A, double beta, Index p,
                     const ExpectationOptions& options) {
  check_inputs(H, A, beta);
  const Index n = H.rows();
  require(p >= 1 && p <= n, Errc::invalid_argument, "block count must lie in [1, n]");
  const Matrix S = H + beta * A.transpose() * A;
  ExpectedQ out;
  out.Q = Matrix::Zero(n, n);

  if (combination_count(n, p) <= options.cap) {
    const auto parts = enumerate_partitions(n, p, options.cap);
    for (const auto& part : parts) {
      const Matrix Qv = partition_Q(H, A, beta, part);
      out.max_partition_asymmetry =
          std::max(out.max_partition_asymmetry, (Qv - Qv.transpose()).cwiseAbs().maxCoeff());
      out.Q += Qv;
    }
    out.Q /= static_cast<double>(parts.size());
    out.terms = static_cast<Index>(combination_count(n, p));
    out.exact = true;
    return out;
  }
  require(options.samples > 0, Errc::cap_exceeded,
          "update combinations exceed the enumeration cap and Monte Carlo is disabled");
  Rng rng(options.seed);
  for (Index k = 0; k < options.samples; ++k) {
    const BlockPartition part = random_partition(n, p, rng);
    out.Q += inverse_L(build_L(S, part, random_order(p, rng)));
  }
  out.Q /= static_cast<double>(options.samples);
  out.terms = options.samples;
  out.exact = false;
  return out;
}

Matrix mapping_from_Q(const Matrix& Q, const Matrix& H, const Matrix& A, double beta) {
  check_inputs(H, A, beta);
  const Index n = H.rows(), m = A.rows();
  const Matrix S = H + beta * A.transpose() * A;
  const Matrix QS = Q * S;
  Matrix M(n + m, n + m);
  M.topLeftCorner(n, n) = Matrix::Identity(n, n) - QS;
  M.topRightCorner(n, m) = Q * A.transpose();
  M.bottomLeftCorner(m, n) = -beta * A + beta * A * QS;
  M.bottomRightCorner(m, m) = Matrix::Identity(m, m) - beta * A * Q * A.transpose();
  return M;
}

Matrix expected_M(const Matrix& H, const Matrix& A, double beta, Index p,
                  const ExpectationOptions& options) {
  return mapping_from_Q(expected_Q(H, A, beta, p, options).Q, H, A, beta);
}

Matrix average_M(const Matrix& H, const Matrix& A, double beta, Index p, std::uint64_t cap) {
  check_inputs(H, A, beta);
  const Index d = H.rows() + A.rows();
  Matrix sum = Matrix::Zero(d, d);
  Index terms = 0;
  for_each_combination(H.rows(), p, cap, [&](const BlockPartition& part, const UpdateOrder& order) {
    sum += build_mapping(H, A, beta, part, order).M;
    ++terms;
  });
  return sum / static_cast<double>(terms);
}

EigRange eig_QS_bound(const Matrix& Q, const Matrix& S) {
  require(Q.rows() == S.rows() && Q.cols() == S.cols(), Errc::dimension, "Q and S must match");
  const Matrix Qs = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Qs);
  require(es.info() == Eigen::Success, Errc::convergence, "eigen decomposition of Q failed");
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  require(es.eigenvalues().minCoeff() > -1e-12 * scale, Errc::not_positive_definite,
          "expected Q is not positive semidefinite");
  const Matrix root = es.eigenvectors() *
                      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                      es.eigenvectors().transpose();
  const Matrix sym = root * (0.5 * (S + S.transpose())) * root;
  const Vector ev = symmetric_eigenvalues(0.5 * (sym + sym.transpose()));
  return {ev.minCoeff(), ev.maxCoeff()};
}

double almost_sure_rho(const Matrix& H, const Matrix& A, double beta, Index p, SamplingMode mode,
                       const BlockPartition* partition, const KroneckerOptions& options) {
  check_inputs(H, A, beta);
  std::vector<Matrix> maps;
  if (mode == SamplingMode::rac) {
    for_each_combination(H.rows(), p, options.cap,
                         [&](const BlockPartition& part, const UpdateOrder& order) {
                           maps.push_back(build_mapping(H, A, beta, part, order).M);
                         });
  } else {
    const BlockPartition part = partition != nullptr ? *partition : contiguous_partition(H.rows(), p);
    for_each_order(part, [&](const UpdateOrder& order) {
      maps.push_back(build_mapping(H, A, beta, part, order).M);
    });
  }
  return rho_of_maps(maps, options);
}

RacRpComparison compare_rac_rp(const Matrix& H, const Matrix& A, double beta, Index p,
                               std::uint64_t cap) {
  ExpectationOptions eo;
  eo.cap = cap;
  RacRpComparison out;
  out.rho_rac = spectral_radius(expected_M(H, A, beta, p, eo));
  out.partitions = enumerate_partitions(H.rows(), p, cap);
  out.rac_better_everywhere = true;
  for (const auto& part : out.partitions) {
    const double r = spectral_radius(mapping_from_Q(partition_Q(H, A, beta, part), H, A, beta));
    out.rho_rp.push_back(r);
    if (r >= out.rho_rac) out.rp_not_better_somewhere = true;
    if (!(r > out.rho_rac)) out.rac_better_everywhere = false;
  }
  return out;
}

TrajectoryStats simulate_iterates(const Matrix& H, const Matrix& A, double beta, Index p,
                                  const SimulationOptions& opt) {
  check_inputs(H, A, beta);
  const Index n = H.rows(), m = A.rows(), d = n + m;
  const Vector c = opt.c.size() == 0 ? Vector::Zero(n) : opt.c;
  const Vector b = opt.b.size() == 0 ? Vector::Zero(m) : opt.b;
  require(c.size() == n && b.size() == m, Errc::dimension, "c or b has the wrong length");

  TrajectoryStats out;
  Matrix K = Matrix::Zero(d, d);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = -A.transpose();
  K.bottomLeftCorner(m, n) = A;
  Vector rhs(d);
  rhs << -c, b;
  out.z_star = K.completeOrthogonalDecomposition().solve(rhs);

  Vector b_bar(d);
  b_bar << -c + beta * A.transpose() * b, beta * b;

  const BlockPartition fixed = opt.partition ? *opt.partition : contiguous_partition(n, p);
  std::map<IndexVector, std::pair<Matrix, Vector>> cache;
  auto step_map = [&](const BlockPartition& part, const UpdateOrder& order)
      -> const std::pair<Matrix, Vector>& {
    IndexVector key;
    for (Index g : order) {
      key.insert(key.end(), part[g].begin(), part[g].end());
      key.push_back(-1);
    }
    auto it = cache.find(key);
    if (it == cache.end()) {
      const MappingSet ms = build_mapping(H, A, beta, part, order);
      it = cache.emplace(key, std::pair{ms.M, Vector(ms.L_bar.partialPivLu().solve(b_bar))}).first;
    }
    return it->second;
  };

  Rng rng(opt.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(opt.variance));
  out.norms.assign(static_cast<std::size_t>(opt.trials), {});
  for (Index t = 0; t < opt.trials; ++t) {
    Vector z(d);
    for (Index i = 0; i < d; ++i) z[i] = normal(rng);
    auto& tr = out.norms[static_cast<std::size_t>(t)];
    tr.reserve(static_cast<std::size_t>(opt.steps + 1));
    tr.push_back((z - out.z_star).norm());
    for (Index k = 0; k < opt.steps; ++k) {
      const auto& [M, off] = opt.mode == SamplingMode::rac
                                 ? step_map(random_partition(n, p, rng), random_order(p, rng))
                                 : step_map(fixed, random_order(p, rng));
      z = M * z + off;
      tr.push_back((z - out.z_star).norm());
    }
  }
  out.median.resize(static_cast<std::size_t>(opt.steps + 1));
  std::vector<double> col(static_cast<std::size_t>(opt.trials));
  for (Index k = 0; k <= opt.steps; ++k) {
    for (Index t = 0; t < opt.trials; ++t) col[t] = out.norms[t][k];
    std::sort(col.begin(), col.end());
    const std::size_t h = col.size() / 2;
    out.median[k] = col.empty() ? 0.0 : col.size() % 2 == 1 ? col[h] : 0.5 * (col[h - 1] + col[h]);
  }
  for (const auto& tr : out.norms) out.max_final = std::max(out.max_final, tr.back());
  return out;
}

nlohmann::json SpectralReport::to_json() const {
  nlohmann::json j;
  j["rho_M"] = rho_M;
  j["rho_T"] = rho_T;
  j["eig_QS"] = {{"min", eig_QS.min}, {"max", eig_QS.max}};
  j["assumption1_ok"] = assumption1_ok;
  j["expected_convergent"] = expected_convergent;
  j["almost_sure_convergent"] = almost_sure_convergent;
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < partitions.size(); ++i)
    per.push_back({{"partition", partition_json(partitions[i])}, {"rho", rho_rp[i]}});
  j["rho_rp"] = per;
  if (rho_M_rp) j["rho_M_rp"] = *rho_M_rp;
  if (rho_T_rp) j["rho_T_rp"] = *rho_T_rp;
  return j;
}

SpectralReport analyze(const Matrix& H, const Matrix& A, const AnalyzeOptions& options) {
  check_inputs(H, A, options.beta);
  const Index n = H.rows(), p = options.p;
  const double beta = options.beta;
  SpectralReport rep;

  const bool enumerable = combination_count(n, p) <= options.expectation.cap;
  if (enumerable) {
    for (const auto& part : enumerate_partitions(n, p, options.expectation.cap)) {
      const auto flags = check_assumption1(H, A, beta, part);
      if (std::find(flags.begin(), flags.end(), 0) != flags.end()) rep.assumption1_ok = false;
    }
  } else {
    Rng rng(options.expectation.seed);
    for (int k = 0; k < 200 && rep.assumption1_ok; ++k) {
      const auto flags = check_assumption1(H, A, beta, random_partition(n, p, rng));
      rep.assumption1_ok = std::find(flags.begin(), flags.end(), 0) == flags.end();
    }
  }
  require(rep.assumption1_ok, Errc::not_positive_definite,
          "a block matrix H_bb + beta A_b'A_b is not positive definite");

  const ExpectedQ eq = expected_Q(H, A, beta, p, options.expectation);
  const Matrix S = H + beta * A.transpose() * A;
  rep.rho_M = spectral_radius(mapping_from_Q(eq.Q, H, A, beta));
  rep.eig_QS = eig_QS_bound(eq.Q, S);
  rep.expected_convergent = rep.rho_M < 1.0;
  if (enumerable) {
    rep.rho_T = almost_sure_rho(H, A, beta, p, SamplingMode::rac, nullptr, options.kronecker);
    rep.almost_sure_convergent = rep.rho_T < 1.0;
    if (options.per_partition) {
      rep.partitions = enumerate_partitions(n, p, options.expectation.cap);
      for (const auto& part : rep.partitions)
        rep.rho_rp.push_back(
            spectral_radius(mapping_from_Q(partition_Q(H, A, beta, part), H, A, beta)));
    }
  } else {
    rep.rho_T = std::numeric_limits<double>::quiet_NaN();
  }
  if (options.rp_partition) {
    rep.rho_M_rp = spectral_radius(
        mapping_from_Q(partition_Q(H, A, beta, *options.rp_partition), H, A, beta));
    rep.rho_T_rp = almost_sure_rho(H, A, beta, p, SamplingMode::rp, &*options.rp_partition,
                                   options.kronecker);
  }
  return rep;
}

std::pair<Matrix, Matrix> spectral_inputs(const Lcqp& problem) {
  require(problem.num_ineq() == 0, Errc::invalid_argument,
          "spectral analysis accepts equality-constrained problems only; found " +
              std::to_string(problem.num_ineq()) + " inequality rows");
  for (Index j = 0; j < problem.num_vars(); ++j)
    require(!problem.is_bounded(j), Errc::invalid_argument,
            "spectral analysis does not accept variable bounds");
  return {Matrix(problem.H), Matrix(problem.A_eq)};
}

Matrix divergence_example_matrix(double gamma) {
  Matrix A = Matrix::Ones(6, 6);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      if (i + j >= 6) A(i, j) = 1.0 + gamma;
  return A;
}

}  // namespace racqp
