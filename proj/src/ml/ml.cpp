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

#include "racqp/ml.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <Eigen/Cholesky>

namespace racqp {

double soft_threshold(double a, double b) {
  require(b >= 0.0, Errc::invalid_argument, "soft threshold needs b >= 0");
  if (b >= std::abs(a)) return 0.0;
  return a > 0.0 ? -(a - b) : -(a + b);
}

Vector update_z(const Vector& beta, const Vector& xi, double gamma, double lambda, double alpha) {
  require(beta.size() == xi.size(), Errc::dimension, "beta and xi differ in length");
  const double denom = (1.0 - alpha) * lambda + gamma;
  require(denom > 0.0, Errc::invalid_argument, "z update denominator (1 - alpha) lambda + gamma is zero");
  Vector z(beta.size());
  for (Index i = 0; i < z.size(); ++i)
    z[i] = soft_threshold(xi[i] - gamma * beta[i], lambda * alpha) / denom;
  return z;
}

double default_gamma(const Matrix& X, double lambda) {
  const double cells = static_cast<double>(std::max<Index>(1, X.size()));
  const double density = static_cast<double>((X.array() != 0.0).count()) / cells;
  return density < 0.995 ? 0.1 * lambda : lambda;
}

double elastic_net_objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda,
                             double alpha) {
  const double n = static_cast<double>(X.rows());
  return (y - X * beta).squaredNorm() / (2.0 * n) +
         lambda * (0.5 * (1.0 - alpha) * beta.squaredNorm() + alpha * beta.lpNorm<1>());
}

ElasticNetState fit_elastic_net(const Matrix& X, const Vector& y, double lambda, double alpha,
                                const ElasticNetOptions& opt) {
  const Index n = X.rows(), nf = X.cols();
  require(n >= 1 && nf >= 1, Errc::invalid_argument, "elastic net needs observations and features");
  require(y.size() == n, Errc::dimension, "response length differs from the observation count");
  require(lambda >= 0.0, Errc::invalid_argument, "lambda must be non-negative");
  require(alpha >= 0.0 && alpha <= 1.0, Errc::invalid_argument, "alpha must lie in [0, 1]");
  require(opt.block_size >= 1, Errc::invalid_argument, "block size must be positive");
  require(opt.mode != SolverMode::distributed && opt.mode != SolverMode::single_block,
          Errc::invalid_argument, "elastic net supports rac, rp and cyclic block orders");

  ElasticNetState st;
  st.lambda = lambda;
  st.alpha = alpha;
  st.gamma = opt.gamma.value_or(default_gamma(X, lambda));
  require(st.gamma >= 0.0, Errc::invalid_argument, "gamma must be non-negative");
  const bool unpenalized = (1.0 - alpha) * lambda + st.gamma == 0.0;
  require(!unpenalized || lambda == 0.0, Errc::invalid_argument,
          "gamma = 0 needs lambda = 0 or alpha < 1");

  const Matrix A = X / std::sqrt(static_cast<double>(n));
  const Vector c = -X.transpose() * y / static_cast<double>(n);
  st.beta = Vector::Zero(nf);
  st.z = Vector::Zero(nf);
  st.xi = Vector::Zero(nf);
  Vector a_beta = Vector::Zero(n);

  Rng rng(opt.seed);
  const Index p = (nf + opt.block_size - 1) / opt.block_size;
  const BlockPartition fixed = random_partition(nf, p, rng);
  const double gamma = st.gamma;

  for (Index k = 0; k < opt.max_iter; ++k) {
    const BlockPartition blocks = opt.mode == SolverMode::rac ? random_partition(nf, p, rng) : fixed;
    const UpdateOrder order = opt.mode == SolverMode::cyclic ? identity_order(p) : random_order(p, rng);
    const Vector beta_prev = st.beta;
    for (Index slot : order) {
      const IndexVector& omega = blocks[slot];
      const Index b = static_cast<Index>(omega.size());
      if (b == 0) continue;
      const Matrix a_w = A(Eigen::all, omega);
      const Vector beta_w = st.beta(omega);
      Matrix m = a_w.transpose() * a_w;
      m.diagonal().array() += gamma;
      const Vector rhs = -(c(omega) - st.xi(omega) - gamma * st.z(omega) +
                           a_w.transpose() * (a_beta - a_w * beta_w));
      Eigen::LLT<Matrix> llt(m);
      if (llt.info() != Eigen::Success) throw BlockNotPositiveDefinite(slot, omega);
      const Vector next = llt.solve(rhs);
      a_beta += a_w * (next - beta_w);
      st.beta(omega) = next;
    }
    const Vector z_prev = st.z;
    st.z = unpenalized ? st.beta : update_z(st.beta, st.xi, gamma, lambda, alpha);
    st.xi -= gamma * (st.beta - st.z);
    st.iterations = k + 1;
    if (opt.record_objective) st.objective_trace.push_back(elastic_net_objective(X, y, st.beta, lambda, alpha));

    const double change = std::max({(st.beta - st.z).lpNorm<Eigen::Infinity>(),
                                    gamma * (st.z - z_prev).lpNorm<Eigen::Infinity>(),
                                    (st.beta - beta_prev).lpNorm<Eigen::Infinity>()});
    if (opt.tol > 0.0 && change < opt.tol) {
      st.converged = true;
      break;
    }
  }
  return st;
}

nlohmann::json SvmModel::to_json() const {
  nlohmann::json j;
  j["support"] = support;
  j["coefficients"] = std::vector<double>(support_coef.data(), support_coef.data() + support_coef.size());
  j["labels"] = std::vector<double>(support_labels.data(), support_labels.data() + support_labels.size());
  nlohmann::json pts = nlohmann::json::array();
  for (Index i = 0; i < support_points.rows(); ++i) {
    const Vector row = support_points.row(i).transpose();
    pts.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["support_points"] = pts;
  j["dual"] = std::vector<double>(z.data(), z.data() + z.size());
  j["bias"] = bias;
  j["sigma"] = sigma;
  j["C"] = C;
  j["status"] = racqp::to_string(status);
  j["iterations"] = iterations;
  return j;
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
  auto to_vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  SvmModel m;
  try {
    m.support = j.at("support").get<IndexVector>();
    m.support_coef = to_vec(j.at("coefficients").get<std::vector<double>>());
    m.support_labels = to_vec(j.at("labels").get<std::vector<double>>());
    const auto pts = j.at("support_points").get<std::vector<std::vector<double>>>();
    const Index dim = pts.empty() ? 0 : static_cast<Index>(pts.front().size());
    m.support_points.resize(static_cast<Index>(pts.size()), dim);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      require(static_cast<Index>(pts[i].size()) == dim, Errc::parse, "ragged support points");
      for (Index c = 0; c < dim; ++c) m.support_points(static_cast<Index>(i), c) = pts[i][static_cast<std::size_t>(c)];
    }
    if (j.contains("dual")) m.z = to_vec(j.at("dual").get<std::vector<double>>());
    m.bias = j.at("bias").get<double>();
    m.sigma = j.at("sigma").get<double>();
    m.C = j.at("C").get<double>();
    m.iterations = j.value("iterations", Index{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("bad SVM model: ") + e.what());
  }
  const auto k = static_cast<Index>(m.support.size());
  require(m.support_coef.size() == k && m.support_labels.size() == k && m.support_points.rows() == k,
          Errc::parse, "SVM model support arrays differ in length");
  return m;
}

SvmModel train_csvc(const SvmSpec& spec, const SvmOptions& opt) {
  const Index n = spec.features.rows();
  require(n <= opt.max_points, Errc::cap_exceeded,
          "SVM training set of " + std::to_string(n) + " points exceeds the dense kernel cap");
  require(opt.block_size >= 1, Errc::invalid_argument, "block size must be positive");
  const SvmDual dual = gen_svm_dual(spec);

  SolverOptions so;
  so.mode = opt.mode;
  so.p = std::max<Index>(1, (n + opt.block_size - 1) / opt.block_size);
  so.beta = opt.beta.value_or(0.1 * static_cast<double>(so.p));
  so.eps = opt.eps;
  so.eps_dual = opt.eps_dual;
  so.max_iter = opt.max_iter;
  so.max_time_s = opt.max_time_s;
  so.seed = opt.seed;
  const SolveResult res = solve(dual.problem, so);

  SvmModel m;
  m.sigma = spec.sigma;
  m.C = spec.C;
  m.status = res.status;
  m.iterations = res.iterations;
  // The bounded copy of the split pair lies in the box exactly.
  m.z = res.state.x_tilde.cwiseMax(0.0).cwiseMin(spec.C);

  for (Index i = 0; i < n; ++i)
    if (m.z[i] > opt.support_tol) m.support.push_back(i);
  m.support_coef = m.z(m.support);
  m.support_labels = spec.labels(m.support);
  m.support_points = spec.features(m.support, Eigen::all);

  // w'phi(x_i) = y_i (Q z)_i since Q = diag(y) K diag(y).
  const Vector qz = dual.problem.H * m.z;
  auto average = [&](auto&& pick) {
    double sum = 0.0;
    Index count = 0;
    for (Index i = 0; i < n; ++i) {
      if (!pick(i)) continue;
      sum += spec.labels[i] - spec.labels[i] * qz[i];
      ++count;
    }
    return std::pair{sum, count};
  };
  auto [sum, count] = average([&](Index i) {
    return m.z[i] > opt.support_tol && m.z[i] < spec.C - opt.support_tol;
  });
  if (count == 0) std::tie(sum, count) = average([&](Index i) { return m.z[i] > opt.support_tol; });
  if (count == 0) std::tie(sum, count) = average([](Index) { return true; });
  m.bias = sum / static_cast<double>(count);
  return m;
}

namespace {

double decision_terms(const SvmModel& model, const Vector& x, double* magnitude) {
  require(model.support_points.rows() == 0 || x.size() == model.support_points.cols(),
          Errc::dimension, "feature length differs from the model");
  double f = model.bias, mag = std::abs(model.bias);
  const double scale = 2.0 * model.sigma * model.sigma;
  for (Index i = 0; i < model.support_points.rows(); ++i) {
    const double kv = std::exp(-(model.support_points.row(i).transpose() - x).squaredNorm() / scale);
    const double t = model.support_labels[i] * model.support_coef[i] * kv;
    f += t;
    mag += std::abs(t);
  }
  if (magnitude != nullptr) *magnitude = mag;
  return f;
}

}  // namespace

double decision_value(const SvmModel& model, const Vector& x) { return decision_terms(model, x, nullptr); }

int predict(const SvmModel& model, const Vector& x) {
  double mag = 0.0;
  const double f = decision_terms(model, x, &mag);
  if (std::abs(f) <= 1e-12 * std::max(1.0, mag)) return 1;
  return f > 0.0 ? 1 : -1;
}

double accuracy(const SvmModel& model, const Matrix& features, const Vector& labels) {
  require(features.rows() > 0, Errc::invalid_argument, "accuracy needs at least one test point");
  require(labels.size() == features.rows(), Errc::dimension, "label count differs from point count");
  Index hits = 0;
  for (Index i = 0; i < features.rows(); ++i)
    if (predict(model, features.row(i).transpose()) == static_cast<int>(labels[i])) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(features.rows());
}

}  // namespace racqp
