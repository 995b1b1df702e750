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

#include "racqp/generators.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace racqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SparseMatrix random_constraints(Index rows, Index n, double density, Rng& rng) {
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Eigen::Triplet<double, Index>> trips;
  for (Index i = 0; i < rows; ++i) {
    bool any = false;
    for (Index j = 0; j < n; ++j) {
      if (keep(rng)) {
        trips.emplace_back(i, j, normal(rng));
        any = true;
      }
    }
    if (!any) trips.emplace_back(i, pick(rng), normal(rng));
  }
  SparseMatrix a(rows, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

SparseMatrix ones_row(Index n) {
  SparseMatrix a(1, n);
  a.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Index j = 0; j < n; ++j) a.insert(0, j) = 1.0;
  a.makeCompressed();
  return a;
}

}  // namespace

Vector log_uniform_spectrum(Index n, double condition, Rng& rng) {
  require(n >= 1, Errc::invalid_argument, "spectrum size must be positive");
  require(condition >= 1.0, Errc::invalid_argument, "condition target must be >= 1");
  const double top = std::log10(condition);
  std::uniform_real_distribution<double> u(0.0, top);
  Vector e(n);
  for (Index i = 0; i < n; ++i) e[i] = u(rng);
  const double lo = e.minCoeff();
  const double hi = e.maxCoeff();
  if (n >= 2 && hi > lo) e = (e.array() - lo) * (top / (hi - lo));
  else e.setZero();
  return e.unaryExpr([](double v) { return std::pow(10.0, v); });
}

RandomHessian gen_random_hessian(const RandomQpSpec& spec, Rng& rng) {
  require(spec.n >= 1, Errc::invalid_argument, "n must be positive");
  require(spec.eta >= 0.0 && spec.eta < 1.0, Errc::invalid_argument, "eta must lie in [0, 1)");
  require(spec.zeta >= 0.0, Errc::invalid_argument, "zeta must be nonnegative");
  require(spec.hessian_density > 0.0 && spec.hessian_density <= 1.0, Errc::invalid_argument,
          "Hessian density must lie in (0, 1]");
  const Index n = spec.n;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution keep(spec.hessian_density);
  Matrix u(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) u(i, j) = keep(rng) ? unif(rng) : 0.0;
  }
  const Matrix ue = spec.eta * u + (1.0 - spec.eta) * Matrix::Identity(n, n);
  RandomHessian out;
  out.spectrum = log_uniform_spectrum(n, spec.condition, rng);
  Matrix h = ue * out.spectrum.asDiagonal() * ue.transpose();
  h /= h.cwiseAbs().maxCoeff();
  h.array() += spec.zeta;
  out.H = 0.5 * (h + h.transpose());
  return out;
}

Lcqp gen_random_lcqp(const RandomQpSpec& spec) {
  require(spec.density > 0.0 && spec.density <= 1.0, Errc::invalid_argument, "density must lie in (0, 1]");
  Rng rng(spec.seed);
  const auto hess = gen_random_hessian(spec, rng);
  Lcqp p;
  p.name = "random_lcqp";
  p.H = hess.H.sparseView();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  p.c = Vector::NullaryExpr(spec.n, [&]() { return unif(rng); });
  Vector x_feasible = Vector::NullaryExpr(spec.n, [&]() { return unif(rng); });
  p.A_eq = random_constraints(spec.m_eq, spec.n, spec.density, rng);
  p.b_eq = p.A_eq * x_feasible;
  p.A_ineq = random_constraints(spec.m_ineq, spec.n, spec.density, rng);
  p.b_ineq = p.A_ineq * x_feasible + Vector::NullaryExpr(spec.m_ineq, [&]() { return unif(rng); });
  p.lb = Vector::Constant(spec.n, spec.nonnegative ? 0.0 : -kInf);
  p.ub = Vector::Constant(spec.n, kInf);
  finalize(p);
  return p;
}

Lcqp gen_markowitz_like(const MarkowitzLikeSpec& spec) {
  require(spec.kappa >= 0.0, Errc::invalid_argument, "kappa must be nonnegative");
  RandomQpSpec h;
  h.n = spec.n;
  h.eta = spec.eta;
  h.zeta = spec.zeta;
  h.condition = spec.condition;
  Rng rng(spec.seed);
  const auto hess = gen_random_hessian(h, rng);
  Lcqp p;
  p.name = "markowitz_like";
  const Matrix full = 2.0 * hess.H + 2.0 * spec.kappa * Matrix::Identity(spec.n, spec.n);
  p.H = full.sparseView();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  p.c = Vector::NullaryExpr(spec.n, [&]() { return unif(rng); });
  p.A_eq = ones_row(spec.n);
  p.lb = Vector::Zero(spec.n);
  p.ub = Vector::Constant(spec.n, kInf);
  if (spec.cardinality) {
    require(*spec.cardinality > 0 && *spec.cardinality < spec.n, Errc::invalid_argument,
            "cardinality must lie in (0, n)");
    p.b_eq = Vector::Constant(1, static_cast<double>(*spec.cardinality));
    p.kinds.assign(static_cast<std::size_t>(spec.n), VarKind::binary);
  } else {
    p.b_eq = Vector::Ones(1);
  }
  finalize(p);
  return p;
}

Matrix centered_returns_factor(const Matrix& returns) {
  const Index k = returns.rows();
  require(k >= 2, Errc::invalid_argument, "need at least two observations");
  const Eigen::RowVectorXd mean = returns.colwise().mean();
  return (returns.rowwise() - mean) / std::sqrt(static_cast<double>(k - 1));
}

Lcqp gen_markowitz(const MarkowitzSpec& spec) {
  require(spec.tau >= 0.0 && spec.kappa >= 0.0, Errc::invalid_argument, "tau and kappa must be nonnegative");
  const bool have_returns = spec.returns.size() > 0;
  require(have_returns || spec.covariance, Errc::invalid_argument, "need returns or a covariance matrix");
  const Index N = have_returns ? spec.returns.cols() : spec.covariance->rows();
  Vector m = Vector::Zero(N);
  if (spec.mean) m = *spec.mean;
  else if (have_returns) m = spec.returns.colwise().mean().transpose();
  require(m.size() == N, Errc::dimension, "mean vector length differs from asset count");
  if (spec.binary) {
    require(spec.cardinality.has_value(), Errc::invalid_argument, "binary Markowitz needs a cardinality r");
    require(*spec.cardinality > 0 && *spec.cardinality < N, Errc::invalid_argument, "cardinality must lie in (0, N)");
  }
  Lcqp p;
  p.name = spec.low_rank ? "markowitz_low_rank" : (spec.binary ? "markowitz_binary" : "markowitz");
  const double rhs = spec.binary ? static_cast<double>(*spec.cardinality) : 1.0;

  if (!spec.low_rank) {
    const Matrix V = spec.covariance ? *spec.covariance : Matrix(centered_returns_factor(spec.returns).transpose() * centered_returns_factor(spec.returns));
    require(V.rows() == N && V.cols() == N, Errc::dimension, "covariance must be N x N");
    p.H = Matrix(2.0 * V + 2.0 * spec.kappa * Matrix::Identity(N, N)).sparseView();
    p.c = -spec.tau * m;
    p.A_eq = ones_row(N);
    p.b_eq = Vector::Constant(1, rhs);
    p.lb = Vector::Zero(N);
    p.ub = Vector::Constant(N, kInf);
    if (spec.binary) p.kinds.assign(static_cast<std::size_t>(N), VarKind::binary);
    finalize(p);
    return p;
  }

  require(have_returns, Errc::invalid_argument, "low-rank Markowitz needs the returns matrix");
  const Matrix B = centered_returns_factor(spec.returns);
  const Index k = B.rows();
  const Index n = N + k;
  Vector hd(n);
  hd.head(N).setConstant(2.0 * spec.kappa);
  hd.tail(k).setConstant(2.0);
  p.H = Matrix(hd.asDiagonal()).sparseView();
  p.c = Vector::Zero(n);
  p.c.head(N) = -spec.tau * m;
  Matrix a = Matrix::Zero(1 + k, n);
  a.row(0).head(N).setOnes();
  a.bottomLeftCorner(k, N) = B;
  a.bottomRightCorner(k, k) = -Matrix::Identity(k, k);
  p.A_eq = a.sparseView();
  p.b_eq = Vector::Zero(1 + k);
  p.b_eq[0] = rhs;
  p.lb = Vector::Constant(n, -kInf);
  p.lb.head(N).setZero();
  p.ub = Vector::Constant(n, kInf);
  p.kinds.assign(static_cast<std::size_t>(n), VarKind::continuous);
  if (spec.binary) {
    for (Index i = 0; i < N; ++i) p.kinds[i] = VarKind::binary;
  }
  finalize(p);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = 0; k < a.cols(); ++k) out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  }
  return out;
}

void check_qap(const QapSpec& spec) {
  const Index r = spec.flow.rows();
  require(r >= 2, Errc::invalid_argument, "QAP needs r >= 2");
  require(spec.flow.cols() == r && spec.distance.rows() == r && spec.distance.cols() == r, Errc::dimension,
          "flow and distance must both be r x r");
  require(spec.delta > 0.0, Errc::invalid_argument, "delta must be positive");
}

}  // namespace

double qap_shift(const QapSpec& spec) {
  check_qap(spec);
  const Matrix h = kron(spec.flow, spec.distance);
  double worst = 0.0;
  for (Index i = 0; i < h.rows(); ++i) worst = std::max(worst, h.row(i).cwiseAbs().sum() - std::abs(h(i, i)));
  return worst + spec.delta;
}

Matrix qap_hessian(const QapSpec& spec) {
  check_qap(spec);
  Matrix h = kron(spec.flow, spec.distance);
  h.diagonal().array() += qap_shift(spec);
  return h;
}

Lcqp gen_qap(const QapSpec& spec) {
  const Matrix h = qap_hessian(spec);
  const Index r = spec.flow.rows();
  const Index n = r * r;
  Lcqp p;
  p.name = spec.relaxed ? "qap_relaxed" : "qap_binary";
  const Matrix sym = h + h.transpose();  // x'Hx = 0.5 x'(H + H')x
  p.H = sym.sparseView();
  p.c = Vector::Zero(n);
  std::vector<Eigen::Triplet<double, Index>> trips;
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      trips.emplace_back(i, i * r + j, 1.0);
      trips.emplace_back(r + j, i * r + j, 1.0);
    }
  }
  p.A_eq = SparseMatrix(2 * r, n);
  p.A_eq.setFromTriplets(trips.begin(), trips.end());
  p.b_eq = Vector::Ones(2 * r);
  p.lb = Vector::Zero(n);
  p.ub = Vector::Constant(n, kInf);
  p.kinds.assign(static_cast<std::size_t>(n), spec.relaxed ? VarKind::continuous : VarKind::binary);
  finalize(p);
  return p;
}

SuperVariableSet qap_row_groups(Index r) {
  SuperVariableSet s;
  for (Index i = 0; i < r; ++i) {
    IndexVector g;
    for (Index j = 0; j < r; ++j) g.push_back(i * r + j);
    s.groups.push_back(g);
    s.local_rows.push_back({i});
    s.coupling_rows.push_back(r + i);
  }
  return s;
}

// ---------------------------------------------------------------------------

Matrix maxcut_matrix(const GraphSpec& spec) {
  const Index n = spec.vertices;
  require(n >= 1, Errc::invalid_argument, "graph needs at least one vertex");
  Matrix w = Matrix::Zero(n, n);
  for (const auto& e : spec.edges) {
    require(e.u >= 0 && e.u < n && e.v >= 0 && e.v < n, Errc::invalid_argument, "edge endpoint out of range");
    require(e.u != e.v, Errc::invalid_argument, "self-loops are not allowed");
    require(std::isfinite(e.weight), Errc::invalid_argument, "edge weights must be finite");
    w(e.u, e.v) += e.weight;
    w(e.v, e.u) += e.weight;
  }
  Matrix h = w;
  for (Index i = 0; i < n; ++i) h(i, i) = -0.5 * (w.row(i).sum() + w.col(i).sum());
  return h;
}

double cut_value(const GraphSpec& spec, const Vector& x) {
  double cut = 0.0;
  for (const auto& e : spec.edges) {
    if ((x[e.u] > 0.5) != (x[e.v] > 0.5)) cut += e.weight;
  }
  return cut;
}

Lcqp gen_maxcut(const GraphSpec& spec) {
  require(!spec.bisection, Errc::invalid_argument, "bisection flag set; use gen_maxbisection");
  Lcqp p;
  p.name = "maxcut";
  p.H = Matrix(2.0 * maxcut_matrix(spec)).sparseView();
  p.c = Vector::Zero(spec.vertices);
  p.kinds.assign(static_cast<std::size_t>(spec.vertices), VarKind::binary);
  finalize(p);
  return p;
}

Lcqp gen_maxbisection(const GraphSpec& spec) {
  GraphSpec plain = spec;
  plain.bisection = false;
  Lcqp p = gen_maxcut(plain);
  p.name = "maxbisection";
  p.A_eq = ones_row(spec.vertices);
  p.b_eq = Vector::Constant(1, static_cast<double>(spec.vertices / 2));
  finalize(p);
  return p;
}

// ---------------------------------------------------------------------------

GaussianKernel::GaussianKernel(Matrix points, double sigma) : points_(std::move(points)), sigma_(sigma) {
  require(sigma > 0.0, Errc::invalid_argument, "kernel width must be positive");
}

double GaussianKernel::operator()(const Vector& a, const Vector& b) const {
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma_ * sigma_));
}

Vector GaussianKernel::column(const Vector& x) const {
  require(x.size() == points_.cols(), Errc::dimension, "feature length differs from the training data");
  Vector k(points_.rows());
  for (Index i = 0; i < points_.rows(); ++i) k[i] = (*this)(points_.row(i).transpose(), x);
  return k;
}

Matrix GaussianKernel::gram() const {
  const Index n = points_.rows();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) k(i, j) = k(j, i) = (*this)(points_.row(i).transpose(), points_.row(j).transpose());
  }
  return k;
}

SvmDual gen_svm_dual(const SvmSpec& spec) {
  const Index n = spec.features.rows();
  require(n >= 1, Errc::invalid_argument, "SVM needs training points");
  require(spec.labels.size() == n, Errc::dimension, "label count differs from point count");
  require(spec.C > 0.0, Errc::invalid_argument, "C must be positive");
  for (Index i = 0; i < n; ++i) {
    require(spec.labels[i] == 1.0 || spec.labels[i] == -1.0, Errc::invalid_argument, "labels must be +-1");
  }
  SvmDual out;
  out.kernel = GaussianKernel(spec.features, spec.sigma);
  const Matrix q = spec.labels.asDiagonal() * out.kernel.gram() * spec.labels.asDiagonal();
  Lcqp& p = out.problem;
  p.name = "svm_dual";
  p.H = q.sparseView();
  p.c = -Vector::Ones(n);
  p.A_eq = spec.labels.transpose().sparseView();
  p.b_eq = Vector::Zero(1);
  p.lb = Vector::Zero(n);
  p.ub = Vector::Constant(n, spec.C);
  finalize(p);
  return out;
}

// ---------------------------------------------------------------------------

GraphSpec load_edge_list(const std::filesystem::path& path, Index vertices) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open edge list " + path.string());
  GraphSpec g;
  Index max_index = -1;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cut = line.find_first_of("#%");
    if (cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    Edge e;
    if (!(ls >> e.u)) continue;
    if (!(ls >> e.v)) throw ParseError("edge line needs two vertices", line_no);
    if (!(ls >> e.weight)) e.weight = 1.0;
    if (e.u < 0 || e.v < 0) throw ParseError("negative vertex index", line_no);
    max_index = std::max({max_index, e.u, e.v});
    g.edges.push_back(e);
  }
  g.vertices = std::max(vertices, max_index + 1);
  return g;
}

Matrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open CSV " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\r' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw ParseError("non-numeric CSV cell", line_no);
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged CSV row", line_no);
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace racqp
