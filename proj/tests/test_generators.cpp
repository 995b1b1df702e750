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

#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "racqp/generators.hpp"
#include "test_util.hpp"

using namespace racqp;
using racqp::testing::dense;
using racqp::testing::TempDir;
using racqp::testing::vec;

namespace {

// x'Hx in the objective convention of each generator (Lcqp stores the Hessian of 0.5 x'Hx)
double quad(const Lcqp& p, const Vector& x) { return 0.5 * x.dot(p.H * x) + p.c.dot(x) + p.c0; }

Vector bits(Index n, Index code) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = static_cast<double>((code >> i) & 1);
  return x;
}

// Independent oracle: count edges whose endpoints fall on different sides.
double count_cut(Index n, const std::vector<Edge>& edges, const Vector& x) {
  (void)n;
  double cut = 0.0;
  for (const auto& e : edges) {
    if (x[e.u] != x[e.v]) cut += e.weight;
  }
  return cut;
}

double best_over(const Lcqp& p, bool need_rows) {
  const Index n = p.num_vars();
  double best = std::numeric_limits<double>::infinity();
  for (Index code = 0; code < (Index{1} << n); ++code) {
    const Vector x = bits(n, code);
    if (need_rows && (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff() > 1e-12) continue;
    best = std::min(best, quad(p, x));
  }
  return best;
}

}  // namespace

TEST_CASE("random Hessian: eta = 0 and zeta = 0 give the scaled spectrum") {
  RandomQpSpec spec;
  spec.n = 8;
  spec.eta = 0.0;
  Rng rng(3);
  const auto h = gen_random_hessian(spec, rng);
  const Matrix expect = Matrix(h.spectrum.asDiagonal()) / h.spectrum.maxCoeff();
  CHECK((h.H - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("random LCQP is deterministic per seed") {
  RandomQpSpec spec;
  spec.n = 20;
  spec.m_eq = 3;
  spec.m_ineq = 4;
  spec.density = 0.4;
  spec.seed = 99;
  const Lcqp a = gen_random_lcqp(spec);
  const Lcqp b = gen_random_lcqp(spec);
  CHECK(Matrix(a.H) == Matrix(b.H));
  CHECK(Matrix(a.A_eq) == Matrix(b.A_eq));
  CHECK(Matrix(a.A_ineq) == Matrix(b.A_ineq));
  CHECK(a.c == b.c);
  CHECK(a.b_eq == b.b_eq);
  CHECK(a.b_ineq == b.b_ineq);
  spec.seed = 100;
  CHECK(gen_random_lcqp(spec).c != a.c);
}

TEST_CASE("random Hessian hits the condition target") {
  RandomQpSpec spec;
  spec.n = 50;
  spec.condition = 100;
  spec.eta = 0.0;
  Rng rng(1);
  const auto h = gen_random_hessian(spec, rng);
  const double ratio = h.spectrum.maxCoeff() / h.spectrum.minCoeff();
  CHECK(ratio >= 100 / 1.05);
  CHECK(ratio <= 100 * 1.05);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.H);
  const double eig_ratio = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  CHECK(eig_ratio == doctest::Approx(100).epsilon(0.05));
  CHECK(h.spectrum.minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("random LCQP constraints are feasible and have the requested shape") {
  RandomQpSpec spec;
  spec.n = 40;
  spec.m_eq = 5;
  spec.m_ineq = 6;
  spec.density = 0.2;
  const Lcqp p = gen_random_lcqp(spec);
  CHECK(p.A_eq.rows() == 5);
  CHECK(p.A_ineq.rows() == 6);
  const double fill = static_cast<double>(p.A_eq.nonZeros() + p.A_ineq.nonZeros()) / (11.0 * 40.0);
  CHECK(fill == doctest::Approx(0.2).epsilon(0.5));
  CHECK(Matrix(p.H).isApprox(Matrix(p.H).transpose()));
}

TEST_CASE("Markowitz: identity covariance gives the uniform portfolio") {
  MarkowitzSpec spec;
  spec.covariance = Matrix::Identity(4, 4);
  spec.tau = 0;
  spec.kappa = 0;
  const Lcqp p = gen_markowitz(spec);
  // equality KKT: [H a; a' 0] (x, -y) = (-c, 1)
  Matrix k = Matrix::Zero(5, 5);
  k.topLeftCorner(4, 4) = Matrix(p.H);
  k.topRightCorner(4, 1) = Matrix(p.A_eq).transpose();
  k.bottomLeftCorner(1, 4) = Matrix(p.A_eq);
  Vector rhs(5);
  rhs << -p.c, p.b_eq;
  const Vector sol = k.fullPivLu().solve(rhs);
  for (Index i = 0; i < 4; ++i) CHECK(sol[i] == doctest::Approx(0.25));
  CHECK(p.lb.minCoeff() == 0.0);
}

TEST_CASE("Markowitz: centered factor") {
  Matrix same(3, 4);
  same.rowwise() = vec({1, 2, 3, 4}).transpose();
  CHECK(centered_returns_factor(same).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(4);
  const Matrix r = racqp::testing::random_matrix(4, 3, rng);
  const Matrix b = centered_returns_factor(r);
  Matrix cov = Matrix::Zero(3, 3);
  for (Index a = 0; a < 3; ++a) {
    for (Index c = 0; c < 3; ++c) {
      double ma = 0, mc = 0;
      for (Index t = 0; t < 4; ++t) {
        ma += r(t, a) / 4;
        mc += r(t, c) / 4;
      }
      for (Index t = 0; t < 4; ++t) cov(a, c) += (r(t, a) - ma) * (r(t, c) - mc) / 3.0;
    }
  }
  CHECK((b.transpose() * b - cov).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Markowitz variants") {
  std::mt19937_64 rng(8);
  MarkowitzSpec spec;
  spec.returns = racqp::testing::random_matrix(6, 5, rng);
  spec.binary = true;
  CHECK_THROWS_AS(gen_markowitz(spec), Error);
  spec.cardinality = 2;
  const Lcqp bin = gen_markowitz(spec);
  CHECK(bin.has_integers());
  CHECK(bin.b_eq[0] == 2.0);
  CHECK(bin.c.isApprox(-spec.returns.colwise().mean().transpose()));

  spec.binary = false;
  spec.low_rank = true;
  const Lcqp lr = gen_markowitz(spec);
  CHECK(lr.num_vars() == 11);
  CHECK(lr.num_eq() == 7);
  // at any x and y = Bx the low-rank objective equals the covariance objective
  spec.low_rank = false;
  const Lcqp full = gen_markowitz(spec);
  const Vector x = racqp::testing::random_matrix(5, 1, rng);
  Vector xy(11);
  xy << x, centered_returns_factor(spec.returns) * x;
  CHECK(quad(lr, xy) == doctest::Approx(quad(full, x)));
  CHECK((lr.A_eq * xy).tail(6).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Markowitz-like instance shape") {
  MarkowitzLikeSpec spec;
  spec.n = 30;
  const Lcqp p = gen_markowitz_like(spec);
  CHECK(p.num_eq() == 1);
  CHECK(p.b_eq[0] == 1.0);
  CHECK(p.lb == Vector::Zero(30));
  CHECK(Matrix(p.H) == Matrix(gen_markowitz_like(spec).H));
  spec.cardinality = 5;
  CHECK(gen_markowitz_like(spec).has_integers());
}

TEST_CASE("QAP: 2x2 swap matrices") {
  QapSpec spec;
  spec.flow = dense({{0, 1}, {1, 0}});
  spec.distance = dense({{0, 1}, {1, 0}});
  spec.delta = 0.1;
  // enumerate the Kronecker entries by definition
  Matrix k(4, 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) k(i * 2 + j, a * 2 + b) = spec.flow(i, a) * spec.distance(j, b);
  double max_row = 0;
  for (Index i = 0; i < 4; ++i) max_row = std::max(max_row, k.row(i).cwiseAbs().sum() - std::abs(k(i, i)));
  CHECK(max_row == 1.0);
  CHECK(qap_shift(spec) == doctest::Approx(1.1));
  CHECK(qap_hessian(spec) == k + 1.1 * Matrix::Identity(4, 4));
}

TEST_CASE("QAP: relaxed flag and counting") {
  std::mt19937_64 rng(2);
  QapSpec spec;
  spec.flow = racqp::testing::random_matrix(3, 3, rng).cwiseAbs();
  spec.distance = racqp::testing::random_matrix(3, 3, rng).cwiseAbs();
  const Lcqp relaxed = gen_qap(spec);
  CHECK(relaxed.num_vars() == 9);
  CHECK(relaxed.num_eq() == 6);
  CHECK_FALSE(relaxed.has_integers());
  CHECK(relaxed.lb == Vector::Zero(9));
  spec.relaxed = false;
  CHECK(gen_qap(spec).has_integers());
  // strict diagonal dominance, row by row
  const Matrix h = Matrix(relaxed.H);
  for (Index i = 0; i < 9; ++i) CHECK(h(i, i) > h.row(i).cwiseAbs().sum() - std::abs(h(i, i)));
  // a permutation is feasible and the objective is vec(X)'(A kron B + dI)vec(X)
  Vector x = Vector::Zero(9);
  x[0 * 3 + 2] = x[1 * 3 + 0] = x[2 * 3 + 1] = 1;
  CHECK((relaxed.A_eq * x - relaxed.b_eq).cwiseAbs().maxCoeff() == 0.0);
  CHECK(quad(relaxed, x) == doctest::Approx(x.dot(qap_hessian(spec) * x)));
  const auto groups = qap_row_groups(3);
  CHECK(groups.groups[1] == IndexVector{3, 4, 5});
  CHECK(groups.local_rows[1] == IndexVector{1});
}

TEST_CASE("max-cut: triangle, empty graph, single edge") {
  GraphSpec tri{3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, false};
  const Matrix h = maxcut_matrix(tri);
  for (Index i = 0; i < 3; ++i) {
    CHECK(h(i, i) == -2.0);
    for (Index j = 0; j < 3; ++j)
      if (i != j) CHECK(h(i, j) == 1.0);
  }
  const Lcqp p = gen_maxcut(tri);
  CHECK(best_over(p, false) == doctest::Approx(-2));
  CHECK(quad(p, vec({1, 0, 0})) == doctest::Approx(-2));

  GraphSpec empty{4, {}, false};
  CHECK(maxcut_matrix(empty).cwiseAbs().maxCoeff() == 0.0);
  CHECK(best_over(gen_maxcut(empty), false) == 0.0);

  GraphSpec one{2, {{0, 1, 5}}, false};
  CHECK(best_over(gen_maxcut(one), false) == doctest::Approx(-5));
  CHECK_THROWS_AS(maxcut_matrix(GraphSpec{2, {{1, 1, 1}}, false}), Error);
}

TEST_CASE("max-cut identity holds on every assignment of small random graphs") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> w(-2, 3);
  for (Index n = 2; n <= 12; n += 2) {
    GraphSpec g;
    g.vertices = n;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (w(rng) > 0.5) g.edges.push_back({i, j, w(rng)});
    const Lcqp p = gen_maxcut(g);
    for (Index code = 0; code < (Index{1} << n); ++code) {
      const Vector x = bits(n, code);
      CHECK(quad(p, x) == doctest::Approx(-count_cut(n, g.edges, x)));
    }
  }
}

TEST_CASE("max-bisection") {
  GraphSpec path{3, {{0, 1, 1}, {1, 2, 1}}, true};
  const Lcqp p = gen_maxbisection(path);
  CHECK(p.b_eq[0] == 1.0);
  CHECK(best_over(p, true) == doctest::Approx(-2));
  CHECK(quad(p, vec({0, 1, 0})) == doctest::Approx(-2));
  CHECK(gen_maxbisection(GraphSpec{4, {{0, 1, 1}}, true}).b_eq[0] == 2.0);
  GraphSpec tri{3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, true};
  CHECK(best_over(gen_maxbisection(tri), true) == doctest::Approx(-2));
  CHECK_THROWS_AS(gen_maxcut(tri), Error);
}

TEST_CASE("SVM dual") {
  SvmSpec same{dense({{1, 2}, {1, 2}, {1, 2}}), vec({1, 1, 1}), 1.0, 0.7};
  CHECK((Matrix(gen_svm_dual(same).problem.H).array() == 1.0).all());

  SvmSpec pair{dense({{0}, {2}}), vec({1, -1}), 2.0, 1.0};
  const SvmDual d = gen_svm_dual(pair);
  CHECK(d.kernel(vec({0}), vec({2})) == doctest::Approx(std::exp(-2.0)));
  CHECK(d.kernel(vec({0}), vec({2})) == doctest::Approx(0.1353).epsilon(1e-3));
  CHECK(d.problem.H.coeff(0, 1) == doctest::Approx(-std::exp(-2.0)));
  CHECK(d.problem.c == vec({-1, -1}));
  CHECK(d.problem.ub == vec({2, 2}));
  CHECK(Matrix(d.problem.A_eq) == dense({{1, -1}}));
  CHECK_THROWS_AS(gen_svm_dual(SvmSpec{dense({{0}}), vec({0.5}), 1, 1}), Error);
}

TEST_CASE("edge list and CSV loaders") {
  TempDir dir("loaders");
  {
    std::ofstream out(dir.path() / "g.txt");
    out << "# triangle\n0 1 1\n1 2\n0 2 2.5 % heavy\n\n";
  }
  const GraphSpec g = load_edge_list(dir.path() / "g.txt");
  CHECK(g.vertices == 3);
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[1].weight == 1.0);
  CHECK(g.edges[2].weight == 2.5);
  {
    std::ofstream out(dir.path() / "bad.txt");
    out << "0 1\n2\n";
  }
  CHECK_THROWS_AS(load_edge_list(dir.path() / "bad.txt"), ParseError);
  {
    std::ofstream out(dir.path() / "m.csv");
    out << "a,b\n1,2\n3.5,-4\n";
  }
  CHECK(load_csv_matrix(dir.path() / "m.csv") == dense({{1, 2}, {3.5, -4}}));
  {
    std::ofstream out(dir.path() / "r.csv");
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(load_csv_matrix(dir.path() / "r.csv"), ParseError);
}
