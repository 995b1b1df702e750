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
#include <random>

#include "doctest.h"
#include "racqp/linalg.hpp"
#include "test_util.hpp"

using namespace racqp;
using racqp::testing::dense;
using racqp::testing::sparse;
using racqp::testing::vec;

namespace {

// Independent oracle: Gaussian elimination with partial pivoting.
Vector gauss_solve(Matrix a, Vector b) {
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    }
    a.row(k).swap(a.row(piv));
    std::swap(b[k], b[piv]);
    for (Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a.row(i) -= f * a.row(k);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

Matrix assemble_kkt(const Matrix& h, const Matrix& a, double beta) {
  const Index n = h.rows();
  const Index m = a.rows();
  Matrix k = Matrix::Zero(n + m, n + m);
  k.topLeftCorner(n, n) = h + beta * Matrix::Identity(n, n);
  k.topRightCorner(n, m) = std::sqrt(beta) * a.transpose();
  k.bottomLeftCorner(m, n) = std::sqrt(beta) * a;
  k.bottomRightCorner(m, m) = -Matrix::Identity(m, m);
  return k;
}

}  // namespace

TEST_CASE("cholesky examples") {
  CHECK(cholesky(Matrix(Matrix::Identity(3, 3))).matrix_l() == Matrix::Identity(3, 3));
  const Matrix l = cholesky(dense({{4, 0}, {0, 9}})).matrix_l();
  CHECK(l(0, 0) == doctest::Approx(2));
  CHECK(l(1, 1) == doctest::Approx(3));
  try {
    cholesky(dense({{1, 2}, {2, 1}}));
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_positive_definite);
  }
  CHECK_THROWS_AS(cholesky(dense({{1, 2}, {0, 1}})), Error);
  CHECK_THROWS_AS(cholesky(dense({{1, 0}, {0, 1e-14}})), Error);
}

TEST_CASE("solve_chol examples") {
  const auto id = cholesky(Matrix(Matrix::Identity(2, 2)));
  CHECK(solve_chol(id, vec({3, -1})) == vec({3, -1}));
  const Vector x = solve_chol(cholesky(dense({{4, 0}, {0, 9}})), vec({8, 18}));
  CHECK(x[0] == doctest::Approx(2));
  CHECK(x[1] == doctest::Approx(2));
  CHECK_THROWS_AS(solve_chol(id, vec({1, 2, 3})), Error);
}

TEST_CASE("cholesky reconstructs and solves on random seeds") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const Index n = 1 + static_cast<Index>(seed % 50);
    const Matrix m = racqp::testing::random_spd(n, rng);
    const auto f = cholesky(m);
    const Matrix l = f.matrix_l();
    CHECK((l * l.transpose() - m).norm() <= 1e-10 * m.norm());
    const Vector x_true = racqp::testing::random_matrix(n, 1, rng);
    const Vector rhs = m * x_true;
    const Vector x = f.solve(rhs);
    CHECK((m * x - rhs).cwiseAbs().maxCoeff() <= 1e-9 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("sparse cholesky above the dense limit agrees with dense") {
  std::mt19937_64 rng(7);
  const Index n = 60;
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = 4.0;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = -1.0;
  }
  const auto f = cholesky(sparse(m), 1e-12, 10);
  CHECK(f.is_sparse());
  const Matrix l = f.matrix_l();
  const auto p = f.permutation();
  const Matrix pm = p * m * p.transpose();
  CHECK((l * l.transpose() - pm).norm() <= 1e-10 * m.norm());
  const Vector rhs = racqp::testing::random_matrix(n, 1, rng);
  CHECK((f.solve(rhs) - gauss_solve(m, rhs)).cwiseAbs().maxCoeff() <= 1e-10);
  Matrix bad = m;
  bad(5, 5) = -1.0;
  CHECK_THROWS_AS(cholesky(sparse(bad), 1e-12, 10), Error);
}

TEST_CASE("kkt_factor_general: worked example") {
  const auto f = kkt_factor_general(sparse(Matrix::Identity(2, 2)), sparse(dense({{1, 1}})), 1.0);
  const Vector sol = f.solve(vec({3, 3, 0}));
  CHECK(sol[0] == doctest::Approx(0.75));
  CHECK(sol[1] == doctest::Approx(0.75));
  CHECK(sol[2] == doctest::Approx(1.5));
  const Vector oracle = gauss_solve(assemble_kkt(Matrix::Identity(2, 2), dense({{1, 1}}), 1.0), vec({3, 3, 0}));
  CHECK((sol - oracle).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kkt_factor_general: empty border is H + beta I") {
  const Matrix h = dense({{2, 1}, {1, 3}});
  const auto f = kkt_factor_general(sparse(h), SparseMatrix(0, 2), 2.0);
  CHECK(f.num_rows() == 0);
  const Vector x = f.solve(vec({1, 2}));
  const Vector expect = gauss_solve(h + 2.0 * Matrix::Identity(2, 2), vec({1, 2}));
  CHECK((x - expect).norm() <= 1e-12);
}

TEST_CASE("kkt factors: repeated solves meet the residual bound") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    const Index n = 2 + static_cast<Index>(seed % 30);
    const Index m = static_cast<Index>(seed % 7);
    const Matrix h = racqp::testing::random_spd(n, rng, 0.0);
    const Matrix a = racqp::testing::random_matrix(m, n, rng);
    const double beta = 0.5 + static_cast<double>(seed % 3);
    const Matrix k = assemble_kkt(h, a, beta);
    const auto f = kkt_factor_general(sparse(h), sparse(a), beta);
    for (int r = 0; r < 3; ++r) {
      const Vector rhs = racqp::testing::random_matrix(n + m, 1, rng);
      const Vector sol = f.solve(rhs);
      CHECK((k * sol - rhs).norm() <= 1e-9 * (1 + rhs.norm()));
    }
  }
}

TEST_CASE("kkt_factor_general: sparse path for large systems") {
  const Index n = 450;
  Matrix h = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    h(i, i) = 2.0;
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = 0.5;
  }
  Matrix a = Matrix::Zero(3, n);
  for (Index j = 0; j < n; ++j) a(j % 3, j) = 1.0;
  const auto f = kkt_factor_general(sparse(h), sparse(a), 1.0);
  std::mt19937_64 rng(1);
  const Vector rhs = racqp::testing::random_matrix(n + 3, 1, rng);
  const Vector sol = f.solve(rhs);
  CHECK((assemble_kkt(h, a, 1.0) * sol - rhs).norm() <= 1e-9 * (1 + rhs.norm()));
}

TEST_CASE("kkt_solve_diagonal examples") {
  const Vector x0 = kkt_solve_diagonal(vec({1, 3}), SparseMatrix(0, 2), 1.0, vec({4, -8}));
  CHECK(x0[0] == doctest::Approx(-2));
  CHECK(x0[1] == doctest::Approx(2));

  const Vector x1 = kkt_solve_diagonal(vec({0}), sparse(dense({{1}})), 1.0, vec({-1}));
  const Vector oracle = gauss_solve(assemble_kkt(dense({{0}}), dense({{1}}), 1.0), vec({1, 0}));
  CHECK(x1[0] == doctest::Approx(0.5));
  CHECK(x1[0] == doctest::Approx(oracle[0]));
  CHECK(kkt_factor_diagonal(vec({0}), sparse(dense({{1}})), 1.0).uses_diagonal_path());
}

TEST_CASE("diagonal and general KKT factors agree") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 77);
    std::uniform_real_distribution<double> u(0, 3);
    const Index n = 1 + static_cast<Index>(seed % 40);
    const Index m = static_cast<Index>(seed % 6);
    Vector hd(n);
    for (Index i = 0; i < n; ++i) hd[i] = u(rng);
    const Matrix a = racqp::testing::random_matrix(m, n, rng);
    const double beta = 0.3 + u(rng);
    const auto g = kkt_factor_general(sparse(Matrix(hd.asDiagonal())), sparse(a), beta);
    const auto d = kkt_factor_diagonal(hd, sparse(a), beta);
    const Vector rhs = racqp::testing::random_matrix(n + m, 1, rng);
    CHECK((g.solve(rhs) - d.solve(rhs)).cwiseAbs().maxCoeff() <= 1e-9 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("eigenvalue examples") {
  const auto d = eigenvalues(dense({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}));
  std::vector<double> re;
  for (Index i = 0; i < 3; ++i) re.push_back(d.values[i].real());
  std::sort(re.begin(), re.end());
  CHECK(re == std::vector<double>{1, 2, 3});
  CHECK(d.spectral_radius == doctest::Approx(3));

  const auto r = eigenvalues(dense({{0, -1}, {1, 0}}));
  CHECK(std::abs(r.values[0].real()) < 1e-14);
  CHECK(std::abs(std::abs(r.values[0].imag()) - 1.0) < 1e-14);
  CHECK(r.values[0].imag() == doctest::Approx(-r.values[1].imag()));
  CHECK(r.spectral_radius == doctest::Approx(1));

  // roots of x^2 - x - 1
  const auto c = eigenvalues(dense({{0, 1}, {1, 1}}));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  const double lo = std::min(c.values[0].real(), c.values[1].real());
  const double hi = std::max(c.values[0].real(), c.values[1].real());
  CHECK(hi == doctest::Approx(phi));
  CHECK(lo == doctest::Approx(1 - phi));
  // same characteristic polynomial, nonsymmetric
  const auto nonsym = eigenvalues(dense({{0, 2}, {0.5, 1}}));
  CHECK(nonsym.spectral_radius == doctest::Approx(phi));
  CHECK(std::abs(nonsym.values[0].imag()) < 1e-14);
}

TEST_CASE("spectral radius is the largest modulus") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = racqp::testing::random_matrix(6, 6, rng);
    const auto e = eigenvalues(m);
    CHECK(e.spectral_radius == doctest::Approx(e.values.cwiseAbs().maxCoeff()));
    CHECK(spectral_radius(m) == e.spectral_radius);
  }
}
