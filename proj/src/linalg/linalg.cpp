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

#include "racqp/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

namespace racqp {

namespace {

using SparseLlt = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<Index>>;
using SparseLdlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<Index>>;

constexpr Index kDenseKktLimit = 400;

void check_square(Index rows, Index cols, const char* what) {
  require(rows == cols, Errc::dimension, std::string(what) + " must be square");
}

void check_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, Errc::asymmetric,
          "matrix is not symmetric");
}

Vector prox_or_ones(const Vector& prox, Index n) {
  if (prox.size() == 0) return Vector::Ones(n);
  require(prox.size() == n, Errc::dimension, "prox weight length differs from n");
  return prox;
}

}  // namespace

struct CholeskyFactor::SparseImpl {
  SparseLlt llt;
};

CholeskyFactor cholesky(const Matrix& m, double pivot_tol) {
  check_square(m.rows(), m.cols(), "Cholesky input");
  check_symmetric(m);
  CholeskyFactor f;
  f.n_ = m.rows();
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(m);
  if (m.rows() > 0) {
    const double max_diag = m.diagonal().cwiseAbs().maxCoeff();
    if (llt->info() != Eigen::Success) throw Error(Errc::not_positive_definite, "matrix is not positive definite");
    const Vector pivots = Matrix(llt->matrixL()).diagonal().cwiseAbs2();
    if (pivots.minCoeff() <= pivot_tol * max_diag) {
      throw Error(Errc::not_positive_definite, "Cholesky pivot below tolerance");
    }
  }
  f.dense_ = std::move(llt);
  return f;
}

CholeskyFactor cholesky(const SparseMatrix& m, double pivot_tol, Index dense_limit) {
  check_square(m.rows(), m.cols(), "Cholesky input");
  if (m.cols() <= dense_limit) return cholesky(Matrix(m), pivot_tol);
  const SparseMatrix diff = SparseMatrix(m.transpose()) - m;
  double defect = 0.0;
  for (Index j = 0; j < diff.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(diff, j); it; ++it) defect = std::max(defect, std::abs(it.value()));
  }
  double max_diag = 0.0;
  for (Index i = 0; i < m.rows(); ++i) max_diag = std::max(max_diag, std::abs(m.coeff(i, i)));
  require(defect <= 1e-10 * std::max(1.0, max_diag), Errc::asymmetric, "matrix is not symmetric");
  auto impl = std::make_shared<CholeskyFactor::SparseImpl>();
  impl->llt.compute(m);
  if (impl->llt.info() != Eigen::Success) throw Error(Errc::not_positive_definite, "matrix is not positive definite");
  const SparseMatrix L = impl->llt.matrixL();
  for (Index i = 0; i < L.rows(); ++i) {
    const double d = L.coeff(i, i);
    if (d * d <= pivot_tol * max_diag) throw Error(Errc::not_positive_definite, "Cholesky pivot below tolerance");
  }
  CholeskyFactor f;
  f.n_ = m.rows();
  f.sparse_ = std::move(impl);
  return f;
}

Vector CholeskyFactor::solve(const Vector& rhs) const {
  require(rhs.size() == n_, Errc::dimension, "rhs length differs from factor size");
  if (n_ == 0) return Vector();
  return dense_ ? Vector(dense_->solve(rhs)) : Vector(sparse_->llt.solve(rhs));
}

Matrix CholeskyFactor::solve(const Matrix& rhs) const {
  require(rhs.rows() == n_, Errc::dimension, "rhs rows differ from factor size");
  if (n_ == 0) return Matrix(0, rhs.cols());
  return dense_ ? Matrix(dense_->solve(rhs)) : Matrix(sparse_->llt.solve(rhs));
}

Matrix CholeskyFactor::matrix_l() const {
  if (n_ == 0) return Matrix();
  if (dense_) return dense_->matrixL();
  return Matrix(SparseMatrix(sparse_->llt.matrixL()));
}

Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> CholeskyFactor::permutation() const {
  if (sparse_) return sparse_->llt.permutationP();
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> p(n_);
  p.setIdentity();
  return p;
}

Vector solve_chol(const CholeskyFactor& factor, const Vector& rhs) { return factor.solve(rhs); }

// ---------------------------------------------------------------------------

struct KktFactor::Impl {
  // general path
  std::unique_ptr<Eigen::LDLT<Matrix>> dense;
  std::unique_ptr<SparseLdlt> sparse;
  // diagonal path
  Vector inv_diag;
  SparseMatrix A;
  double sqrt_beta = 1.0;
  std::unique_ptr<Eigen::LLT<Matrix>> schur;
};

KktFactor kkt_factor_general(const SparseMatrix& H, const SparseMatrix& A, double beta, const Vector& prox) {
  require(beta > 0, Errc::invalid_argument, "beta must be positive");
  check_square(H.rows(), H.cols(), "H");
  const Index n = H.rows();
  const Index m = A.rows();
  require(A.cols() == n || m == 0, Errc::dimension, "A column count differs from n");
  const Vector d = prox_or_ones(prox, n);
  const double sb = std::sqrt(beta);

  std::vector<Eigen::Triplet<double, Index>> trips;
  trips.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * A.nonZeros() + n + m));
  for (Index j = 0; j < H.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(H, j); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  }
  for (Index i = 0; i < n; ++i) trips.emplace_back(i, i, beta * d[i]);
  if (m > 0) {
    for (Index j = 0; j < A.outerSize(); ++j) {
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
        trips.emplace_back(n + it.row(), it.col(), sb * it.value());
        trips.emplace_back(it.col(), n + it.row(), sb * it.value());
      }
    }
  }
  for (Index i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, -1.0);
  SparseMatrix K(n + m, n + m);
  K.setFromTriplets(trips.begin(), trips.end());

  auto impl = std::make_shared<KktFactor::Impl>();
  Vector pivots;
  if (n + m <= kDenseKktLimit) {
    impl->dense = std::make_unique<Eigen::LDLT<Matrix>>(Matrix(K));
    if (impl->dense->info() != Eigen::Success) throw Error(Errc::singular, "KKT factorization failed");
    pivots = impl->dense->vectorD();
  } else {
    impl->sparse = std::make_unique<SparseLdlt>(K);
    if (impl->sparse->info() != Eigen::Success) throw Error(Errc::singular, "KKT factorization failed");
    pivots = impl->sparse->vectorD();
  }
  if (pivots.size() > 0) {
    const double big = pivots.cwiseAbs().maxCoeff();
    if (!(pivots.cwiseAbs().minCoeff() > 1e-14 * big)) throw Error(Errc::singular, "KKT system is singular");
  }
  KktFactor f;
  f.n_ = n;
  f.m_ = m;
  f.impl_ = std::move(impl);
  return f;
}

KktFactor kkt_factor_diagonal(const Vector& h_diag, const SparseMatrix& A, double beta, const Vector& prox) {
  require(beta > 0, Errc::invalid_argument, "beta must be positive");
  const Index n = h_diag.size();
  const Index m = A.rows();
  require(A.cols() == n || m == 0, Errc::dimension, "A column count differs from n");
  const Vector d = h_diag + beta * prox_or_ones(prox, n);
  require((d.array() > 0).all(), Errc::singular, "H + beta D has a non-positive diagonal entry");

  auto impl = std::make_shared<KktFactor::Impl>();
  impl->inv_diag = d.cwiseInverse();
  impl->A = m > 0 ? A : SparseMatrix(0, n);
  impl->sqrt_beta = std::sqrt(beta);
  Matrix schur = Matrix::Identity(m, m);
  if (m > 0) {
    const SparseMatrix scaled = impl->A * impl->inv_diag.asDiagonal();
    schur += beta * Matrix(scaled * SparseMatrix(impl->A.transpose()));
  }
  impl->schur = std::make_unique<Eigen::LLT<Matrix>>(schur);
  if (impl->schur->info() != Eigen::Success) throw Error(Errc::singular, "reduced KKT matrix is singular");
  KktFactor f;
  f.n_ = n;
  f.m_ = m;
  f.diagonal_ = true;
  f.impl_ = std::move(impl);
  return f;
}

Vector KktFactor::solve(const Vector& rhs) const {
  require(rhs.size() == n_ + m_, Errc::dimension, "KKT rhs length differs from n + m");
  if (!impl_) return Vector();
  if (!diagonal_) return impl_->dense ? Vector(impl_->dense->solve(rhs)) : Vector(impl_->sparse->solve(rhs));
  const Vector r1 = rhs.head(n_);
  const Vector r2 = rhs.tail(m_);
  const Vector t = impl_->inv_diag.cwiseProduct(r1);
  Vector out(n_ + m_);
  if (m_ == 0) {
    out = t;
    return out;
  }
  const Vector mu = impl_->schur->solve(impl_->sqrt_beta * (impl_->A * t) - r2);
  out.head(n_) = t - impl_->sqrt_beta * impl_->inv_diag.cwiseProduct(impl_->A.transpose() * mu);
  out.tail(m_) = mu;
  return out;
}

Vector KktFactor::solve_x(const Vector& q) const {
  require(q.size() == n_, Errc::dimension, "q length differs from n");
  Vector rhs = Vector::Zero(n_ + m_);
  rhs.head(n_) = -q;
  return solve(rhs).head(n_);
}

Vector kkt_solve_diagonal(const Vector& h_diag, const SparseMatrix& A, double beta, const Vector& q) {
  return kkt_factor_diagonal(h_diag, A, beta).solve_x(q);
}

// ---------------------------------------------------------------------------

EigenResult eigenvalues(const Matrix& m) {
  check_square(m.rows(), m.cols(), "eigenvalue input");
  EigenResult r;
  if (m.rows() == 0) return r;
  if (m == m.transpose()) {
    r.values = symmetric_eigenvalues(m).cast<std::complex<double>>();
  } else {
    Eigen::EigenSolver<Matrix> es(m, false);
    if (es.info() != Eigen::Success) throw Error(Errc::convergence, "eigenvalue iteration did not converge");
    r.values = es.eigenvalues();
  }
  r.spectral_radius = r.values.cwiseAbs().maxCoeff();
  return r;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  check_square(m.rows(), m.cols(), "eigenvalue input");
  if (m.rows() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(Errc::convergence, "eigenvalue iteration did not converge");
  return es.eigenvalues();
}

double spectral_radius(const Matrix& m) { return eigenvalues(m).spectral_radius; }

bool is_diagonal(const SparseMatrix& m) {
  for (Index j = 0; j < m.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) return false;
    }
  }
  return true;
}

}  // namespace racqp
