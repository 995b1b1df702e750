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

// Augmented-Lagrangian engine shared by the continuous and the binary drivers.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "racqp/admm.hpp"
#include "racqp/log.hpp"

namespace racqp::detail {

inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

inline double ratio(double num, double scale) { return num / (1.0 + scale); }

inline SparseMatrix stack_rows(const SparseMatrix& top, const SparseMatrix& bottom) {
  std::vector<Eigen::Triplet<double, Index>> t;
  t.reserve(static_cast<std::size_t>(top.nonZeros() + bottom.nonZeros()));
  for (Index j = 0; j < top.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(top, j); it; ++it) t.emplace_back(it.row(), j, it.value());
  for (Index j = 0; j < bottom.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(bottom, j); it; ++it)
      t.emplace_back(top.rows() + it.row(), j, it.value());
  SparseMatrix out(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// Constraint rows enforced inside blocks by the partial Lagrangian.
struct LocalRows {
  std::vector<char> eq_local;
  std::vector<char> ineq_local;
  /// Local rows keyed by the first column of their support; `true` marks an inequality.
  std::vector<std::vector<std::pair<Index, bool>>> by_first_col;

  bool any() const {
    return std::find(eq_local.begin(), eq_local.end(), 1) != eq_local.end() ||
           std::find(ineq_local.begin(), ineq_local.end(), 1) != ineq_local.end();
  }
};

inline std::vector<IndexVector> row_supports(const SparseMatrix& a) {
  std::vector<IndexVector> rows(static_cast<std::size_t>(a.rows()));
  for (Index j = 0; j < a.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(a, j); it; ++it)
      if (it.value() != 0.0) rows[it.row()].push_back(j);
  return rows;
}

inline LocalRows build_local_rows(const Lcqp& pb, const SuperVariableSet& supers) {
  const Index n = pb.num_vars(), me = pb.num_eq(), mi = pb.num_ineq();
  LocalRows lr;
  lr.eq_local.assign(static_cast<std::size_t>(me), 0);
  lr.ineq_local.assign(static_cast<std::size_t>(mi), 0);
  lr.by_first_col.resize(static_cast<std::size_t>(n));

  IndexVector atom(static_cast<std::size_t>(n), -1);
  for (std::size_t g = 0; g < supers.groups.size(); ++g)
    for (Index j : supers.groups[g]) atom[j] = static_cast<Index>(g);

  const auto eq_rows = row_supports(pb.A_eq);
  const auto in_rows = row_supports(pb.A_ineq);
  for (const auto& rows : supers.local_rows) {
    for (Index r : rows) {
      require(r >= 0 && r < me + mi, Errc::invalid_argument,
              "local row " + std::to_string(r) + " out of range");
      const bool ineq = r >= me;
      const Index row = ineq ? r - me : r;
      const IndexVector& support = ineq ? in_rows[row] : eq_rows[row];
      if (support.empty()) continue;
      const Index a0 = atom[support.front()];
      for (Index j : support)
        require(a0 >= 0 && atom[j] == a0, Errc::invalid_argument,
                "local row " + std::to_string(r) + " spans more than one super-variable");
      (ineq ? lr.ineq_local : lr.eq_local)[row] = 1;
      lr.by_first_col[support.front()].emplace_back(row, ineq);
    }
  }
  return lr;
}

inline const SuperVariableSet* resolve_supers(const Lcqp& pb, const SolverOptions& opt,
                                              SuperVariableSet& storage) {
  switch (opt.grouping) {
    case Grouping::none:
      return nullptr;
    case Grouping::supplied:
      storage = opt.supers;
      break;
    case Grouping::auto_detect:
      storage = detect_structure(stack_rows(pb.A_eq, pb.A_ineq), opt.p);
      if (storage.degenerate) return nullptr;
      break;
  }
  return storage.groups.empty() ? nullptr : &storage;
}

/// Augmented-Lagrangian workhorse shared by all multi-block modes. Keeps H x, A_eq x and
/// A_ineq x current through column updates.
class Engine {
 public:
  /// `no_split` drops the x / x_tilde split entirely (bounds handled by the caller).
  Engine(const Lcqp& pb, const SolverOptions& opt, SolverState& st, const LocalRows* local,
         bool no_split = false)
      : pb_(pb), opt_(opt), st_(st), local_(local) {
    split_ = split_mask(pb, opt.split_free);
    if ((local_ != nullptr && opt.local_bounds) || no_split) std::fill(split_.begin(), split_.end(), 0);
    pos_.assign(static_cast<std::size_t>(pb.num_vars()), -1);
    recompute();
  }

  const std::vector<char>& split() const { return split_; }
  const LocalRows* local() const { return local_; }
  const Vector& hx() const { return hx_; }
  const Vector& aeq_x() const { return aeq_x_; }
  const Vector& ain_x() const { return ain_x_; }

  void recompute() {
    hx_ = pb_.H * st_.x;
    aeq_x_ = pb_.A_eq * st_.x;
    ain_x_ = pb_.A_ineq * st_.x;
  }

  bool is_global_eq(Index r) const { return local_ == nullptr || !local_->eq_local[r]; }
  bool is_global_ineq(Index r) const { return local_ == nullptr || !local_->ineq_local[r]; }

  /// Effective multipliers y - beta * (constraint residual), zero on local rows.
  void effective_multipliers(Vector& w_eq, Vector& w_in) const {
    const double beta = opt_.beta;
    w_eq = st_.y_eq - beta * (aeq_x_ - pb_.b_eq);
    w_in = st_.y_ineq - beta * (ain_x_ + st_.s - pb_.b_ineq);
    mask_local(w_eq, w_in);
  }

  void mask_local(Vector& w_eq, Vector& w_in) const {
    if (local_ == nullptr) return;
    for (Index r = 0; r < w_eq.size(); ++r)
      if (local_->eq_local[r]) w_eq[r] = 0.0;
    for (Index r = 0; r < w_in.size(); ++r)
      if (local_->ineq_local[r]) w_in[r] = 0.0;
  }

  /// Gradient of the augmented Lagrangian over omega for given effective multipliers.
  Vector gradient(const IndexVector& omega, const Vector& w_eq, const Vector& w_in) const {
    const double beta = opt_.beta;
    Vector g(static_cast<Index>(omega.size()));
    for (std::size_t k = 0; k < omega.size(); ++k) {
      const Index j = omega[k];
      double v = hx_[j] + pb_.c[j] - pb_.A_eq.col(j).dot(w_eq) - pb_.A_ineq.col(j).dot(w_in);
      if (split_[j]) v += -st_.z[j] + beta * (st_.x[j] - st_.x_tilde[j]);
      g[static_cast<Index>(k)] = v;
    }
    return g;
  }

  /// H_ww + beta A_w' A_w (global rows) + beta D_w.
  SparseMatrix block_matrix(const IndexVector& omega) {
    const Index b = static_cast<Index>(omega.size());
    const Index me = pb_.num_eq();
    for (Index k = 0; k < b; ++k) pos_[omega[k]] = k;

    std::vector<Eigen::Triplet<double, Index>> ht, at;
    for (Index k = 0; k < b; ++k) {
      const Index j = omega[k];
      for (SparseMatrix::InnerIterator it(pb_.H, j); it; ++it)
        if (pos_[it.row()] >= 0) ht.emplace_back(pos_[it.row()], k, it.value());
      if (split_[j]) ht.emplace_back(k, k, opt_.beta);
      for (SparseMatrix::InnerIterator it(pb_.A_eq, j); it; ++it)
        if (is_global_eq(it.row())) at.emplace_back(it.row(), k, it.value());
      for (SparseMatrix::InnerIterator it(pb_.A_ineq, j); it; ++it)
        if (is_global_ineq(it.row())) at.emplace_back(me + it.row(), k, it.value());
    }
    for (Index k = 0; k < b; ++k) pos_[omega[k]] = -1;

    SparseMatrix q(b, b);
    q.setFromTriplets(ht.begin(), ht.end());
    if (!at.empty()) {
      SparseMatrix aw(me + pb_.num_ineq(), b);
      aw.setFromTriplets(at.begin(), at.end());
      SparseMatrix ata = SparseMatrix(aw.transpose()) * aw;
      q += opt_.beta * ata;
    }
    return q;
  }

  CholeskyFactor factor_block(const IndexVector& omega, Index slot) {
    try {
      return cholesky(block_matrix(omega));
    } catch (const Error& e) {
      if (e.code() == Errc::not_positive_definite || e.code() == Errc::asymmetric)
        throw BlockNotPositiveDefinite(slot, omega);
      throw;
    }
  }

  void apply(const IndexVector& omega, const Vector& delta) {
    for (std::size_t k = 0; k < omega.size(); ++k) {
      const double d = delta[static_cast<Index>(k)];
      if (d == 0.0) continue;
      const Index j = omega[k];
      st_.x[j] += d;
      for (SparseMatrix::InnerIterator it(pb_.H, j); it; ++it) hx_[it.row()] += it.value() * d;
      for (SparseMatrix::InnerIterator it(pb_.A_eq, j); it; ++it) aeq_x_[it.row()] += it.value() * d;
      for (SparseMatrix::InnerIterator it(pb_.A_ineq, j); it; ++it) ain_x_[it.row()] += it.value() * d;
    }
  }

  /// Exact block minimization. `factor` is reused when non-null and filled when empty.
  void update_block(const IndexVector& omega, Index slot, CholeskyFactor* cache) {
    if (omega.empty()) return;
    Vector w_eq, w_in;
    effective_multipliers(w_eq, w_in);
    const Vector g = gradient(omega, w_eq, w_in);

    CholeskyFactor local_factor;
    CholeskyFactor* f = cache != nullptr ? cache : &local_factor;
    if (f->size() == 0) *f = factor_block(omega, slot);

    if (local_ != nullptr && (opt_.local_bounds || has_local_rows(omega))) {
      update_block_local(omega, slot, g, *f);
      return;
    }
    apply(omega, -f->solve(g));
  }

  /// Jacobi-style distributed step: every block sees the same iterate and its own target.
  void update_distributed(const BlockPartition& blocks, std::vector<CholeskyFactor>& cache,
                          std::vector<Vector>& targets) {
    const double beta = opt_.beta;
    const Index me = pb_.num_eq();
    std::vector<Vector> deltas(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Vector ax = block_product(blocks[i]);
      Vector w_eq = st_.y_eq - beta * (ax.head(me) - targets[i].head(me));
      Vector w_in = st_.y_ineq - beta * (ax.tail(pb_.num_ineq()) - targets[i].tail(pb_.num_ineq()));
      // The gradient assumes H x for the current iterate, which is shared by all blocks.
      const Vector g = gradient(blocks[i], w_eq, w_in);
      if (cache[i].size() == 0) cache[i] = factor_block(blocks[i], static_cast<Index>(i));
      deltas[i] = -cache[i].solve(g);
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) apply(blocks[i], deltas[i]);
  }

  /// Stacked [A_eq; A_ineq] x restricted to the columns in omega.
  Vector block_product(const IndexVector& omega) const {
    const Index me = pb_.num_eq();
    Vector out = Vector::Zero(me + pb_.num_ineq());
    for (Index j : omega) {
      const double xj = st_.x[j];
      for (SparseMatrix::InnerIterator it(pb_.A_eq, j); it; ++it) out[it.row()] += it.value() * xj;
      for (SparseMatrix::InnerIterator it(pb_.A_ineq, j); it; ++it)
        out[me + it.row()] += it.value() * xj;
    }
    return out;
  }

  Vector stacked_residual() const {
    Vector r(pb_.num_eq() + pb_.num_ineq());
    r << aeq_x_ - pb_.b_eq, ain_x_ + st_.s - pb_.b_ineq;
    return r;
  }

  void update_slack() {
    for (Index r = 0; r < st_.s.size(); ++r) {
      if (is_global_ineq(r))
        st_.s[r] = std::max(0.0, st_.y_ineq[r] / opt_.beta + pb_.b_ineq[r] - ain_x_[r]);
      else
        st_.s[r] = std::max(0.0, pb_.b_ineq[r] - ain_x_[r]);
    }
  }

  void update_xtilde() {
    for (Index j = 0; j < st_.x.size(); ++j) {
      if (split_[j])
        st_.x_tilde[j] = std::clamp(st_.x[j] - st_.z[j] / opt_.beta, pb_.lb[j], pb_.ub[j]);
      else
        st_.x_tilde[j] = st_.x[j];
    }
  }

  void update_z() {
    for (Index j = 0; j < st_.x.size(); ++j)
      if (split_[j]) st_.z[j] -= opt_.beta * (st_.x[j] - st_.x_tilde[j]);
  }

  /// y -= step * residual on global rows.
  void update_multipliers(double step) {
    for (Index r = 0; r < st_.y_eq.size(); ++r)
      if (is_global_eq(r)) st_.y_eq[r] -= step * (aeq_x_[r] - pb_.b_eq[r]);
    for (Index r = 0; r < st_.y_ineq.size(); ++r)
      if (is_global_ineq(r)) st_.y_ineq[r] -= step * (ain_x_[r] + st_.s[r] - pb_.b_ineq[r]);
  }

  Residuals residuals() const {
    Residuals r;
    const Vector req = aeq_x_ - pb_.b_eq;
    r.r_Aeq = ratio(inf_norm(req), std::max(inf_norm(aeq_x_), inf_norm(pb_.b_eq)));
    const Vector axs = ain_x_ + st_.s;
    r.r_Aineq = ratio(inf_norm(axs - pb_.b_ineq), std::max(inf_norm(axs), inf_norm(pb_.b_ineq)));
    double diff = 0.0, nx = 0.0, nxt = 0.0;
    for (Index j = 0; j < st_.x.size(); ++j) {
      if (!split_[j]) continue;
      diff = std::max(diff, std::abs(st_.x[j] - st_.x_tilde[j]));
      nx = std::max(nx, std::abs(st_.x[j]));
      nxt = std::max(nxt, std::abs(st_.x_tilde[j]));
    }
    r.r_bounds = ratio(diff, std::max(nx, nxt));
    r.r_prim = std::max({r.r_Aeq, r.r_Aineq, r.r_bounds});

    const Vector aty_eq = pb_.A_eq.transpose() * st_.y_eq;
    const Vector aty_in = pb_.A_ineq.transpose() * st_.y_ineq;
    const Vector d = hx_ + pb_.c - aty_eq - aty_in - st_.z;
    r.r_dual = ratio(inf_norm(d), std::max({inf_norm(hx_), inf_norm(pb_.c), inf_norm(aty_eq),
                                            inf_norm(aty_in), inf_norm(st_.z)}));
    return r;
  }

 private:
  bool has_local_rows(const IndexVector& omega) const {
    for (Index j : omega)
      if (!local_->by_first_col[j].empty()) return true;
    return false;
  }

  /// Block sub-problem with its local rows (and optionally bounds) as hard constraints.
  void update_block_local(const IndexVector& omega, Index slot, const Vector& g,
                          const CholeskyFactor& factor) {
    const Index b = static_cast<Index>(omega.size());
    for (Index k = 0; k < b; ++k) pos_[omega[k]] = k;

    std::vector<std::pair<Index, bool>> rows;
    for (Index j : omega)
      for (const auto& r : local_->by_first_col[j]) rows.push_back(r);
    Index n_eq = 0;
    for (const auto& r : rows) n_eq += r.second ? 0 : 1;
    const Index n_in = static_cast<Index>(rows.size()) - n_eq;

    Matrix E = Matrix::Zero(n_eq, b), G = Matrix::Zero(n_in, b);
    Vector f(n_eq), h(n_in);
    IndexVector eq_ids, in_ids;
    for (const auto& [row, ineq] : rows) {
      const SparseMatrix& a = ineq ? pb_.A_ineq : pb_.A_eq;
      Matrix& dst = ineq ? G : E;
      const Index k = ineq ? static_cast<Index>(in_ids.size()) : static_cast<Index>(eq_ids.size());
      for (Index c = 0; c < b; ++c) dst(k, c) = a.coeff(row, omega[c]);
      (ineq ? h : f)[k] = (ineq ? pb_.b_ineq : pb_.b_eq)[row];
      (ineq ? in_ids : eq_ids).push_back(row);
    }
    for (Index k = 0; k < b; ++k) pos_[omega[k]] = -1;

    const Vector x0 = st_.x(Eigen::Map<const Eigen::Matrix<Index, Eigen::Dynamic, 1>>(
        omega.data(), b));
    const Vector lin = g - solve_matrix_vector(omega, x0);

    IndexVector lb_ids, ub_ids;
    if (opt_.local_bounds) {
      for (Index k = 0; k < b; ++k) {
        if (std::isfinite(pb_.lb[omega[k]])) lb_ids.push_back(k);
        if (std::isfinite(pb_.ub[omega[k]])) ub_ids.push_back(k);
      }
    }

    Vector x_new;
    if (n_in == 0 && lb_ids.empty() && ub_ids.empty()) {
      // Q x + lin - E' nu = 0, E x = f.
      const Vector q_lin = factor.solve(lin);
      const Matrix q_et = factor.solve(Matrix(E.transpose()));
      const Matrix schur = E * q_et;
      const Vector nu = schur.ldlt().solve(f + E * q_lin);
      x_new = -q_lin + q_et * nu;
      for (Index k = 0; k < n_eq; ++k) st_.y_eq[eq_ids[k]] = nu[k];
    } else {
      const Index nb = static_cast<Index>(lb_ids.size() + ub_ids.size());
      Matrix Gall = Matrix::Zero(n_in + nb, b);
      Vector hall(n_in + nb);
      Gall.topRows(n_in) = G;
      hall.head(n_in) = h;
      Index r = n_in;
      for (Index k : lb_ids) {
        Gall(r, k) = -1.0;
        hall[r++] = -pb_.lb[omega[k]];
      }
      for (Index k : ub_ids) {
        Gall(r, k) = 1.0;
        hall[r++] = pb_.ub[omega[k]];
      }
      const Matrix Q = Matrix(block_matrix(omega));
      const SmallQpResult sub = solve_small_qp(Q, lin, E, f, Gall, hall, x0);
      if (!sub.converged)
        log_debug("block " + std::to_string(slot) + ": interior point stopped before tolerance");
      x_new = sub.x;
      for (Index k = 0; k < n_eq; ++k) st_.y_eq[eq_ids[k]] = sub.y_eq[k];
      for (Index k = 0; k < n_in; ++k) st_.y_ineq[in_ids[k]] = -sub.lambda[k];
      if (opt_.local_bounds) {
        for (Index k = 0; k < b; ++k) st_.z[omega[k]] = 0.0;
        r = n_in;
        for (Index k : lb_ids) st_.z[omega[k]] += sub.lambda[r++];
        for (Index k : ub_ids) st_.z[omega[k]] -= sub.lambda[r++];
      }
    }
    apply(omega, x_new - x0);
  }

  /// Q_ww x for a block-local vector.
  Vector solve_matrix_vector(const IndexVector& omega, const Vector& v) {
    return block_matrix(omega) * v;
  }

  const Lcqp& pb_;
  const SolverOptions& opt_;
  SolverState& st_;
  const LocalRows* local_;
  std::vector<char> split_;
  IndexVector pos_;
  Vector hx_, aeq_x_, ain_x_;
};

}  // namespace racqp::detail
