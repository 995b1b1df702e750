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

#include "racqp/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "../admm/engine.hpp"
#include "racqp/log.hpp"

namespace racqp {

namespace {

using Clock = std::chrono::steady_clock;
using detail::Engine;
using detail::LocalRows;

constexpr double kInf = std::numeric_limits<double>::infinity();

double tie_tol(double best) { return 1e-9 * (1.0 + (std::isfinite(best) ? std::abs(best) : 0.0)); }

bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

bool constraints_hold(const BinarySubproblem& sub, const Vector& ex, const Vector& gx) {
  for (Index r = 0; r < ex.size(); ++r)
    if (std::abs(ex[r] - sub.f[r]) > 1e-9 * (1.0 + std::abs(sub.f[r]))) return false;
  for (Index r = 0; r < gx.size(); ++r)
    if (gx[r] > sub.h[r] + 1e-9 * (1.0 + std::abs(sub.h[r]))) return false;
  return true;
}

BinaryAssignment enumerate_gray(const BinarySubproblem& sub) {
  const Index d = sub.q.size();
  Vector x = Vector::Zero(d), qx = Vector::Zero(d);
  Vector ex = Vector::Zero(sub.E.rows()), gx = Vector::Zero(sub.G.rows());
  double f = 0.0;

  BinaryAssignment best;
  best.x = Vector::Zero(d);
  auto consider = [&] {
    if (!constraints_hold(sub, ex, gx)) return;
    const double tol = tie_tol(best.objective);
    if (!best.feasible || f < best.objective - tol ||
        (std::abs(f - best.objective) <= tol && lex_less(x, best.x))) {
      best.x = x;
      best.objective = f;
      best.feasible = true;
    }
  };
  consider();
  const std::uint64_t states = std::uint64_t{1} << d;
  for (std::uint64_t i = 1; i < states; ++i) {
    const Index k = static_cast<Index>(__builtin_ctzll(i));
    const double delta = x[k] == 0.0 ? 1.0 : -1.0;
    f += delta * (sub.q[k] + qx[k]) + 0.5 * sub.Q(k, k);
    x[k] += delta;
    qx += delta * sub.Q.col(k);
    if (ex.size() > 0) ex += delta * sub.E.col(k);
    if (gx.size() > 0) gx += delta * sub.G.col(k);
    consider();
  }
  if (best.feasible) best.objective = 0.5 * best.x.dot(sub.Q * best.x) + sub.q.dot(best.x);
  return best;
}

/// Depth-first search in index order with 0 tried before 1, so leaves arrive lexicographically.
class BranchAndBound {
 public:
  explicit BranchAndBound(const BinarySubproblem& sub) : sub_(sub), d_(sub.q.size()) {
    neg_ = sub.Q.cwiseMin(0.0);
    suffix_bounds(sub.E, e_lo_, e_hi_);
    suffix_bounds(sub.G, g_lo_, g_hi_);
    x_ = Vector::Zero(d_);
    qx_ = Vector::Zero(d_);
    ex_ = Vector::Zero(sub.E.rows());
    gx_ = Vector::Zero(sub.G.rows());
    best_.x = Vector::Zero(d_);
  }

  BinaryAssignment run() {
    dfs(0, 0.0);
    if (best_.feasible) best_.objective = 0.5 * best_.x.dot(sub_.Q * best_.x) + sub_.q.dot(best_.x);
    return best_;
  }

 private:
  static void suffix_bounds(const Matrix& a, Matrix& lo, Matrix& hi) {
    lo = Matrix::Zero(a.rows(), a.cols() + 1);
    hi = Matrix::Zero(a.rows(), a.cols() + 1);
    for (Index c = a.cols() - 1; c >= 0; --c) {
      lo.col(c) = lo.col(c + 1) + a.col(c).cwiseMin(0.0);
      hi.col(c) = hi.col(c + 1) + a.col(c).cwiseMax(0.0);
    }
  }

  bool reachable(Index k) const {
    for (Index r = 0; r < ex_.size(); ++r) {
      const double tol = 1e-9 * (1.0 + std::abs(sub_.f[r]));
      if (ex_[r] + e_lo_(r, k) > sub_.f[r] + tol || ex_[r] + e_hi_(r, k) < sub_.f[r] - tol)
        return false;
    }
    for (Index r = 0; r < gx_.size(); ++r)
      if (gx_[r] + g_lo_(r, k) > sub_.h[r] + 1e-9 * (1.0 + std::abs(sub_.h[r]))) return false;
    return true;
  }

  double lower_bound(Index k, double fixed) const {
    double bound = fixed;
    for (Index u = k; u < d_; ++u) {
      double pair = 0.0;
      for (Index v = k; v < d_; ++v)
        if (v != u) pair += neg_(u, v);
      bound += std::min(0.0, sub_.q[u] + qx_[u] + 0.5 * sub_.Q(u, u) + 0.5 * pair);
    }
    return bound;
  }

  void dfs(Index k, double fixed) {
    if (!reachable(k)) return;
    if (best_.feasible && lower_bound(k, fixed) >= best_.objective - tie_tol(best_.objective)) return;
    if (k == d_) {
      if (!constraints_hold(sub_, ex_, gx_)) return;
      if (!best_.feasible || fixed < best_.objective - tie_tol(best_.objective)) {
        best_.x = x_;
        best_.objective = fixed;
        best_.feasible = true;
      }
      return;
    }
    dfs(k + 1, fixed);
    const double gain = sub_.q[k] + qx_[k] + 0.5 * sub_.Q(k, k);
    flip(k, 1.0);
    dfs(k + 1, fixed + gain);
    flip(k, -1.0);
  }

  void flip(Index k, double delta) {
    x_[k] += delta;
    qx_ += delta * sub_.Q.col(k);
    if (ex_.size() > 0) ex_ += delta * sub_.E.col(k);
    if (gx_.size() > 0) gx_ += delta * sub_.G.col(k);
  }

  const BinarySubproblem& sub_;
  Index d_;
  Matrix neg_, e_lo_, e_hi_, g_lo_, g_hi_;
  Vector x_, qx_, ex_, gx_;
  BinaryAssignment best_;
};

IndexVector sample_indices(const IndexVector& pool, Index count, Rng& rng) {
  IndexVector v = pool;
  count = std::min<Index>(count, static_cast<Index>(v.size()));
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, static_cast<Index>(v.size()) - 1);
    std::swap(v[i], v[pick(rng)]);
  }
  v.resize(static_cast<std::size_t>(count));
  return v;
}

IndexVector binary_indices(const Lcqp& pb) {
  IndexVector out;
  for (Index j = 0; j < pb.num_vars(); ++j)
    if (pb.kinds[j] == VarKind::binary) out.push_back(j);
  return out;
}

/// Rows of the block sub-problem: local rows plus the optional cardinality window.
struct BlockRows {
  Matrix E, G;
  Vector f, h;
};

class MipSweeper {
 public:
  MipSweeper(const Lcqp& pb, const SolverOptions& opt, const MipOptions& mo, SolverState& st,
             const LocalRows* local)
      : pb_(pb), opt_(opt), mo_(mo), st_(st), local_(local), eng_(pb, opt, st, local, true) {}

  Engine& engine() { return eng_; }

  void update_block(const IndexVector& omega, Index slot) {
    IndexVector bins, conts;
    for (Index j : omega) (pb_.kinds[j] == VarKind::binary ? bins : conts).push_back(j);
    if (!bins.empty()) update_binary(bins);
    if (!conts.empty()) update_continuous(conts, slot);
  }

 private:
  void block_system(const IndexVector& omega, Matrix& Q, Vector& lin, Vector& x0) {
    Vector w_eq, w_in;
    eng_.effective_multipliers(w_eq, w_in);
    const Vector g = eng_.gradient(omega, w_eq, w_in);
    Q = Matrix(eng_.block_matrix(omega));
    x0.resize(static_cast<Index>(omega.size()));
    for (std::size_t k = 0; k < omega.size(); ++k) x0[static_cast<Index>(k)] = st_.x[omega[k]];
    lin = g - Q * x0;
  }

  BlockRows local_rows(const IndexVector& omega, bool window) const {
    std::vector<std::pair<Index, bool>> rows;
    if (local_ != nullptr)
      for (Index j : omega)
        for (const auto& r : local_->by_first_col[j]) rows.push_back(r);
    Index n_eq = 0;
    for (const auto& r : rows) n_eq += r.second ? 0 : 1;
    const Index n_in = static_cast<Index>(rows.size()) - n_eq + (window ? 2 : 0);
    const Index b = static_cast<Index>(omega.size());

    BlockRows out{Matrix::Zero(n_eq, b), Matrix::Zero(n_in, b), Vector(n_eq), Vector(n_in)};
    Index ke = 0, ki = 0;
    for (const auto& [row, ineq] : rows) {
      const SparseMatrix& a = ineq ? pb_.A_ineq : pb_.A_eq;
      for (Index c = 0; c < b; ++c) (ineq ? out.G(ki, c) : out.E(ke, c)) = a.coeff(row, omega[c]);
      if (ineq)
        out.h[ki++] = pb_.b_ineq[row];
      else
        out.f[ke++] = pb_.b_eq[row];
    }
    if (window) {
      // The block's share of the cardinality residual may only be 0 or 1.
      double inside = 0.0;
      for (Index c = 0; c < b; ++c) {
        const double a = pb_.A_eq.coeff(0, omega[c]);
        out.G(ki, c) = a;
        out.G(ki + 1, c) = -a;
        inside += a * st_.x[omega[c]];
      }
      const double target = pb_.b_eq[0] - (eng_.aeq_x()[0] - inside);
      out.h[ki] = target + 1.0;
      out.h[ki + 1] = -target;
    }
    return out;
  }

  void update_binary(const IndexVector& bins) {
    BinarySubproblem sub;
    Vector x0;
    block_system(bins, sub.Q, sub.q, x0);
    BlockRows rows = local_rows(bins, mo_.bisection_blocks);
    sub.E = std::move(rows.E);
    sub.f = std::move(rows.f);
    sub.G = std::move(rows.G);
    sub.h = std::move(rows.h);

    BinaryAssignment a = exact_binary_subsolve(sub, BinaryMethod::automatic, mo_.enumeration_cap,
                                               mo_.branch_and_bound_cap);
    if (!a.feasible && mo_.bisection_blocks) {
      rows = local_rows(bins, false);
      sub.G = std::move(rows.G);
      sub.h = std::move(rows.h);
      a = exact_binary_subsolve(sub, BinaryMethod::automatic, mo_.enumeration_cap,
                                mo_.branch_and_bound_cap);
    }
    if (!a.feasible) {
      log_debug("binary block has no assignment satisfying its local rows; kept unchanged");
      return;
    }
    eng_.apply(bins, a.x - x0);
  }

  void update_continuous(const IndexVector& conts, Index slot) {
    Matrix Q;
    Vector lin, x0;
    block_system(conts, Q, lin, x0);
    const Index b = static_cast<Index>(conts.size());
    Eigen::LLT<Matrix> llt(Q);
    if (llt.info() != Eigen::Success) throw BlockNotPositiveDefinite(slot, conts);

    IndexVector lbs, ubs;
    for (Index k = 0; k < b; ++k) {
      if (std::isfinite(pb_.lb[conts[k]])) lbs.push_back(k);
      if (std::isfinite(pb_.ub[conts[k]])) ubs.push_back(k);
    }
    Vector x_new;
    if (lbs.empty() && ubs.empty()) {
      x_new = -llt.solve(lin);
    } else {
      const Index nb = static_cast<Index>(lbs.size() + ubs.size());
      Matrix G = Matrix::Zero(nb, b);
      Vector h(nb);
      Index r = 0;
      for (Index k : lbs) {
        G(r, k) = -1.0;
        h[r++] = -pb_.lb[conts[k]];
      }
      for (Index k : ubs) {
        G(r, k) = 1.0;
        h[r++] = pb_.ub[conts[k]];
      }
      x_new = solve_small_qp(Q, lin, Matrix(0, b), Vector(0), G, h, x0).x;
      for (Index k = 0; k < b; ++k)
        x_new[k] = std::clamp(x_new[k], pb_.lb[conts[k]], pb_.ub[conts[k]]);
    }
    eng_.apply(conts, x_new - x0);
  }

  const Lcqp& pb_;
  const SolverOptions& opt_;
  const MipOptions& mo_;
  SolverState& st_;
  const LocalRows* local_;
  Engine eng_;
};

void check_inputs(const Lcqp& pb, const SolverOptions& opt, const MipOptions& mo) {
  bool any_binary = false;
  for (VarKind k : pb.kinds) {
    require(k != VarKind::integer, Errc::invalid_argument,
            "general integer variables are not supported; use binary expansions");
    any_binary = any_binary || k == VarKind::binary;
  }
  require(any_binary, Errc::invalid_argument, "problem has no binary variables");
  require(opt.p >= 1 && opt.p <= std::max<Index>(1, pb.num_vars()), Errc::invalid_argument,
          "block count p must lie in [1, n]");
  require(opt.beta > 0.0, Errc::invalid_argument, "beta must be positive");
  require(opt.mode != SolverMode::distributed, Errc::invalid_argument,
          "distributed mode is not available for mixed-integer problems");
  require(mo.np_min >= 1, Errc::invalid_argument, "Np_min must be at least 1");
  require(!mo.lambda || *mo.lambda > 0.0, Errc::invalid_argument, "perturbation lambda must be positive");
  require(!mo.n_trial || *mo.n_trial >= 0.0, Errc::invalid_argument, "N_trial must be non-negative");
  require(mo.feasibility_eps >= 0.0, Errc::invalid_argument, "feasibility eps must be non-negative");
  if (mo.bisection_blocks)
    require(pb.num_eq() >= 1, Errc::invalid_argument,
            "bisection blocks need the cardinality row as the first equality row");
}

}  // namespace

const char* to_string(PerturbKind kind) noexcept {
  switch (kind) {
    case PerturbKind::reassign: return "reassign";
    case PerturbKind::bit_flip: return "bit_flip";
    case PerturbKind::swap_balanced: return "swap_balanced";
    case PerturbKind::qap_super_swap: return "qap_super_swap";
  }
  return "unknown";
}

PerturbKind parse_perturb_kind(const std::string& text) {
  for (PerturbKind k : {PerturbKind::reassign, PerturbKind::bit_flip, PerturbKind::swap_balanced,
                        PerturbKind::qap_super_swap})
    if (text == to_string(k)) return k;
  throw Error(Errc::invalid_argument, "unknown perturbation kind '" + text + "'");
}

double default_n_trial(Index n) { return std::min(2.0, 0.005 * static_cast<double>(n)); }

BinaryAssignment exact_binary_subsolve(const BinarySubproblem& sub, BinaryMethod method,
                                       Index enumeration_cap, Index bnb_cap) {
  const Index d = sub.q.size();
  require(sub.Q.rows() == d && sub.Q.cols() == d, Errc::dimension, "block matrix must be d x d");
  require(sub.E.rows() == sub.f.size() && (sub.E.rows() == 0 || sub.E.cols() == d),
          Errc::dimension, "equality rows do not match the block");
  require(sub.G.rows() == sub.h.size() && (sub.G.rows() == 0 || sub.G.cols() == d),
          Errc::dimension, "inequality rows do not match the block");
  if (d == 0) {
    BinaryAssignment a;
    a.x = Vector(0);
    a.objective = 0.0;
    a.feasible = constraints_hold(sub, Vector::Zero(sub.E.rows()), Vector::Zero(sub.G.rows()));
    return a;
  }
  if (method == BinaryMethod::automatic)
    method = d <= enumeration_cap ? BinaryMethod::enumerate : BinaryMethod::branch_and_bound;
  if (method == BinaryMethod::enumerate) {
    require(d <= std::min<Index>(enumeration_cap, 62), Errc::cap_exceeded,
            "binary block of " + std::to_string(d) + " variables exceeds the enumeration cap");
    return enumerate_gray(sub);
  }
  require(d <= bnb_cap, Errc::cap_exceeded,
          "binary block of " + std::to_string(d) + " variables exceeds the branch-and-bound cap");
  return BranchAndBound(sub).run();
}

Index sample_perturbation_count(double lambda, Index lo, Index hi, Rng& rng) {
  require(lambda > 0.0, Errc::invalid_argument, "lambda must be positive");
  require(lo <= hi, Errc::invalid_argument, "empty perturbation range");
  const double width = static_cast<double>(hi - lo + 1);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double x = static_cast<double>(lo) - lambda * std::log1p(-u * -std::expm1(-width / lambda));
  return std::clamp(static_cast<Index>(std::floor(x)), lo, hi);
}

PerturbResult perturb(const Vector& x_best, PerturbKind kind, const MipOptions& options, Rng& rng,
                      const Lcqp& problem, const SuperVariableSet* supers) {
  require(x_best.size() == problem.num_vars(), Errc::dimension, "x_best has the wrong length");
  PerturbResult out{x_best, 0};

  IndexVector pool;
  if (kind == PerturbKind::qap_super_swap) {
    require(supers != nullptr && !supers->groups.empty(), Errc::invalid_argument,
            "qap_super_swap needs super-variable groups");
    for (Index g = 0; g < static_cast<Index>(supers->groups.size()); ++g) pool.push_back(g);
  } else if (kind == PerturbKind::reassign) {
    for (Index j = 0; j < problem.num_vars(); ++j) pool.push_back(j);
  } else {
    pool = binary_indices(problem);
  }
  const Index atoms = static_cast<Index>(pool.size());
  if (atoms == 0) return out;
  const Index hi = std::clamp<Index>(options.np_max.value_or(atoms), 1, atoms);
  const Index lo = std::clamp<Index>(options.np_min, 1, hi);
  const double lambda = options.lambda.value_or(0.4 * static_cast<double>(atoms));
  const Index count = sample_perturbation_count(lambda, lo, hi, rng);

  switch (kind) {
    case PerturbKind::reassign:
      for (Index j : sample_indices(pool, count, rng)) {
        if (problem.kinds[j] == VarKind::binary) {
          out.x[j] = 1.0 - out.x[j];
        } else if (std::isfinite(problem.lb[j]) && std::isfinite(problem.ub[j])) {
          out.x[j] = std::uniform_real_distribution<double>(problem.lb[j], problem.ub[j])(rng);
        } else {
          out.x[j] = std::clamp(out.x[j] + std::normal_distribution<double>(0.0, 1.0)(rng),
                                problem.lb[j], problem.ub[j]);
        }
        ++out.changed;
      }
      break;
    case PerturbKind::bit_flip: {
      const IndexVector picked = sample_indices(pool, count, rng);
      out.x = bit_flip(x_best, picked);
      out.changed = static_cast<Index>(picked.size());
      break;
    }
    case PerturbKind::swap_balanced: {
      IndexVector ones, zeros;
      for (Index j : pool) (x_best[j] > 0.5 ? ones : zeros).push_back(j);
      const Index pairs = std::min({std::max<Index>(1, count / 2), static_cast<Index>(ones.size()),
                                    static_cast<Index>(zeros.size())});
      for (Index j : sample_indices(ones, pairs, rng)) out.x[j] = 0.0;
      for (Index j : sample_indices(zeros, pairs, rng)) out.x[j] = 1.0;
      out.changed = 2 * pairs;
      const double before = x_best(Eigen::all, pool).sum(), after = out.x(Eigen::all, pool).sum();
      if (before != after) throw std::logic_error("balanced swap changed the cardinality");
      break;
    }
    case PerturbKind::qap_super_swap:
      for (Index g : sample_indices(pool, count, rng)) {
        const IndexVector& members = supers->groups[static_cast<std::size_t>(g)];
        const Index size = static_cast<Index>(members.size());
        if (size < 2) continue;
        Index current = -1, ones = 0;
        for (Index k = 0; k < size; ++k)
          if (x_best[members[k]] > 0.5) {
            current = k;
            ++ones;
          }
        Index target = std::uniform_int_distribution<Index>(0, size - 1)(rng);
        if (ones == 1 && target == current)
          target = (current + 1 + std::uniform_int_distribution<Index>(0, size - 2)(rng)) % size;
        for (Index k = 0; k < size; ++k) out.x[members[k]] = k == target ? 1.0 : 0.0;
        ++out.changed;
        double row = 0.0;
        for (Index j : members) row += out.x[j];
        if (row != 1.0) throw std::logic_error("super swap broke the one-per-row structure");
      }
      break;
  }
  return out;
}

Vector bit_flip(const Vector& x, const IndexVector& indices) {
  Vector out = x;
  for (Index j : indices) {
    require(j >= 0 && j < x.size(), Errc::invalid_argument, "flip index out of range");
    out[j] = 1.0 - out[j];
  }
  return out;
}

double constraint_violation(const Lcqp& problem, const Vector& x) {
  double v = 0.0;
  if (problem.num_eq() > 0) v = (problem.A_eq * x - problem.b_eq).lpNorm<Eigen::Infinity>();
  if (problem.num_ineq() > 0)
    v = std::max(v, (problem.A_ineq * x - problem.b_ineq).cwiseMax(0.0).maxCoeff());
  for (Index j = 0; j < x.size(); ++j)
    v = std::max({v, problem.lb[j] - x[j], x[j] - problem.ub[j]});
  return v;
}

bool feasibility(const Lcqp& problem, const Vector& x, double eps) {
  require(x.size() == problem.num_vars(), Errc::dimension, "x has the wrong length");
  return constraint_violation(problem, x) <= eps;
}

double gap(double found, double reference, bool maximize) {
  require(std::isfinite(reference), Errc::invalid_argument, "reference objective must be finite");
  const double g = (found - reference) / (1.0 + std::abs(reference));
  return maximize ? -g : g;
}

MipResult solve_mip(const Lcqp& pb, const SolverOptions& opt, const MipOptions& mo) {
  check_inputs(pb, opt, mo);
  const Index n = pb.num_vars();

  SuperVariableSet supers_storage;
  const SuperVariableSet* supers = detail::resolve_supers(pb, opt, supers_storage);
  LocalRows local;
  const LocalRows* local_ptr = nullptr;
  if (supers != nullptr && opt.partial_lagrangian) {
    local = detail::build_local_rows(pb, *supers);
    for (Index r = 0; r < pb.num_eq() + pb.num_ineq(); ++r) {
      const bool ineq = r >= pb.num_eq();
      if (!(ineq ? local.ineq_local[r - pb.num_eq()] : local.eq_local[r])) continue;
      const SparseMatrix& a = ineq ? pb.A_ineq : pb.A_eq;
      const Index row = ineq ? r - pb.num_eq() : r;
      for (Index j = 0; j < n; ++j)
        require(a.coeff(row, j) == 0.0 || pb.kinds[j] == VarKind::binary, Errc::invalid_argument,
                "local rows may only involve binary variables");
    }
    if (local.any()) local_ptr = &local;
  }
  require(!(mo.bisection_blocks && local_ptr != nullptr && local.eq_local[0]),
          Errc::invalid_argument, "the cardinality row cannot also be a local row");

  SolverState st = initial_state(pb, opt);
  for (Index j = 0; j < n; ++j)
    if (pb.kinds[j] == VarKind::binary) st.x[j] = st.x[j] > 0.5 ? 1.0 : 0.0;
  st.x_tilde = st.x;
  st.z.setZero();

  MipSweeper sweeper(pb, opt, mo, st, local_ptr);
  Engine& eng = sweeper.engine();
  eng.update_slack();

  Rng rng(opt.seed);
  const bool reshuffle = opt.mode == SolverMode::rac || opt.mode == SolverMode::single_block;
  const Index p = opt.mode == SolverMode::single_block ? 1 : opt.p;
  BlockPartition fixed_blocks;
  if (!reshuffle) fixed_blocks = random_partition(n, p, rng, supers);
  const double n_trial = mo.n_trial.value_or(default_n_trial(n));

  MipResult out;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  double no_improve = 0.0;
  Index since_feasible = 0, perturb_since_improve = 0;
  Status status = Status::iteration_limit;
  for (;;) {
    const BlockPartition blocks = reshuffle ? random_partition(n, p, rng, supers) : fixed_blocks;
    const UpdateOrder order = opt.mode == SolverMode::cyclic ? identity_order(p) : random_order(p, rng);
    for (Index slot : order) sweeper.update_block(blocks[slot], slot);
    ++out.sweeps;
    if (out.sweeps % 10 == 0) eng.recompute();
    eng.update_slack();
    eng.update_multipliers(opt.beta);

    const double f = pb.objective(st.x);
    const bool feasible = feasibility(pb, st.x, mo.feasibility_eps);
    if (opt.record_trace) {
      const Residuals r = eng.residuals();
      out.result.trace.push_back({out.sweeps, r.r_prim, r.r_dual, f, 1000.0 * elapsed()});
    }
    if (feasible) {
      since_feasible = 0;
      if (!out.best.feasible || f < out.best.objective - tie_tol(out.best.objective)) {
        out.best = {st.x, f, true, elapsed()};
        out.events.push_back({out.best.found_at_s, out.sweeps, f});
        log_info("sweep " + std::to_string(out.sweeps) + ": incumbent " + std::to_string(f));
        no_improve = 0.0;
        perturb_since_improve = 0;
      } else {
        no_improve += 1.0;
      }
    } else {
      ++since_feasible;
    }

    if (mo.target_objective && out.best.feasible &&
        out.best.objective <= *mo.target_objective + tie_tol(*mo.target_objective)) {
      status = Status::optimal;
      break;
    }
    if (elapsed() >= mo.max_time_s || elapsed() >= opt.max_time_s) {
      status = Status::time_limit;
      break;
    }
    if (out.sweeps >= mo.max_sweeps || perturb_since_improve >= mo.max_no_improve) {
      status = Status::iteration_limit;
      break;
    }

    const bool stuck = feasible && no_improve >= n_trial;
    const bool stalled = since_feasible >= mo.stall_sweeps;
    if (stuck || stalled) {
      const Vector& base = out.best.feasible ? out.best.x : st.x;
      st.x = perturb(base, mo.kind, mo, rng, pb, supers).x;
      eng.recompute();
      eng.update_slack();
      no_improve = 0.0;
      since_feasible = 0;
      ++perturb_since_improve;
      ++out.perturbations;
    }
  }

  SolveResult& res = out.result;
  res.x = out.best.feasible ? out.best.x : st.x;
  res.objective = pb.objective(res.x);
  res.residuals = eng.residuals();
  Vector y(pb.num_eq() + pb.num_ineq());
  y << st.y_eq, st.y_ineq;
  res.verified = verify_solution(pb, res.x, y, st.z);
  res.status = status;
  res.iterations = out.sweeps;
  res.elapsed_s = elapsed();
  st.iteration = out.sweeps;
  st.elapsed_s = res.elapsed_s;
  res.state = st;
  res.block_solver = "exact-binary";
  return out;
}

}  // namespace racqp
