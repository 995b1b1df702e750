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

#include "racqp/admm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/LU>

#include "racqp/log.hpp"
#include "engine.hpp"

namespace racqp {

namespace {

using detail::Engine;
using detail::inf_norm;
using detail::LocalRows;
using detail::ratio;
using detail::resolve_supers;
using detail::stack_rows;
using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kRecomputeEvery = 10;

void check_options(const Lcqp& pb, const SolverOptions& opt) {
  require(opt.beta > 0.0, Errc::invalid_argument, "beta must be positive");
  require(opt.eps > 0.0 && opt.dual_eps() > 0.0, Errc::invalid_argument, "eps must be positive");
  require(opt.max_iter >= 0, Errc::invalid_argument, "max_iter must be non-negative");
  require(!pb.has_integers(), Errc::invalid_argument,
          "continuous solver called on a problem with integer variables");
  if (opt.mode != SolverMode::single_block)
    require(opt.p >= 1 && opt.p <= std::max<Index>(1, pb.num_vars()), Errc::invalid_argument,
            "block count must lie in [1, n]");
}

struct LoopMonitor {
  const SolverOptions& opt;
  Clock::time_point start = Clock::now();
  double best = kInf;

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start).count(); }

  /// Returns a terminal status or nullopt to continue.
  std::optional<Status> check(const Residuals& r, const Vector& x, Index iter, double t) {
    if (r.r_prim < opt.eps && r.r_dual < opt.dual_eps()) return Status::optimal;
    const double worst = std::max(r.r_prim, r.r_dual);
    if (!x.allFinite() || inf_norm(x) > 1e12 || !std::isfinite(worst)) return Status::diverged;
    if (worst > 1e6 * std::max(best, opt.eps)) return Status::diverged;
    best = std::min(best, worst);
    if (iter >= opt.max_iter) return Status::iteration_limit;
    if (t >= opt.max_time_s) return Status::time_limit;
    return std::nullopt;
  }
};

void record(SolveResult& res, const SolverOptions& opt, const Lcqp& pb, const SolverState& st,
            const Residuals& r, double t) {
  TraceRow row{st.iteration, r.r_prim, r.r_dual, pb.objective(st.x), t * 1e3};
  if (opt.record_trace) res.trace.push_back(row);
  if (opt.on_iteration) opt.on_iteration(row);
}

void finish(SolveResult& res, const Lcqp& pb, SolverState st, const Residuals& r, Status status,
            double t) {
  st.elapsed_s = t;
  res.x = st.x;
  res.objective = pb.objective(st.x);
  res.residuals = r;
  Vector y(st.y_eq.size() + st.y_ineq.size());
  y << st.y_eq, st.y_ineq;
  res.verified = verify_solution(pb, st.x, y, st.z);
  res.status = status;
  res.iterations = st.iteration;
  res.elapsed_s = t;
  res.state = std::move(st);
  log_info(std::string("solve finished: ") + to_string(status) + " after " +
           std::to_string(res.iterations) + " iterations");
}

SolveResult run_blocks(const Lcqp& pb, const SolverOptions& opt) {
  check_options(pb, opt);
  require(opt.mode != SolverMode::single_block, Errc::invalid_argument, "use solve_single_block");
  const Index n = pb.num_vars();
  Rng rng(opt.seed);

  SuperVariableSet supers_storage;
  const SuperVariableSet* supers = resolve_supers(pb, opt, supers_storage);

  std::optional<LocalRows> local;
  if (opt.partial_lagrangian) {
    require(supers != nullptr, Errc::invalid_argument,
            "partial Lagrangian needs super-variables (supplied or detected)");
    require(opt.mode != SolverMode::distributed, Errc::invalid_argument,
            "partial Lagrangian is not available in distributed mode");
    local = detail::build_local_rows(pb, *supers);
  }

  BlockPartition fixed;
  const bool rac = opt.mode == SolverMode::rac;
  if (!rac) {
    if (opt.partition) {
      fixed = *opt.partition;
      check_partition(fixed, n);
    } else {
      fixed = supers != nullptr ? random_partition(n, opt.p, rng, supers)
                                : contiguous_partition(n, opt.p);
    }
  }

  SolveResult res;
  res.block_solver = local ? "partial-lagrangian" : "cholesky";
  SolverState st = initial_state(pb, opt);
  Engine eng(pb, opt, st, local ? &*local : nullptr);
  const bool any_split =
      std::find(eng.split().begin(), eng.split().end(), 1) != eng.split().end();

  std::vector<CholeskyFactor> cache(fixed.size());
  std::vector<Vector> targets;
  const Index p_blocks = static_cast<Index>(fixed.size());
  if (opt.mode == SolverMode::distributed) {
    const Vector total = eng.stacked_residual();
    for (const auto& blk : fixed)
      targets.push_back(eng.block_product(blk) - total / static_cast<double>(p_blocks));
  }

  LoopMonitor mon{opt};
  Residuals r = eng.residuals();
  std::optional<Status> status;
  if (opt.max_iter == 0) status = Status::iteration_limit;

  while (!status) {
    ++st.iteration;
    switch (opt.mode) {
      case SolverMode::rac: {
        const BlockPartition blocks = random_partition(n, opt.p, rng, supers);
        for (std::size_t i = 0; i < blocks.size(); ++i)
          eng.update_block(blocks[i], static_cast<Index>(i), nullptr);
        break;
      }
      case SolverMode::rp:
      case SolverMode::cyclic: {
        const UpdateOrder order = opt.mode == SolverMode::rp ? random_order(p_blocks, rng)
                                                             : identity_order(p_blocks);
        for (Index i : order) eng.update_block(fixed[i], i, &cache[i]);
        break;
      }
      case SolverMode::distributed:
        eng.update_distributed(fixed, cache, targets);
        break;
      case SolverMode::single_block:
        break;
    }
    if (st.iteration % kRecomputeEvery == 0) eng.recompute();
    eng.update_slack();
    if (any_split) {
      eng.update_xtilde();
      eng.update_z();
    } else {
      st.x_tilde = st.x;
    }
    if (opt.mode == SolverMode::distributed) {
      const Vector total = eng.stacked_residual();
      eng.update_multipliers(opt.beta / static_cast<double>(p_blocks));
      for (std::size_t i = 0; i < fixed.size(); ++i)
        targets[i] = eng.block_product(fixed[i]) - total / static_cast<double>(p_blocks);
    } else {
      eng.update_multipliers(opt.beta);
    }

    r = eng.residuals();
    const double t = mon.elapsed();
    record(res, opt, pb, st, r, t);
    status = mon.check(r, st.x, st.iteration, t);
  }
  finish(res, pb, std::move(st), r, *status, mon.elapsed());
  return res;
}

}  // namespace

const char* to_string(SolverMode mode) noexcept {
  switch (mode) {
    case SolverMode::rac: return "rac";
    case SolverMode::rp: return "rp";
    case SolverMode::cyclic: return "cyclic";
    case SolverMode::distributed: return "distributed";
    case SolverMode::single_block: return "single_block";
  }
  return "unknown";
}

const char* to_string(Grouping grouping) noexcept {
  switch (grouping) {
    case Grouping::none: return "none";
    case Grouping::supplied: return "supplied";
    case Grouping::auto_detect: return "auto";
  }
  return "unknown";
}

const char* to_string(Status status) noexcept {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::iteration_limit: return "iteration_limit";
    case Status::time_limit: return "time_limit";
    case Status::diverged: return "diverged";
  }
  return "unknown";
}

SolverMode parse_solver_mode(const std::string& text) {
  for (SolverMode m : {SolverMode::rac, SolverMode::rp, SolverMode::cyclic, SolverMode::distributed,
                       SolverMode::single_block})
    if (text == to_string(m)) return m;
  if (text == "single") return SolverMode::single_block;
  throw Error(Errc::invalid_argument, "unknown solver mode '" + text + "'");
}

std::vector<char> split_mask(const Lcqp& problem, bool split_free) {
  std::vector<char> mask(static_cast<std::size_t>(problem.num_vars()), 0);
  for (Index j = 0; j < problem.num_vars(); ++j)
    mask[j] = split_free || problem.is_bounded(j) ? 1 : 0;
  return mask;
}

SolverState initial_state(const Lcqp& problem, const SolverOptions& options) {
  const Index n = problem.num_vars();
  SolverState st;
  if (options.warm_start) {
    st = *options.warm_start;
    require(st.x.size() == n && st.x_tilde.size() == n && st.z.size() == n &&
                st.y_eq.size() == problem.num_eq() && st.y_ineq.size() == problem.num_ineq() &&
                st.s.size() == problem.num_ineq(),
            Errc::dimension, "warm start does not match the problem");
    return st;
  }
  if (options.x0) {
    require(options.x0->size() == n, Errc::dimension, "initial point has the wrong length");
    st.x = *options.x0;
  } else {
    st.x = problem.lb.cwiseMax(0.0).cwiseMin(problem.ub);
  }
  st.x_tilde = st.x.cwiseMax(problem.lb).cwiseMin(problem.ub);
  st.s = Vector::Zero(problem.num_ineq());
  st.y_eq = Vector::Zero(problem.num_eq());
  st.y_ineq = Vector::Zero(problem.num_ineq());
  st.z = Vector::Zero(n);
  return st;
}

namespace {

SolveResult solve_row_scaled(const Lcqp& pb, const SolverOptions& opt) {
  const RowScaling sc = row_scale(pb);
  SolverOptions inner = opt;
  inner.scale_rows = false;
  if (inner.warm_start) {
    inner.warm_start->y_eq = inner.warm_start->y_eq.cwiseProduct(sc.eq_factors);
    inner.warm_start->y_ineq = inner.warm_start->y_ineq.cwiseProduct(sc.ineq_factors);
    inner.warm_start->s = inner.warm_start->s.cwiseQuotient(sc.ineq_factors);
  }
  SolveResult res;
  std::vector<TraceRow> trace;
  double elapsed = 0.0;
  for (int round = 0;; ++round) {
    res = solve(sc.problem, inner);
    for (TraceRow row : res.trace) {
      row.elapsed_ms += elapsed * 1e3;
      trace.push_back(row);
    }
    elapsed += res.elapsed_s;
    SolverState& st = res.state;
    st.y_eq = st.y_eq.cwiseQuotient(sc.eq_factors);
    st.y_ineq = st.y_ineq.cwiseQuotient(sc.ineq_factors);
    st.s = st.s.cwiseProduct(sc.ineq_factors);
    Vector y(st.y_eq.size() + st.y_ineq.size());
    y << st.y_eq, st.y_ineq;
    res.verified = verify_solution(pb, st.x, y, st.z);
    const bool met = res.verified.r_prim < opt.eps && res.verified.r_dual < opt.dual_eps();
    if (res.status == Status::optimal && !met && (round == 8 || st.iteration >= opt.max_iter))
      res.status = Status::iteration_limit;
    if (res.status != Status::optimal || met) break;
    log_debug("scaled solve met eps but the unscaled model did not; tightening");
    SolverState warm = st;
    warm.y_eq = warm.y_eq.cwiseProduct(sc.eq_factors);
    warm.y_ineq = warm.y_ineq.cwiseProduct(sc.ineq_factors);
    warm.s = warm.s.cwiseQuotient(sc.ineq_factors);
    inner.warm_start = warm;
    inner.eps /= 10.0;
    if (inner.eps_dual) *inner.eps_dual /= 10.0;
    inner.max_time_s = opt.max_time_s - elapsed;
  }
  res.objective = pb.objective(res.x);
  res.trace = std::move(trace);
  res.elapsed_s = elapsed;
  res.state.elapsed_s = elapsed;
  return res;
}

}  // namespace

SolveResult solve(const Lcqp& problem, const SolverOptions& options) {
  if (options.scale_rows) return solve_row_scaled(problem, options);
  switch (options.mode) {
    case SolverMode::single_block: return solve_single_block(problem, options);
    case SolverMode::rac: return run_blocks(problem, options);
    default: return solve_variant(problem, options);
  }
}

SolveResult solve_variant(const Lcqp& problem, const SolverOptions& options) {
  require(options.mode == SolverMode::rp || options.mode == SolverMode::cyclic ||
              options.mode == SolverMode::distributed,
          Errc::invalid_argument, "solve_variant expects RP, CYCLIC or DISTRIBUTED");
  return run_blocks(problem, options);
}

SolveResult solve_single_block(const Lcqp& pb, const SolverOptions& opt) {
  check_options(pb, opt);
  require(!opt.partial_lagrangian, Errc::invalid_argument,
          "partial Lagrangian is not available in single-block mode");
  const double beta = opt.beta;
  const SparseMatrix A = stack_rows(pb.A_eq, pb.A_ineq);
  const std::vector<char> split = split_mask(pb, opt.split_free);
  Vector prox(pb.num_vars());
  for (Index j = 0; j < prox.size(); ++j) prox[j] = split[j] ? 1.0 : 0.0;
  const bool any_split = prox.sum() > 0.0;

  SolveResult res;
  KktFactor kkt;
  if (is_diagonal(pb.H)) {
    kkt = kkt_factor_diagonal(Vector(pb.H.diagonal()), A, beta, prox);
    res.block_solver = "kkt-diagonal";
  } else {
    kkt = kkt_factor_general(pb.H, A, beta, prox);
    res.block_solver = "kkt-general";
  }

  SolverState st = initial_state(pb, opt);
  Engine eng(pb, opt, st, nullptr);
  Vector b(A.rows());
  b << pb.b_eq, pb.b_ineq;

  LoopMonitor mon{opt};
  Residuals r = eng.residuals();
  std::optional<Status> status;
  if (opt.max_iter == 0) status = Status::iteration_limit;
  while (!status) {
    ++st.iteration;
    Vector y(A.rows()), shifted = b;
    y << st.y_eq, st.y_ineq;
    shifted.tail(pb.num_ineq()) -= st.s;
    Vector q = pb.c - A.transpose() * y - beta * (A.transpose() * shifted);
    for (Index j = 0; j < q.size(); ++j)
      if (split[j]) q[j] -= st.z[j] + beta * st.x_tilde[j];
    st.x = kkt.solve_x(q);
    eng.recompute();
    eng.update_slack();
    if (any_split) {
      eng.update_xtilde();
      eng.update_z();
    } else {
      st.x_tilde = st.x;
    }
    eng.update_multipliers(beta);
    r = eng.residuals();
    const double t = mon.elapsed();
    record(res, opt, pb, st, r, t);
    status = mon.check(r, st.x, st.iteration, t);
  }
  finish(res, pb, std::move(st), r, *status, mon.elapsed());
  return res;
}

void update_block(SolverState& state, const Lcqp& problem, const IndexVector& omega,
                  const SolverOptions& options) {
  Engine eng(problem, options, state, nullptr);
  eng.update_block(omega, 0, nullptr);
}

void update_xtilde(SolverState& state, const Lcqp& problem, const SolverOptions& options) {
  Engine eng(problem, options, state, nullptr);
  eng.update_xtilde();
}

void update_slack(SolverState& state, const Lcqp& problem, double beta) {
  SolverOptions opt;
  opt.beta = beta;
  Engine eng(problem, opt, state, nullptr);
  eng.update_slack();
}

void update_duals(SolverState& state, const Lcqp& problem, const SolverOptions& options) {
  Engine eng(problem, options, state, nullptr);
  eng.update_z();
  eng.update_multipliers(options.beta);
}

Residuals residuals(const SolverState& state, const Lcqp& problem, const SolverOptions& options) {
  SolverState copy = state;
  Engine eng(problem, options, copy, nullptr);
  return eng.residuals();
}

Residuals verify_solution(const Lcqp& pb, const Vector& x, const Vector& y, const Vector& y_bounds) {
  const Index me = pb.num_eq(), mi = pb.num_ineq();
  require(x.size() == pb.num_vars() && y.size() == me + mi && y_bounds.size() == pb.num_vars(),
          Errc::dimension, "verify_solution: inconsistent vector lengths");
  Residuals r;
  const Vector aeq_x = pb.A_eq * x;
  r.r_Aeq = ratio(inf_norm(aeq_x - pb.b_eq), std::max(inf_norm(aeq_x), inf_norm(pb.b_eq)));
  const Vector ain_x = pb.A_ineq * x;
  r.r_Aineq = ratio(inf_norm((ain_x - pb.b_ineq).cwiseMax(0.0)),
                    std::max(inf_norm(ain_x), inf_norm(pb.b_ineq)));

  double lo = 0.0, hi = 0.0, nlb = 0.0, nub = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    if (std::isfinite(pb.lb[j])) {
      lo = std::max(lo, pb.lb[j] - x[j]);
      nlb = std::max(nlb, std::abs(pb.lb[j]));
    }
    if (std::isfinite(pb.ub[j])) {
      hi = std::max(hi, x[j] - pb.ub[j]);
      nub = std::max(nub, std::abs(pb.ub[j]));
    }
  }
  const double nx = inf_norm(x);
  r.r_bounds = std::max(ratio(lo, std::max(nx, nlb)), ratio(hi, std::max(nx, nub)));
  r.r_prim = std::max({r.r_Aeq, r.r_Aineq, r.r_bounds});

  const Vector hx = pb.H * x;
  const Vector aty = pb.A_eq.transpose() * y.head(me) + pb.A_ineq.transpose() * y.tail(mi);
  const Vector d = hx + pb.c - aty - y_bounds;
  r.r_dual = ratio(inf_norm(d), std::max({inf_norm(hx), inf_norm(pb.c), inf_norm(aty),
                                          inf_norm(y_bounds)}));
  return r;
}

SolverMode choose_mode(const Lcqp& problem) {
  const Index n = problem.num_vars();
  const Index m = problem.num_eq() + problem.num_ineq();
  if (m == 0 || n == 0) return SolverMode::rac;
  const double density = static_cast<double>(problem.A_eq.nonZeros() + problem.A_ineq.nonZeros()) /
                         (static_cast<double>(m) * static_cast<double>(n));
  return density < 1e-3 && n <= 50000 ? SolverMode::single_block : SolverMode::rac;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,r_prim,r_dual,objective,elapsed_ms\n";
  const auto old = out.precision(17);
  for (const auto& row : trace)
    out << row.iter << ',' << row.r_prim << ',' << row.r_dual << ',' << row.objective << ','
        << row.elapsed_ms << '\n';
  out.precision(old);
}

SmallQpResult solve_small_qp(const Matrix& Q, const Vector& g, const Matrix& E, const Vector& f,
                             const Matrix& G, const Vector& h, const Vector& x_start) {
  const Index n = Q.rows(), me = E.rows(), mi = G.rows();
  SmallQpResult out;
  Matrix K = Matrix::Zero(n + me, n + me);
  K.bottomLeftCorner(me, n) = E;
  K.topRightCorner(n, me) = E.transpose();

  if (mi == 0) {
    K.topLeftCorner(n, n) = Q;
    Vector rhs(n + me);
    rhs << -g, f;
    const Vector sol = K.fullPivLu().solve(rhs);
    out.x = sol.head(n);
    out.y_eq = -sol.tail(me);
    out.lambda = Vector();
    out.converged = true;
    return out;
  }

  Vector x = x_start, y = Vector::Zero(me), lam = Vector::Ones(mi);
  Vector w = (h - G * x).cwiseMax(1.0);
  const double tol = 1e-10;
  const double scale_d = 1.0 + inf_norm(g), scale_e = 1.0 + inf_norm(f), scale_i = 1.0 + inf_norm(h);

  auto max_step = [](const Vector& v, const Vector& dv) {
    double a = kInf;
    for (Index i = 0; i < v.size(); ++i)
      if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
  };

  for (Index it = 0; it < 200; ++it) {
    const Vector rd = Q * x + g - E.transpose() * y + G.transpose() * lam;
    const Vector re = E * x - f;
    const Vector ri = G * x + w - h;
    const double mu = lam.dot(w) / static_cast<double>(mi);
    out.iterations = it;
    if (inf_norm(rd) <= tol * scale_d && inf_norm(re) <= tol * scale_e &&
        inf_norm(ri) <= tol * scale_i && mu <= tol) {
      out.converged = true;
      break;
    }

    const Vector dg = lam.cwiseQuotient(w);
    K.topLeftCorner(n, n) = Q + G.transpose() * dg.asDiagonal() * G;
    const Eigen::FullPivLU<Matrix> lu(K);

    // Newton step for complementarity target rc; returns (dx, dy, dlam, dw).
    auto newton = [&](const Vector& rc, Vector& dx, Vector& dy, Vector& dl, Vector& dw) {
      const Vector t = (rc + lam.cwiseProduct(ri)).cwiseQuotient(w);
      Vector rhs(n + me);
      rhs << -rd - G.transpose() * t, -re;
      const Vector sol = lu.solve(rhs);
      dx = sol.head(n);
      dy = -sol.tail(me);
      dl = t + dg.cwiseProduct(G * dx);
      dw = -ri - G * dx;
    };

    Vector dx, dy, dl, dw;
    newton(-lam.cwiseProduct(w), dx, dy, dl, dw);
    const double a_aff = std::min({1.0, max_step(lam, dl), max_step(w, dw)});
    const double mu_aff =
        (lam + a_aff * dl).dot(w + a_aff * dw) / static_cast<double>(mi);
    const double sigma = std::pow(mu_aff / mu, 3);
    const Vector rc = -lam.cwiseProduct(w) - dl.cwiseProduct(dw) +
                      Vector::Constant(mi, sigma * mu);
    newton(rc, dx, dy, dl, dw);
    const double step = std::min(1.0, 0.99 * std::min(max_step(lam, dl), max_step(w, dw)));
    x += step * dx;
    y += step * dy;
    lam += step * dl;
    w += step * dw;
  }
  out.x = x;
  out.y_eq = y;
  out.lambda = lam;
  return out;
}

}  // namespace racqp
