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

#include "racqp/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "racqp/generators.hpp"
#include "racqp/log.hpp"
#include "racqp/ml.hpp"
#include "racqp/spectral.hpp"

#ifndef RACQP_VERSION
#define RACQP_VERSION "0.0.0"
#endif

namespace racqp::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_array(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  require(f.good(), Errc::io, "cannot open '" + path + "' for writing");
  f << text;
  require(f.good(), Errc::io, "failed writing '" + path + "'");
}

json envelope(const std::string& command, std::uint64_t seed, json config) {
  return json{{"version", version()}, {"command", command}, {"seed", seed}, {"config", std::move(config)}};
}

int exit_for(Status status) {
  switch (status) {
    case Status::optimal: return kExitOk;
    case Status::iteration_limit:
    case Status::time_limit: return kExitLimit;
    case Status::diverged: return kExitError;
  }
  return kExitError;
}

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

// ---------------------------------------------------------------------------
// Shared solver flags

struct SolverFlags {
  std::string mode = "auto";
  Index p = 0;
  double beta = 1.0;
  double eps = 1e-5;
  double eps_dual = 0.0;
  Index max_iter = 10000;
  double max_time = kInf;
  std::uint64_t seed = 1;
  std::string grouping = "none";
  bool partial_lagrangian = false;
  bool local_bounds = false;
  bool split_free = false;
  bool scale_rows = false;
  CLI::Option* p_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* eps_dual_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
};

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  f.mode_opt = app->add_option("--mode", f.mode, "rac, rp, cyclic, distributed, single or auto")
                   ->check(CLI::IsMember({"auto", "rac", "rp", "cyclic", "distributed", "single"}));
  f.p_opt = app->add_option("-p,--blocks", f.p, "number of blocks")->check(CLI::PositiveNumber);
  f.beta_opt = app->add_option("--beta", f.beta, "augmented Lagrangian penalty")->check(CLI::PositiveNumber);
  app->add_option("--eps", f.eps, "primal residual tolerance")->check(CLI::PositiveNumber);
  f.eps_dual_opt = app->add_option("--eps-dual", f.eps_dual, "dual residual tolerance (defaults to --eps)")
                       ->check(CLI::PositiveNumber);
  app->add_option("--max-iter", f.max_iter, "iteration limit")->check(CLI::NonNegativeNumber);
  app->add_option("--max-time", f.max_time, "time limit in seconds")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--grouping", f.grouping, "super-variable grouping: none or auto")
      ->check(CLI::IsMember({"none", "auto"}));
  app->add_flag("--partial-lagrangian", f.partial_lagrangian, "keep rows local to a group out of the AL");
  app->add_flag("--local-bounds", f.local_bounds, "enforce bounds inside partial-Lagrangian blocks");
  app->add_flag("--split-free", f.split_free, "split free variables as well");
  app->add_flag("--scale-rows", f.scale_rows, "equilibrate constraint rows before solving");
}

SolverOptions make_solver_options(const SolverFlags& f, const Lcqp& pb, Index default_p) {
  SolverOptions o;
  o.mode = f.mode == "auto" ? choose_mode(pb) : parse_solver_mode(f.mode);
  o.p = f.p_opt->count() > 0 ? f.p : default_p;
  if (o.mode == SolverMode::single_block) o.p = 1;
  o.beta = f.beta;
  o.eps = f.eps;
  if (f.eps_dual_opt->count() > 0) o.eps_dual = f.eps_dual;
  o.max_iter = f.max_iter;
  o.max_time_s = f.max_time;
  o.seed = f.seed;
  o.grouping = f.grouping == "auto" ? Grouping::auto_detect : Grouping::none;
  o.partial_lagrangian = f.partial_lagrangian;
  o.local_bounds = f.local_bounds;
  o.split_free = f.split_free;
  o.scale_rows = f.scale_rows;
  return o;
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string problem;
  std::string out;
  std::string trace;
  SolverFlags solver;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const Lcqp pb = load_problem(a.problem);
  SolverOptions o = make_solver_options(a.solver, pb, std::max<Index>(1, ceil_div(pb.num_vars(), 60)));
  o.record_trace = !a.trace.empty();
  const SolveResult res = solve(pb, o);

  json config = to_json(o);
  config["problem"] = a.problem;
  json j = envelope("solve", o.seed, config);
  j["result"] = {{"status", to_string(res.status)},
                 {"objective", number(res.objective)},
                 {"iterations", res.iterations},
                 {"block_solver", res.block_solver},
                 {"residuals", to_json(res.verified)},
                 {"x", to_array(res.x)}};
  j["timing"] = {{"elapsed_s", res.elapsed_s}};
  write_text(a.out, j.dump(2) + "\n", out);
  if (!a.trace.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, res.trace);
    write_text(a.trace, csv.str(), out);
  }
  log_info("solve finished: " + std::string(to_string(res.status)));
  return exit_for(res.status);
}

// ---------------------------------------------------------------------------
// mip

struct MipArgs {
  std::string problem;
  std::string out;
  std::string events;
  SolverFlags solver;
  double max_time = 10.0;
  Index max_sweeps = 1000000;
  Index max_no_improve = 1000;
  double target = 0.0;
  std::string kind = "reassign";
  double lambda = 0.0;
  Index np_min = 2;
  Index np_max = 0;
  double n_trial = 0.0;
  double feas_eps = 1e-6;
  Index stall = 50;
  bool bisection = false;
  Index qap_rows = 0;
  CLI::Option* target_opt = nullptr;
  CLI::Option* kind_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* np_max_opt = nullptr;
  CLI::Option* n_trial_opt = nullptr;
  CLI::Option* bisection_opt = nullptr;
  CLI::Option* qap_opt = nullptr;
};

int cmd_mip(const MipArgs& a, std::ostream& out) {
  const ProblemManifest manifest = read_manifest(a.problem);
  const Lcqp pb = load_problem(manifest);
  const Index n = pb.num_vars();
  const std::string generator = manifest.metadata.value("generator", std::string());

  Index binaries = 0;
  for (VarKind k : pb.kinds) binaries += k == VarKind::binary ? 1 : 0;
  SolverFlags flags = a.solver;
  if (flags.mode_opt->count() == 0) flags.mode = "rac";
  SolverOptions so = make_solver_options(flags, pb, std::max<Index>(1, ceil_div(std::max<Index>(binaries, 1), 12)));

  MipOptions mo;
  mo.max_time_s = a.max_time;
  mo.max_sweeps = a.max_sweeps;
  mo.max_no_improve = a.max_no_improve;
  if (a.target_opt->count() > 0) mo.target_objective = a.target;
  mo.kind = parse_perturb_kind(a.kind);
  if (a.lambda_opt->count() > 0) mo.lambda = a.lambda;
  mo.np_min = a.np_min;
  if (a.np_max_opt->count() > 0) mo.np_max = a.np_max;
  if (a.n_trial_opt->count() > 0) mo.n_trial = a.n_trial;
  mo.feasibility_eps = a.feas_eps;
  mo.stall_sweeps = a.stall;
  mo.bisection_blocks = a.bisection;

  // Problem-family defaults recorded by `gen`; explicit flags win.
  Index qap_rows = a.qap_opt->count() > 0 ? a.qap_rows : 0;
  if (qap_rows == 0 && generator == "qap") qap_rows = manifest.metadata.value("r", Index{0});
  if (qap_rows > 0) {
    require(qap_rows * qap_rows == n, Errc::invalid_argument, "--qap-rows does not match the variable count");
    so.grouping = Grouping::supplied;
    so.supers = qap_row_groups(qap_rows);
    so.partial_lagrangian = true;
    if (a.solver.p_opt->count() == 0) so.p = ceil_div(qap_rows, 2);
    if (a.solver.beta_opt->count() == 0) so.beta = static_cast<double>(n);
    if (a.kind_opt->count() == 0) mo.kind = PerturbKind::qap_super_swap;
  } else if (generator == "maxbisection") {
    if (a.bisection_opt->count() == 0) mo.bisection_blocks = true;
    if (a.kind_opt->count() == 0) mo.kind = PerturbKind::swap_balanced;
  } else if (generator == "maxcut") {
    if (a.kind_opt->count() == 0) mo.kind = PerturbKind::bit_flip;
  } else if (generator == "markowitz-binary" || generator == "markowitz-like") {
    if (a.kind_opt->count() == 0 && pb.num_eq() > 0) mo.kind = PerturbKind::swap_balanced;
  }

  const MipResult r = solve_mip(pb, so, mo);

  json config = to_json(so);
  config["mip"] = to_json(mo);
  config["problem"] = a.problem;
  json j = envelope("mip", so.seed, config);
  json events = json::array();
  json event_times = json::array();
  for (const auto& e : r.events) {
    events.push_back({{"sweep", e.sweep}, {"objective", e.objective}});
    event_times.push_back(e.time_s);
  }
  j["result"] = {{"status", to_string(r.result.status)},
                 {"feasible", r.best.feasible},
                 {"objective", r.best.feasible ? number(r.best.objective) : json(nullptr)},
                 {"sweeps", r.sweeps},
                 {"perturbations", r.perturbations},
                 {"violation", constraint_violation(pb, r.result.x)},
                 {"events", events},
                 {"x", to_array(r.result.x)}};
  j["timing"] = {{"elapsed_s", r.result.elapsed_s},
                 {"found_at_s", r.best.found_at_s},
                 {"event_times_s", event_times}};
  write_text(a.out, j.dump(2) + "\n", out);
  if (!a.events.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "time_s,sweep,objective\n";
    for (const auto& e : r.events) csv << e.time_s << ',' << e.sweep << ',' << e.objective << '\n';
    write_text(a.events, csv.str(), out);
  }
  return r.best.feasible ? kExitOk : kExitLimit;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string problem;
  std::string fixture;
  double gamma = 1.0;
  std::string mode = "rac";
  Index p = 3;
  double beta = 1.0;
  Index partition = 0;
  std::uint64_t cap = 10000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  require(a.problem.empty() != a.fixture.empty(), Errc::invalid_argument,
          "give either a problem manifest or --fixture");
  Matrix H, A;
  if (!a.fixture.empty()) {
    require(a.fixture == "example2", Errc::invalid_argument, "unknown fixture '" + a.fixture + "'");
    A = divergence_example_matrix(a.gamma);
    H = Matrix::Zero(A.cols(), A.cols());
  } else {
    std::tie(H, A) = spectral_inputs(load_problem(a.problem));
  }

  AnalyzeOptions o;
  o.p = a.p;
  o.beta = a.beta;
  o.expectation.cap = a.cap;
  o.expectation.seed = a.seed;
  o.kronecker.cap = a.cap;
  if (a.mode == "rp") {
    const auto parts = enumerate_partitions(H.rows(), a.p, a.cap);
    require(a.partition >= 0 && a.partition < static_cast<Index>(parts.size()), Errc::invalid_argument,
            "--partition must index one of the " + std::to_string(parts.size()) + " compositions");
    o.rp_partition = parts[static_cast<std::size_t>(a.partition)];
  }
  const SpectralReport rep = analyze(H, A, o);
  const double rho_m = a.mode == "rp" ? *rep.rho_M_rp : rep.rho_M;
  const double rho_t = a.mode == "rp" ? *rep.rho_T_rp : rep.rho_T;

  json config = {{"mode", a.mode}, {"p", a.p}, {"beta", a.beta}, {"cap", a.cap}};
  if (!a.fixture.empty()) {
    config["fixture"] = a.fixture;
    config["gamma"] = a.gamma;
  } else {
    config["problem"] = a.problem;
  }
  if (o.rp_partition) config["partition"] = *o.rp_partition;
  json j = envelope("analyze", a.seed, config);
  j["rho_M"] = number(rho_m);
  j["rho_T"] = number(rho_t);
  j["expected_convergent"] = rho_m < 1.0;
  j["verdict"] = std::isnan(rho_t) ? "undetermined" : (rho_t < 1.0 ? "almost-sure" : "not-almost-sure");
  j["report"] = rep.to_json();
  write_text(a.out, j.dump(2) + "\n", out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen

Vector read_vector_csv(const std::string& path) {
  const Matrix m = load_csv_matrix(path);
  require(m.cols() == 1 || m.rows() == 1, Errc::parse, "'" + path + "' is not a single column");
  return m.cols() == 1 ? Vector(m.col(0)) : Vector(m.row(0).transpose());
}

Matrix random_qap_matrix(Index r, Rng& rng) {
  std::uniform_int_distribution<int> d(0, 9);
  Matrix m = Matrix::Zero(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = i + 1; j < r; ++j) m(i, j) = m(j, i) = d(rng);
  return m;
}

struct GenArgs {
  std::string out;
  std::uint64_t seed = 1;
  RandomQpSpec random;
  MarkowitzLikeSpec mlike;
  Index cardinality = 0;
  std::string returns, flow, distance, edges, features, labels;
  Index vertices = 0;
  Index qap_r = 0;
  double tau = 1.0;
  double kappa = 1e-5;
  double delta = 0.1;
  bool binary = false;
  bool low_rank = false;
  double C = 1.0;
  double sigma = 1.0;
};

int cmd_gen(const std::string& kind, GenArgs a, const CLI::App& sub, std::ostream& out) {
  Lcqp pb;
  json meta = {{"generator", kind}, {"seed", a.seed}};
  const CLI::Option* card = sub.get_option_no_throw("--cardinality");
  const bool has_card = card != nullptr && card->count() > 0;
  if (kind == "random") {
    a.random.seed = a.seed;
    pb = gen_random_lcqp(a.random);
    meta["n"] = a.random.n;
    meta["m_eq"] = a.random.m_eq;
    meta["m_ineq"] = a.random.m_ineq;
    meta["density"] = a.random.density;
    meta["condition"] = a.random.condition;
  } else if (kind == "markowitz-like") {
    a.mlike.seed = a.seed;
    if (has_card) a.mlike.cardinality = a.cardinality;
    pb = gen_markowitz_like(a.mlike);
    meta["n"] = a.mlike.n;
    meta["condition"] = a.mlike.condition;
    if (has_card) meta["cardinality"] = a.cardinality;
  } else if (kind == "markowitz") {
    MarkowitzSpec s;
    s.returns = load_csv_matrix(a.returns);
    s.tau = a.tau;
    s.kappa = a.kappa;
    s.binary = a.binary;
    s.low_rank = a.low_rank;
    if (has_card) s.cardinality = a.cardinality;
    pb = gen_markowitz(s);
    if (a.binary) meta["generator"] = "markowitz-binary";
    meta["returns"] = a.returns;
  } else if (kind == "maxcut" || kind == "maxbisection") {
    const GraphSpec g = load_edge_list(a.edges, a.vertices);
    pb = kind == "maxcut" ? gen_maxcut(g) : gen_maxbisection(g);
    meta["edges"] = a.edges;
    meta["vertices"] = g.vertices;
  } else if (kind == "qap") {
    QapSpec s;
    if (!a.flow.empty()) {
      s.flow = load_csv_matrix(a.flow);
      s.distance = load_csv_matrix(a.distance);
    } else {
      require(a.qap_r >= 2, Errc::invalid_argument, "give --flow/--distance files or --r >= 2");
      Rng rng(a.seed);
      s.flow = random_qap_matrix(a.qap_r, rng);
      s.distance = random_qap_matrix(a.qap_r, rng);
    }
    s.delta = a.delta;
    s.relaxed = !a.binary;
    pb = gen_qap(s);
    meta["r"] = s.flow.rows();
    meta["binary"] = a.binary;
  } else if (kind == "svm") {
    SvmSpec s;
    s.features = load_csv_matrix(a.features);
    s.labels = read_vector_csv(a.labels);
    s.C = a.C;
    s.sigma = a.sigma;
    pb = gen_svm_dual(s).problem;
    meta["C"] = a.C;
    meta["sigma"] = a.sigma;
  } else {
    throw Error(Errc::invalid_argument, "unknown generator '" + kind + "'");
  }
  require(!a.out.empty(), Errc::invalid_argument, "gen needs --out");
  save_problem(pb, a.out, meta);
  out << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string problem;
  Index markowitz_n = 300;
  std::vector<Index> blocks{10};
  std::vector<double> betas{1.0};
  std::vector<double> eps{1e-5};
  std::vector<std::string> modes{"rac"};
  std::vector<std::uint64_t> seeds{1};
  Index max_iter = 10000;
  double max_time = kInf;
  std::string out;
  // SVM grid check
  std::string features, labels;
  std::vector<double> c_grid{0.1, 1.0, 10.0};
  std::vector<double> sigma_grid{0.1, 1.0, 10.0};
  double holdout = 0.3;
};

int bench_svm(const BenchArgs& a, std::ostream& out) {
  const Matrix X = load_csv_matrix(a.features);
  const Vector y = read_vector_csv(a.labels);
  require(y.size() == X.rows(), Errc::dimension, "label count differs from point count");
  require(a.holdout > 0.0 && a.holdout < 1.0, Errc::invalid_argument, "--holdout must lie in (0, 1)");
  Rng rng(a.seeds.front());
  IndexVector order(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const Index test = std::max<Index>(1, static_cast<Index>(std::floor(a.holdout * X.rows())));
  require(test < X.rows(), Errc::invalid_argument, "hold-out leaves no training points");
  const IndexVector test_ids(order.begin(), order.begin() + test);
  const IndexVector train_ids(order.begin() + test, order.end());

  std::ostringstream csv;
  csv.precision(10);
  csv << "C,sigma,train_points,test_points,accuracy,iterations,runtime_s\n";
  for (double c : a.c_grid)
    for (double s : a.sigma_grid) {
      SvmSpec spec{X(train_ids, Eigen::all), y(train_ids), c, s};
      const auto start = Clock::now();
      const SvmModel m = train_csvc(spec);
      const double t = seconds_since(start);
      csv << c << ',' << s << ',' << train_ids.size() << ',' << test << ','
          << accuracy(m, X(test_ids, Eigen::all), y(test_ids)) << ',' << m.iterations << ',' << t << '\n';
    }
  write_text(a.out, csv.str(), out);
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (!a.features.empty()) return bench_svm(a, out);
  std::string name;
  Lcqp pb;
  if (!a.problem.empty()) {
    pb = load_problem(a.problem);
    name = a.problem;
  } else {
    MarkowitzLikeSpec s;
    s.n = a.markowitz_n;
    s.seed = a.seeds.front();
    pb = gen_markowitz_like(s);
    name = "markowitz-like-" + std::to_string(a.markowitz_n);
  }
  std::ostringstream csv;
  csv.precision(10);
  csv << "problem,mode,p,beta,eps,seed,status,iterations,runtime_s,r_prim,r_dual,objective\n";
  for (const auto& mode : a.modes)
    for (Index p : a.blocks)
      for (double beta : a.betas)
        for (double eps : a.eps)
          for (std::uint64_t seed : a.seeds) {
            SolverOptions o;
            o.mode = parse_solver_mode(mode);
            o.p = o.mode == SolverMode::single_block ? 1 : p;
            o.beta = beta;
            o.eps = eps;
            o.seed = seed;
            o.max_iter = a.max_iter;
            o.max_time_s = a.max_time;
            const SolveResult r = solve(pb, o);
            csv << name << ',' << to_string(o.mode) << ',' << o.p << ',' << beta << ',' << eps << ','
                << seed << ',' << to_string(r.status) << ',' << r.iterations << ',' << r.elapsed_s
                << ',' << r.verified.r_prim << ',' << r.verified.r_dual << ',' << r.objective << '\n';
          }
  write_text(a.out, csv.str(), out);
  return kExitOk;
}

}  // namespace

const char* version() noexcept { return RACQP_VERSION; }

json to_json(const SolverOptions& o) {
  json j = {{"mode", to_string(o.mode)},
            {"p", o.p},
            {"beta", o.beta},
            {"eps", o.eps},
            {"eps_dual", o.dual_eps()},
            {"max_iter", o.max_iter},
            {"max_time_s", number(o.max_time_s)},
            {"seed", o.seed},
            {"grouping", to_string(o.grouping)},
            {"partial_lagrangian", o.partial_lagrangian},
            {"local_bounds", o.local_bounds},
            {"split_free", o.split_free},
            {"scale_rows", o.scale_rows}};
  if (o.grouping == Grouping::supplied) j["groups"] = o.supers.groups.size();
  return j;
}

json to_json(const MipOptions& o) {
  json j = {{"kind", to_string(o.kind)},
            {"np_min", o.np_min},
            {"feasibility_eps", o.feasibility_eps},
            {"max_time_s", number(o.max_time_s)},
            {"max_sweeps", o.max_sweeps},
            {"max_no_improve", o.max_no_improve},
            {"stall_sweeps", o.stall_sweeps},
            {"bisection_blocks", o.bisection_blocks}};
  j["lambda"] = o.lambda ? json(*o.lambda) : json("0.4 atoms");
  j["np_max"] = o.np_max ? json(*o.np_max) : json("atoms");
  j["n_trial"] = o.n_trial ? json(*o.n_trial) : json("min(2, 0.005 n)");
  j["target_objective"] = o.target_objective ? number(*o.target_objective) : json(nullptr);
  return j;
}

json to_json(const Residuals& r) {
  return {{"r_prim", number(r.r_prim)},
          {"r_dual", number(r.r_dual)},
          {"r_Aeq", number(r.r_Aeq)},
          {"r_Aineq", number(r.r_Aineq)},
          {"r_bounds", number(r.r_bounds)}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RAC-ADMM quadratic programming solver", "racqp"};
  app.set_version_flag("--version", std::string(version()));
  app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags win");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "solve a continuous LCQP from a JSON manifest");
  solve_cmd->add_option("problem", solve_args.problem, "problem manifest")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("-o,--out", solve_args.out, "result JSON (stdout when omitted)");
  solve_cmd->add_option("--trace", solve_args.trace, "per-iteration CSV trace");
  add_solver_flags(solve_cmd, solve_args.solver);

  MipArgs mip_args;
  auto* mip_cmd = app.add_subcommand("mip", "solve-perturb-solve search for binary and mixed problems");
  mip_cmd->add_option("problem", mip_args.problem, "problem manifest")->required()->check(CLI::ExistingFile);
  mip_cmd->add_option("-o,--out", mip_args.out, "result JSON (stdout when omitted)");
  mip_cmd->add_option("--events", mip_args.events, "improvement log CSV (time_s,sweep,objective)");
  add_solver_flags(mip_cmd, mip_args.solver);
  mip_cmd->add_option("--time-limit", mip_args.max_time, "search time in seconds")->check(CLI::PositiveNumber);
  mip_cmd->add_option("--max-sweeps", mip_args.max_sweeps, "sweep limit")->check(CLI::PositiveNumber);
  mip_cmd->add_option("--max-no-improve", mip_args.max_no_improve, "perturbations without improvement")
      ->check(CLI::PositiveNumber);
  mip_args.target_opt = mip_cmd->add_option("--target", mip_args.target, "stop once this objective is reached");
  mip_args.kind_opt = mip_cmd->add_option("--perturb", mip_args.kind, "reassign, bit_flip, swap_balanced, qap_super_swap")
                          ->check(CLI::IsMember({"reassign", "bit_flip", "swap_balanced", "qap_super_swap"}));
  mip_args.lambda_opt = mip_cmd->add_option("--lambda", mip_args.lambda, "mean perturbation size")->check(CLI::PositiveNumber);
  mip_cmd->add_option("--np-min", mip_args.np_min, "fewest atoms perturbed")->check(CLI::PositiveNumber);
  mip_args.np_max_opt = mip_cmd->add_option("--np-max", mip_args.np_max, "most atoms perturbed")->check(CLI::PositiveNumber);
  mip_args.n_trial_opt = mip_cmd->add_option("--n-trial", mip_args.n_trial, "non-improving feasible hits before a perturbation")
                             ->check(CLI::NonNegativeNumber);
  mip_cmd->add_option("--feasibility-eps", mip_args.feas_eps, "feasibility tolerance")->check(CLI::NonNegativeNumber);
  mip_cmd->add_option("--stall-sweeps", mip_args.stall, "perturb after this many infeasible sweeps")->check(CLI::PositiveNumber);
  mip_args.bisection_opt = mip_cmd->add_flag("--bisection", mip_args.bisection, "cardinality-window block reformulation");
  mip_args.qap_opt = mip_cmd->add_option("--qap-rows", mip_args.qap_rows, "permutation size r; groups rows as super-variables")
                         ->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "spectral convergence analysis of the RAC/RP iteration maps");
  an_cmd->add_option("problem", an.problem, "equality-constrained problem manifest")->check(CLI::ExistingFile);
  an_cmd->add_option("--fixture", an.fixture, "built-in instance: example2");
  an_cmd->add_option("--gamma", an.gamma, "perturbation of the built-in constraint matrix");
  an_cmd->add_option("--mode", an.mode, "rac or rp")->check(CLI::IsMember({"rac", "rp"}));
  an_cmd->add_option("-p,--blocks", an.p, "number of blocks")->check(CLI::PositiveNumber);
  an_cmd->add_option("--beta", an.beta, "penalty")->check(CLI::PositiveNumber);
  an_cmd->add_option("--partition", an.partition, "RP composition index in enumeration order");
  an_cmd->add_option("--cap", an.cap, "enumeration cap for update combinations");
  an_cmd->add_option("--seed", an.seed, "seed for sampled expectations");
  an_cmd->add_option("-o,--out", an.out, "report JSON (stdout when omitted)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a problem manifest from a generator");
  gen_cmd->require_subcommand(1);
  gen_cmd->add_option("-o,--out", gen.out, "manifest path")->required();
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  std::string gen_kind;
  auto gen_sub = [&](const std::string& name, const std::string& help) {
    auto* s = gen_cmd->add_subcommand(name, help);
    s->callback([&gen_kind, name] { gen_kind = name; });
    return s;
  };
  auto* g_random = gen_sub("random", "random LCQP with controlled conditioning");
  g_random->add_option("--n", gen.random.n)->check(CLI::PositiveNumber);
  g_random->add_option("--m-eq", gen.random.m_eq)->check(CLI::NonNegativeNumber);
  g_random->add_option("--m-ineq", gen.random.m_ineq)->check(CLI::NonNegativeNumber);
  g_random->add_option("--density", gen.random.density)->check(CLI::Range(0.0, 1.0));
  g_random->add_option("--hessian-density", gen.random.hessian_density)->check(CLI::Range(0.0, 1.0));
  g_random->add_option("--eta", gen.random.eta);
  g_random->add_option("--zeta", gen.random.zeta);
  g_random->add_option("--condition", gen.random.condition)->check(CLI::PositiveNumber);
  g_random->add_flag("--nonnegative", gen.random.nonnegative);
  auto* g_mlike = gen_sub("markowitz-like", "one-row Markowitz-type instance");
  g_mlike->add_option("--n", gen.mlike.n)->check(CLI::PositiveNumber);
  g_mlike->add_option("--eta", gen.mlike.eta);
  g_mlike->add_option("--zeta", gen.mlike.zeta);
  g_mlike->add_option("--condition", gen.mlike.condition)->check(CLI::PositiveNumber);
  g_mlike->add_option("--kappa", gen.mlike.kappa);
  g_mlike->add_option("--cardinality", gen.cardinality, "binary variables with e'x = cardinality");
  auto* g_mark = gen_sub("markowitz", "portfolio model from a returns CSV");
  g_mark->add_option("--returns", gen.returns, "k x N returns")->required()->check(CLI::ExistingFile);
  g_mark->add_option("--tau", gen.tau);
  g_mark->add_option("--kappa", gen.kappa);
  g_mark->add_option("--cardinality", gen.cardinality);
  g_mark->add_flag("--binary", gen.binary);
  g_mark->add_flag("--low-rank", gen.low_rank);
  for (const char* name : {"maxcut", "maxbisection"}) {
    auto* g = gen_sub(name, std::string(name) + " from an edge list");
    g->add_option("--edges", gen.edges, "'u v [w]' per line")->required()->check(CLI::ExistingFile);
    g->add_option("--vertices", gen.vertices, "vertex count (at least max index + 1)");
  }
  auto* g_qap = gen_sub("qap", "quadratic assignment from flow/distance CSVs or a random size");
  g_qap->add_option("--flow", gen.flow)->check(CLI::ExistingFile);
  g_qap->add_option("--distance", gen.distance)->check(CLI::ExistingFile);
  g_qap->add_option("--r", gen.qap_r, "random instance size");
  g_qap->add_option("--delta", gen.delta);
  g_qap->add_flag("--binary", gen.binary);
  auto* g_svm = gen_sub("svm", "C-SVC dual from feature and label CSVs");
  g_svm->add_option("--features", gen.features)->required()->check(CLI::ExistingFile);
  g_svm->add_option("--labels", gen.labels)->required()->check(CLI::ExistingFile);
  g_svm->add_option("--C", gen.C)->check(CLI::PositiveNumber);
  g_svm->add_option("--sigma", gen.sigma)->check(CLI::PositiveNumber);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "parameter sweeps written as CSV");
  bench_cmd->add_option("--problem", bench.problem, "problem manifest (seeded Markowitz-like when omitted)")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--markowitz-n", bench.markowitz_n)->check(CLI::PositiveNumber);
  bench_cmd->add_option("-p,--blocks", bench.blocks)->delimiter(',');
  bench_cmd->add_option("--beta", bench.betas)->delimiter(',');
  bench_cmd->add_option("--eps", bench.eps)->delimiter(',');
  bench_cmd->add_option("--modes", bench.modes)->delimiter(',');
  bench_cmd->add_option("--seeds", bench.seeds)->delimiter(',');
  bench_cmd->add_option("--max-iter", bench.max_iter)->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--max-time", bench.max_time)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--features", bench.features, "SVM grid check: feature CSV")->check(CLI::ExistingFile);
  bench_cmd->add_option("--labels", bench.labels, "SVM grid check: label CSV")->check(CLI::ExistingFile);
  bench_cmd->add_option("--C-grid", bench.c_grid)->delimiter(',');
  bench_cmd->add_option("--sigma-grid", bench.sigma_grid)->delimiter(',');
  bench_cmd->add_option("--holdout", bench.holdout, "test fraction for the grid check");
  bench_cmd->add_option("-o,--out", bench.out, "CSV path (stdout when omitted)");

  try {
    // CLI11 consumes arguments from the back and without the program name.
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, out);
    if (*mip_cmd) return cmd_mip(mip_args, out);
    if (*an_cmd) return cmd_analyze(an, out);
    if (*gen_cmd) {
      require(!gen_kind.empty(), Errc::invalid_argument, "choose a generator");
      return cmd_gen(gen_kind, gen, *gen_cmd->get_subcommand(gen_kind), out);
    }
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace racqp::cli
