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

#include <Eigen/Eigenvalues>

#include "racqp/problem.hpp"

namespace racqp {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::dimension: return "dimension";
    case Errc::asymmetric: return "asymmetric";
    case Errc::not_positive_definite: return "not_positive_definite";
    case Errc::singular: return "singular";
    case Errc::cap_exceeded: return "cap_exceeded";
    case Errc::convergence: return "convergence";
  }
  return "unknown";
}

const char* to_string(VarKind kind) noexcept {
  switch (kind) {
    case VarKind::continuous: return "continuous";
    case VarKind::binary: return "binary";
    case VarKind::integer: return "integer";
  }
  return "continuous";
}

VarKind parse_var_kind(const std::string& text) {
  if (text == "continuous" || text == "C") return VarKind::continuous;
  if (text == "binary" || text == "B") return VarKind::binary;
  if (text == "integer" || text == "I") return VarKind::integer;
  throw Error(Errc::invalid_argument, "unknown variable kind '" + text + "'");
}

bool Lcqp::has_integers() const {
  for (auto k : kinds) {
    if (k != VarKind::continuous) return true;
  }
  return false;
}

bool Lcqp::is_bounded(Index i) const { return std::isfinite(lb[i]) || std::isfinite(ub[i]); }

double Lcqp::objective(const Vector& x) const {
  return 0.5 * x.dot(H * x) + c.dot(x) + c0;
}

namespace {

double symmetry_defect(const SparseMatrix& H) {
  const SparseMatrix diff = SparseMatrix(H.transpose()) - H;
  double worst = 0.0;
  for (Index j = 0; j < diff.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(diff, j); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

void fix_system(SparseMatrix& A, Vector& b, Index n, const char* what) {
  if (A.rows() == 0 && A.cols() == 0) A.resize(b.size(), n);
  if (A.cols() != n) {
    throw Error(Errc::dimension, std::string(what) + " has " + std::to_string(A.cols()) +
                                     " columns, expected " + std::to_string(n));
  }
  if (b.size() == 0 && A.rows() > 0) {
    throw Error(Errc::dimension, std::string(what) + " has rows but no right-hand side");
  }
  if (A.rows() != b.size()) {
    throw Error(Errc::dimension, std::string(what) + " has " + std::to_string(A.rows()) +
                                     " rows but rhs length " + std::to_string(b.size()));
  }
}

}  // namespace

void finalize(Lcqp& p, double symmetry_tol) {
  Index n = p.c.size();
  if (n == 0) n = p.H.rows();
  if (p.c.size() == 0) p.c = Vector::Zero(n);
  if (p.H.rows() == 0 && p.H.cols() == 0) p.H.resize(n, n);
  if (p.H.rows() != n || p.H.cols() != n) {
    throw Error(Errc::dimension, "H must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (symmetry_defect(p.H) > symmetry_tol) throw Error(Errc::asymmetric, "H is not symmetric");
  fix_system(p.A_eq, p.b_eq, n, "A_eq");
  fix_system(p.A_ineq, p.b_ineq, n, "A_ineq");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (p.lb.size() == 0) p.lb = Vector::Constant(n, -inf);
  if (p.ub.size() == 0) p.ub = Vector::Constant(n, inf);
  if (p.lb.size() != n || p.ub.size() != n) throw Error(Errc::dimension, "bound vectors must have length n");
  if (p.kinds.empty()) p.kinds.assign(static_cast<std::size_t>(n), VarKind::continuous);
  if (static_cast<Index>(p.kinds.size()) != n) throw Error(Errc::dimension, "kinds must have length n");
  for (Index i = 0; i < n; ++i) {
    if (p.kinds[static_cast<std::size_t>(i)] == VarKind::binary) {
      p.lb[i] = std::max(p.lb[i], 0.0);
      p.ub[i] = std::min(p.ub[i], 1.0);
    }
    if (p.lb[i] > p.ub[i]) {
      throw Error(Errc::invalid_argument, "lb > ub at index " + std::to_string(i));
    }
  }
  p.H.makeCompressed();
  p.A_eq.makeCompressed();
  p.A_ineq.makeCompressed();
}

Lcqp make_unconstrained(SparseMatrix H, Vector c) {
  Lcqp p;
  p.H = std::move(H);
  p.c = std::move(c);
  finalize(p);
  return p;
}

// ---------------------------------------------------------------------------
// manifest

namespace {

double json_real(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(Errc::parse, "expected a number or \"inf\"/\"-inf\", got " + v.dump());
}

json real_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

ProblemManifest::VectorSource vector_source(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::monostate{};
  const json& v = j.at(key);
  if (v.is_string()) return fs::path(v.get<std::string>());
  if (!v.is_array()) throw Error(Errc::parse, std::string("manifest field '") + key + "' must be array or path");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(json_real(e));
  return out;
}

json vector_source_json(const ProblemManifest::VectorSource& src) {
  if (const auto* vals = std::get_if<std::vector<double>>(&src)) {
    json arr = json::array();
    for (double v : *vals) arr.push_back(real_json(v));
    return arr;
  }
  if (const auto* path = std::get_if<fs::path>(&src)) return path->generic_string();
  return nullptr;
}

std::optional<fs::path> path_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw Error(Errc::parse, std::string("manifest field '") + key + "' must be a path");
  return fs::path(j.at(key).get<std::string>());
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

Vector load_vector(const ProblemManifest::VectorSource& src, const fs::path& base) {
  if (const auto* vals = std::get_if<std::vector<double>>(&src)) {
    return Eigen::Map<const Vector>(vals->data(), static_cast<Index>(vals->size()));
  }
  if (const auto* path = std::get_if<fs::path>(&src)) return load_vector_market(resolve(base, *path));
  return Vector();
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ProblemManifest ProblemManifest::from_json(const json& j, fs::path base_dir) {
  static const char* known[] = {"name", "H", "c", "A_eq", "b_eq", "A_ineq", "b_ineq",
                                "lb", "ub", "kinds", "c0", "metadata"};
  if (!j.is_object()) throw Error(Errc::parse, "manifest must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw Error(Errc::parse, "unknown manifest key '" + item.key() + "'");
  }
  ProblemManifest m;
  m.base_dir = std::move(base_dir);
  m.name = j.value("name", std::string());
  m.H = path_field(j, "H");
  m.A_eq = path_field(j, "A_eq");
  m.A_ineq = path_field(j, "A_ineq");
  m.c = vector_source(j, "c");
  m.b_eq = vector_source(j, "b_eq");
  m.b_ineq = vector_source(j, "b_ineq");
  m.lb = vector_source(j, "lb");
  m.ub = vector_source(j, "ub");
  if (j.contains("kinds") && !j.at("kinds").is_null()) {
    for (const auto& k : j.at("kinds")) m.kinds.push_back(parse_var_kind(k.get<std::string>()));
  }
  if (j.contains("c0")) m.c0 = json_real(j.at("c0"));
  if (j.contains("metadata")) m.metadata = j.at("metadata");
  return m;
}

json ProblemManifest::to_json() const {
  json j;
  j["name"] = name;
  j["H"] = H ? json(H->generic_string()) : json(nullptr);
  j["c"] = vector_source_json(c);
  j["A_eq"] = A_eq ? json(A_eq->generic_string()) : json(nullptr);
  j["b_eq"] = vector_source_json(b_eq);
  j["A_ineq"] = A_ineq ? json(A_ineq->generic_string()) : json(nullptr);
  j["b_ineq"] = vector_source_json(b_ineq);
  j["lb"] = vector_source_json(lb);
  j["ub"] = vector_source_json(ub);
  json kinds_json = json::array();
  for (auto k : kinds) kinds_json.push_back(to_string(k));
  j["kinds"] = kinds_json;
  j["c0"] = real_json(c0);
  j["metadata"] = metadata;
  return j;
}

ProblemManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
  return ProblemManifest::from_json(j, path.parent_path());
}

Lcqp load_problem(const ProblemManifest& m) {
  Lcqp p;
  p.name = m.name;
  const auto& base = m.base_dir;
  if (m.H) p.H = load_matrix_market(resolve(base, *m.H));
  if (m.A_eq) p.A_eq = load_matrix_market(resolve(base, *m.A_eq));
  if (m.A_ineq) p.A_ineq = load_matrix_market(resolve(base, *m.A_ineq));
  p.c = load_vector(m.c, base);
  p.b_eq = load_vector(m.b_eq, base);
  p.b_ineq = load_vector(m.b_ineq, base);
  p.lb = load_vector(m.lb, base);
  p.ub = load_vector(m.ub, base);
  p.kinds = m.kinds;
  p.c0 = m.c0;
  if (p.c.size() == 0 && p.H.rows() == 0) throw Error(Errc::dimension, "manifest needs H or c");
  finalize(p);
  return p;
}

Lcqp load_problem(const fs::path& manifest_path) { return load_problem(read_manifest(manifest_path)); }

void save_problem(const Lcqp& p, const fs::path& manifest_path, const json& metadata) {
  const fs::path dir = manifest_path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = manifest_path.stem().string();
  ProblemManifest m;
  m.name = p.name;
  auto write_matrix = [&](const SparseMatrix& a, const char* tag) -> std::optional<fs::path> {
    if (a.rows() == 0) return std::nullopt;
    fs::path file = stem + "." + tag + ".mtx";
    save_matrix_market(a, dir / file);
    return file;
  };
  m.H = write_matrix(p.H, "H");
  m.A_eq = write_matrix(p.A_eq, "A_eq");
  m.A_ineq = write_matrix(p.A_ineq, "A_ineq");
  m.c = to_std(p.c);
  if (p.num_eq() > 0) m.b_eq = to_std(p.b_eq);
  if (p.num_ineq() > 0) m.b_ineq = to_std(p.b_ineq);
  m.lb = to_std(p.lb);
  m.ub = to_std(p.ub);
  m.kinds = p.kinds;
  m.c0 = p.c0;
  m.metadata = metadata;
  std::ofstream out(manifest_path);
  if (!out) throw Error(Errc::io, "cannot write " + manifest_path.string());
  // nlohmann prints doubles with round-trip precision
  out << m.to_json().dump(2) << '\n';
}

// ---------------------------------------------------------------------------

namespace {

Vector row_inf_norms(const SparseMatrix& A) {
  Vector norms = Vector::Zero(A.rows());
  for (Index j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      norms[it.row()] = std::max(norms[it.row()], std::abs(it.value()));
    }
  }
  return norms;
}

Vector scale_rows(SparseMatrix& A, Vector& b) {
  Vector f = row_inf_norms(A);
  for (Index i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) f[i] = 1.0;
  }
  const Vector inv = f.cwiseInverse();
  A = inv.asDiagonal() * A;
  b = b.cwiseProduct(inv);
  return f;
}

}  // namespace

RowScaling row_scale(const Lcqp& problem) {
  RowScaling out{problem, {}, {}};
  out.eq_factors = scale_rows(out.problem.A_eq, out.problem.b_eq);
  out.ineq_factors = scale_rows(out.problem.A_ineq, out.problem.b_ineq);
  return out;
}

std::vector<Diagnostic> validate(const Lcqp& p, const ValidateOptions& options) {
  std::vector<Diagnostic> out;
  auto add = [&](Severity s, std::string code, std::string msg, std::optional<Index> idx = std::nullopt) {
    out.push_back({s, std::move(code), std::move(msg), idx});
  };
  const Index n = p.c.size();
  bool dims_ok = true;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) {
      add(Severity::error, "dimension", what);
      dims_ok = false;
    }
  };
  check(p.H.rows() == n && p.H.cols() == n, "H must be n x n with n = len(c)");
  check(p.A_eq.cols() == n || (p.A_eq.rows() == 0 && p.b_eq.size() == 0), "A_eq column count differs from n");
  check(p.A_eq.rows() == p.b_eq.size(), "A_eq rows differ from len(b_eq)");
  check(p.A_ineq.cols() == n || (p.A_ineq.rows() == 0 && p.b_ineq.size() == 0),
        "A_ineq column count differs from n");
  check(p.A_ineq.rows() == p.b_ineq.size(), "A_ineq rows differ from len(b_ineq)");
  check(p.lb.size() == n && p.ub.size() == n, "bound vectors must have length n");
  check(p.kinds.empty() || static_cast<Index>(p.kinds.size()) == n, "kinds must have length n");
  if (!dims_ok) return out;

  for (Index i = 0; i < n; ++i) {
    if (std::isnan(p.lb[i]) || std::isnan(p.ub[i])) {
      add(Severity::error, "bounds", "NaN bound at index " + std::to_string(i), i);
    } else if (p.lb[i] > p.ub[i]) {
      add(Severity::error, "bounds", "lb > ub at index " + std::to_string(i), i);
    }
  }
  const double defect = symmetry_defect(p.H);
  if (defect > options.symmetry_tol) {
    add(Severity::error, "symmetry", "H symmetry defect " + std::to_string(defect));
  }
  if (options.check_eigenvalues && n > 0 && n <= options.eigen_check_limit && defect <= options.symmetry_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(p.H), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (lmin < -1e-10 * scale) {
      add(Severity::warning, "not_psd", "H has negative eigenvalue " + std::to_string(lmin));
    }
  }
  return out;
}

}  // namespace racqp
