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

#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "racqp/problem.hpp"
#include "test_util.hpp"

using namespace racqp;
using racqp::testing::dense;
using racqp::testing::sparse;
using racqp::testing::TempDir;
using racqp::testing::vec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SparseMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

bool same(const SparseMatrix& a, const SparseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && Matrix(a) == Matrix(b);
}

}  // namespace

TEST_CASE("matrix market: identity coordinate file") {
  const auto m = parse("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1\n2 2 1\n");
  CHECK(m.rows() == 2);
  CHECK(m.nonZeros() == 2);
  CHECK(m.coeff(0, 0) == 1.0);
  CHECK(m.coeff(1, 1) == 1.0);
  CHECK(m.coeff(0, 1) == 0.0);
}

TEST_CASE("matrix market: symmetric storage is mirrored") {
  MatrixMarketHeader header;
  std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 3\n");
  const auto m = parse_matrix_market(in, &header);
  CHECK(header.symmetric);
  CHECK(m.coeff(1, 0) == 3.0);
  CHECK(m.coeff(0, 1) == 3.0);
  CHECK(m.nonZeros() == 2);
}

TEST_CASE("matrix market: out-of-range entry reports its line") {
  try {
    parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.code() == Errc::parse);
  }
}

TEST_CASE("matrix market: malformed inputs") {
  CHECK_THROWS_AS(parse("garbage\n"), ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1\n"), ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"), ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n"), ParseError);
}

TEST_CASE("matrix market: duplicates are summed and array format is column-major") {
  const auto m = parse("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2\n");
  CHECK(m.coeff(0, 0) == doctest::Approx(3.5));
  const auto a = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  CHECK(a.coeff(1, 0) == 2.0);
  CHECK(a.coeff(0, 1) == 3.0);
  const auto p = parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n");
  CHECK(p.coeff(0, 1) == 1.0);
}

TEST_CASE("matrix market: save then load round-trips exactly") {
  TempDir dir("mm");
  std::mt19937_64 rng(3);
  Matrix m = racqp::testing::random_matrix(5, 4, rng);
  m(2, 1) = 0.0;
  save_matrix_market(sparse(m), dir.path() / "m.mtx");
  CHECK(Matrix(load_matrix_market(dir.path() / "m.mtx")) == m);
  const Vector v = vec({0.1, -1.0 / 3.0, 1e-300});
  save_vector_market(v, dir.path() / "v.mtx");
  CHECK(load_vector_market(dir.path() / "v.mtx") == v);
  CHECK_THROWS_AS(load_matrix_market(dir.path() / "missing.mtx"), Error);
}

TEST_CASE("load_problem: H only gives an unconstrained free problem") {
  TempDir dir("manifest");
  write_file(dir.path() / "H.mtx", "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 2 2\n");
  write_file(dir.path() / "p.json", R"({"name": "tiny", "H": "H.mtx", "c": [-2, -2]})");
  const Lcqp p = load_problem(dir.path() / "p.json");
  CHECK(p.num_vars() == 2);
  CHECK(p.num_eq() == 0);
  CHECK(p.num_ineq() == 0);
  CHECK(p.A_eq.cols() == 2);
  CHECK(p.lb[0] == -kInf);
  CHECK(p.ub[1] == kInf);
  CHECK(p.name == "tiny");
}

TEST_CASE("load_problem: binary kinds clip bounds to [0, 1]") {
  TempDir dir("manifest");
  write_file(dir.path() / "p.json",
             R"({"c": [1, 1, 1], "kinds": ["binary", "continuous", "B"], "lb": ["-inf", -5, -2], "ub": [3, "inf", 0.5]})");
  const Lcqp p = load_problem(dir.path() / "p.json");
  CHECK(p.lb[0] == 0.0);
  CHECK(p.ub[0] == 1.0);
  CHECK(p.lb[1] == -5.0);
  CHECK(p.ub[1] == kInf);
  CHECK(p.lb[2] == 0.0);
  CHECK(p.ub[2] == 0.5);
  CHECK(p.has_integers());
}

TEST_CASE("load_problem: error paths") {
  TempDir dir("manifest");
  write_file(dir.path() / "A.mtx", "%%MatrixMarket matrix coordinate real general\n1 2 2\n1 1 1\n1 2 1\n");
  write_file(dir.path() / "bad_rhs.json", R"({"c": [0, 0], "A_eq": "A.mtx", "b_eq": [1, 2]})");
  CHECK_THROWS_AS(load_problem(dir.path() / "bad_rhs.json"), Error);
  write_file(dir.path() / "H.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n2 1 2\n");
  write_file(dir.path() / "asym.json", R"({"H": "H.mtx", "c": [0, 0]})");
  try {
    load_problem(dir.path() / "asym.json");
    FAIL("expected asymmetric error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::asymmetric);
  }
  write_file(dir.path() / "unknown.json", R"({"c": [0], "bogus": 1})");
  CHECK_THROWS_AS(load_problem(dir.path() / "unknown.json"), Error);
  CHECK_THROWS_AS(load_problem(dir.path() / "nope.json"), Error);
}

TEST_CASE("save -> load -> save round-trips bit-identically") {
  TempDir dir("roundtrip");
  std::mt19937_64 rng(11);
  Lcqp p;
  p.name = "rt";
  const Matrix h = racqp::testing::random_spd(4, rng);
  p.H = sparse(h);
  p.c = racqp::testing::random_matrix(4, 1, rng);
  p.A_eq = sparse(racqp::testing::random_matrix(2, 4, rng));
  p.b_eq = racqp::testing::random_matrix(2, 1, rng);
  p.A_ineq = sparse(racqp::testing::random_matrix(1, 4, rng));
  p.b_ineq = vec({0.7});
  p.lb = vec({-kInf, 0.0, -1.0 / 3.0, 0.0});
  p.ub = vec({kInf, 1.0, 2.0 / 7.0, 1.0});
  p.kinds = {VarKind::continuous, VarKind::continuous, VarKind::continuous, VarKind::binary};
  p.c0 = 0.1;
  finalize(p);
  save_problem(p, dir.path() / "a.json");
  const Lcqp q = load_problem(dir.path() / "a.json");
  CHECK(same(p.H, q.H));
  CHECK(same(p.A_eq, q.A_eq));
  CHECK(same(p.A_ineq, q.A_ineq));
  CHECK(p.c == q.c);
  CHECK(p.b_eq == q.b_eq);
  CHECK(p.b_ineq == q.b_ineq);
  CHECK(p.lb == q.lb);
  CHECK(p.ub == q.ub);
  CHECK(p.kinds == q.kinds);
  CHECK(p.c0 == q.c0);
  save_problem(q, dir.path() / "b.json");
  const Lcqp r = load_problem(dir.path() / "b.json");
  CHECK(same(q.H, r.H));
  CHECK(q.c == r.c);
}

TEST_CASE("row_scale examples") {
  Lcqp p;
  p.c = Vector::Zero(2);
  p.A_eq = sparse(dense({{2, 4}, {0, 0}}));
  p.b_eq = vec({8, 0});
  p.A_ineq = sparse(dense({{1, -1}}));
  p.b_ineq = vec({3});
  finalize(p);
  const RowScaling s = row_scale(p);
  CHECK(Matrix(s.problem.A_eq) == dense({{0.5, 1}, {0, 0}}));
  CHECK(s.problem.b_eq == vec({2, 0}));
  CHECK(s.eq_factors == vec({4, 1}));
  CHECK(Matrix(s.problem.A_ineq) == Matrix(p.A_ineq));
  CHECK(s.problem.b_ineq == p.b_ineq);
  CHECK(s.ineq_factors == vec({1}));
}

TEST_CASE("row_scale preserves the feasible set") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    Lcqp p;
    p.c = Vector::Zero(3);
    Matrix ai = racqp::testing::random_matrix(3, 3, rng) * 7.0;
    p.A_ineq = sparse(ai);
    p.b_ineq = racqp::testing::random_matrix(3, 1, rng);
    Matrix ae = dense({{3, 0, -6}});
    p.A_eq = sparse(ae);
    p.b_eq = vec({0});
    finalize(p);
    const RowScaling s = row_scale(p);
    for (int k = 0; k < 200; ++k) {
      Vector x(3);
      x << u(rng), u(rng), 0.0;
      x[2] = x[0] / 2.0;  // on the equality
      auto feasible = [&](const Lcqp& q) {
        return ((q.A_eq * x - q.b_eq).cwiseAbs().maxCoeff() <= 1e-12) &&
               ((q.A_ineq * x - q.b_ineq).maxCoeff() <= 0.0);
      };
      CHECK(feasible(p) == feasible(s.problem));
    }
  }
}

TEST_CASE("validate examples") {
  Lcqp p;
  p.H = sparse(Matrix::Identity(5, 5));
  p.c = Vector::Zero(5);
  finalize(p);
  CHECK(validate(p).empty());

  Lcqp bad = p;
  bad.lb[3] = 2.0;
  bad.ub[3] = 1.0;
  const auto d = validate(bad);
  REQUIRE(d.size() == 1);
  CHECK(d[0].severity == Severity::error);
  CHECK(d[0].index == Index{3});
  CHECK(d[0].message.find('3') != std::string::npos);

  Lcqp asym;
  asym.H = sparse(dense({{1, 1}, {2, 1}}));
  asym.c = Vector::Zero(2);
  asym.A_eq.resize(0, 2);
  asym.A_ineq.resize(0, 2);
  asym.lb = Vector::Constant(2, -kInf);
  asym.ub = Vector::Constant(2, kInf);
  const auto ds = validate(asym);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "symmetry");

  Lcqp indefinite = p;
  indefinite.H = sparse(dense({{1, 2, 0, 0, 0}, {2, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}}));
  CHECK(validate(indefinite).empty());
  ValidateOptions eig;
  eig.check_eigenvalues = true;
  const auto de = validate(indefinite, eig);
  REQUIRE(de.size() == 1);
  CHECK(de[0].severity == Severity::warning);
}

TEST_CASE("objective includes the offset and the one-half factor") {
  Lcqp p = make_unconstrained(sparse(dense({{2, 0}, {0, 4}})), vec({1, -1}));
  p.c0 = 3.0;
  CHECK(p.objective(vec({1, 1})) == doctest::Approx(0.5 * 6 + 0 + 3));
}
