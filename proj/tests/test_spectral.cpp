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

#include "doctest.h"
#include "racqp/linalg.hpp"
#include "racqp/spectral.hpp"
#include "test_util.hpp"

using namespace racqp;
using namespace racqp::testing;

namespace {

// Frozen from an independent NumPy enumeration of all 90 update combinations.
constexpr double kRhoRac = 0.821548;
constexpr double kRhoRp = 0.988707;
constexpr double kRhoTRac = 1.094835;
constexpr double kRhoTRp = 0.985183;

const BlockPartition kPairs{{0, 1}, {2, 3}, {4, 5}};

Matrix zeros(Index n) { return Matrix::Zero(n, n); }

}  // namespace

TEST_CASE("build_mapping: one variable") {
  const MappingSet ms = build_mapping(dense({{2}}), dense({{1}}), 1.0, {{0}}, {0});
  CHECK(ms.L(0, 0) == 3.0);
  CHECK((ms.M - dense({{0, 1.0 / 3.0}, {0, 2.0 / 3.0}})).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(spectral_radius(ms.M) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("build_mapping: single block and reversed orders") {
  std::mt19937_64 rng(4);
  const Matrix H = random_spd(4, rng, 0.1), A = random_matrix(3, 4, rng);
  const MappingSet one = build_mapping(H, A, 1.3, {{0, 1, 2, 3}}, {0});
  CHECK((one.L - (H + 1.3 * A.transpose() * A)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(one.R.cwiseAbs().maxCoeff() < 1e-14);

  const BlockPartition part{{0, 2}, {1, 3}};
  const MappingSet fwd = build_mapping(H, A, 1.3, part, {0, 1});
  const MappingSet rev = build_mapping(H, A, 1.3, part, {1, 0});
  CHECK((fwd.L.transpose() - rev.L).cwiseAbs().maxCoeff() < 1e-14);
  // M solves Lbar M = Rbar.
  CHECK((fwd.L_bar * fwd.M - fwd.R_bar).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("check_assumption1") {
  std::mt19937_64 rng(2);
  const Matrix A = random_matrix(3, 4, rng);
  for (char ok : check_assumption1(Matrix::Identity(4, 4), A, 0.5, {{0, 1}, {2, 3}})) CHECK(ok);

  Matrix Az = A;
  Az.col(2).setZero();
  const auto flags = check_assumption1(zeros(4), Az, 1.0, {{0}, {1}, {2}, {3}});
  CHECK(flags == std::vector<char>{1, 1, 0, 1});

  const Matrix sq = divergence_example_matrix();
  for (char ok : check_assumption1(zeros(6), sq, 1.0, {{0}, {1}, {2}, {3}, {4}, {5}})) CHECK(ok);
  CHECK_THROWS_AS(build_mapping(zeros(4), Az, 1.0, {{0}, {1}, {2}, {3}}, {0, 1, 2, 3}),
                  BlockNotPositiveDefinite);
}

TEST_CASE("expected_Q") {
  SUBCASE("p = 1 is the inverse of S") {
    std::mt19937_64 rng(3);
    const Matrix H = random_spd(3, rng), A = random_matrix(2, 3, rng);
    const ExpectedQ q = expected_Q(H, A, 2.0, 1);
    const Matrix S = H + 2.0 * A.transpose() * A;
    CHECK((q.Q - S.inverse()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(q.terms == 1);
  }
  SUBCASE("two singleton blocks by hand") {
    // S = [[2,1],[1,3]]; the two triangular inverses average to [[1/2,-1/12],[-1/12,1/3]].
    const ExpectedQ q = expected_Q(Matrix::Identity(2, 2), dense({{1, 1}, {0, 1}}), 1.0, 2);
    CHECK((q.Q - dense({{0.5, -1.0 / 12}, {-1.0 / 12, 1.0 / 3}})).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(q.terms == 2);
  }
  SUBCASE("six variables in three blocks average 90 combinations") {
    const ExpectedQ q = expected_Q(zeros(6), divergence_example_matrix(), 1.0, 3);
    CHECK(q.terms == 90);
    CHECK(q.exact);
    CHECK(q.max_partition_asymmetry < 1e-10);
  }
  SUBCASE("cap exceeded without sampling") {
    ExpectationOptions o;
    o.cap = 10;
    CHECK_THROWS_AS(expected_Q(zeros(6), divergence_example_matrix(), 1.0, 3, o), Error);
    o.samples = 2000;
    const ExpectedQ mc = expected_Q(zeros(6), divergence_example_matrix(), 1.0, 3, o);
    const ExpectedQ ex = expected_Q(zeros(6), divergence_example_matrix(), 1.0, 3);
    CHECK_FALSE(mc.exact);
    CHECK((mc.Q - ex.Q).cwiseAbs().maxCoeff() < 0.2 * ex.Q.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("expected_M: closed form equals the direct average") {
  SUBCASE("one variable") {
    const Matrix M = expected_M(dense({{2}}), dense({{1}}), 1.0, 1);
    CHECK((M - dense({{0, 1.0 / 3.0}, {0, 2.0 / 3.0}})).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("random instances") {
    std::mt19937_64 rng(17);
    const std::pair<Index, Index> shapes[] = {{4, 2}, {4, 4}, {6, 2}, {6, 3}, {4, 1}};
    for (const auto& [n, p] : shapes) {
      const Matrix H = random_spd(n, rng, 0.2), A = random_matrix(n / 2, n, rng);
      const Matrix closed = expected_M(H, A, 0.8, p);
      const Matrix direct = average_M(H, A, 0.8, p);
      CHECK((closed - direct).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  SUBCASE("divergence example") {
    const Matrix A = divergence_example_matrix();
    CHECK(spectral_radius(expected_M(zeros(6), A, 1.0, 3)) == doctest::Approx(0.8215).epsilon(1e-3 / 0.8215));
    CHECK(spectral_radius(expected_M(zeros(6), A, 1.0, 3)) == doctest::Approx(kRhoRac).epsilon(1e-5));
    const Matrix Mrp = mapping_from_Q(partition_Q(zeros(6), A, 1.0, kPairs), zeros(6), A, 1.0);
    CHECK(spectral_radius(Mrp) == doctest::Approx(0.9887).epsilon(1e-3 / 0.9887));
    CHECK(spectral_radius(Mrp) == doctest::Approx(kRhoRp).epsilon(1e-5));
  }
}

TEST_CASE("eig_QS_bound") {
  SUBCASE("p = 1 gives the identity") {
    std::mt19937_64 rng(5);
    const Matrix H = random_spd(4, rng), A = random_matrix(2, 4, rng);
    const Matrix S = H + A.transpose() * A;
    const EigRange r = eig_QS_bound(expected_Q(H, A, 1.0, 1).Q, S);
    CHECK(r.min == doctest::Approx(1.0));
    CHECK(r.max == doctest::Approx(1.0));
  }
  SUBCASE("random sweep stays inside [0, 4/3)") {
    std::mt19937_64 rng(99);
    const std::pair<Index, Index> shapes[] = {{4, 2}, {4, 4}, {6, 2}, {6, 3}, {6, 6}, {8, 2}, {8, 4}};
    int count = 0;
    for (int k = 0; k < 105; ++k) {
      const auto [n, p] = shapes[k % 7];
      const bool pd = k % 2 == 0;
      const Matrix G = random_matrix(n, n / 2, rng);
      const Matrix H = pd ? random_spd(n, rng, 0.05) : Matrix(G * G.transpose());
      const Matrix A = random_matrix(n / 2, n, rng);
      const Matrix S = H + A.transpose() * A;
      const EigRange r = eig_QS_bound(expected_Q(H, A, 1.0, p).Q, S);
      CAPTURE(k);
      CHECK(r.min >= -1e-9);
      CHECK(r.max < 4.0 / 3.0 - 1e-9);
      if (pd) CHECK(r.min > 0.0);
      ++count;
    }
    CHECK(count >= 100);
  }
}

TEST_CASE("almost_sure_rho") {
  const Matrix A = divergence_example_matrix();
  SUBCASE("divergence example") {
    const double rac = almost_sure_rho(zeros(6), A, 1.0, 3, SamplingMode::rac);
    const double rp = almost_sure_rho(zeros(6), A, 1.0, 3, SamplingMode::rp, &kPairs);
    CHECK(std::abs(rac - 1.0948) <= 1e-3);
    CHECK(std::abs(rp - 0.9852) <= 1e-3);
    CHECK(rac == doctest::Approx(kRhoTRac).epsilon(1e-5));
    CHECK(rp == doctest::Approx(kRhoTRp).epsilon(1e-5));
  }
  SUBCASE("power iteration on the cone matches the explicit Kronecker matrix") {
    KroneckerOptions o;
    o.explicit_limit = 0;
    CHECK(almost_sure_rho(zeros(6), A, 1.0, 3, SamplingMode::rac, nullptr, o) ==
          doctest::Approx(kRhoTRac).epsilon(1e-6));
    CHECK(almost_sure_rho(zeros(6), A, 1.0, 3, SamplingMode::rp, &kPairs, o) ==
          doctest::Approx(kRhoTRp).epsilon(1e-6));
  }
  SUBCASE("a single combination gives the squared radius") {
    std::mt19937_64 rng(8);
    const Matrix H = random_spd(3, rng), B = random_matrix(2, 3, rng);
    const double rho_m = spectral_radius(build_mapping(H, B, 1.0, {{0, 1, 2}}, {0}).M);
    CHECK(almost_sure_rho(H, B, 1.0, 1, SamplingMode::rac) == doctest::Approx(rho_m * rho_m).epsilon(1e-9));
  }
  SUBCASE("size cap") {
    KroneckerOptions o;
    o.max_dimension = 100;
    CHECK_THROWS_AS(almost_sure_rho(zeros(6), A, 1.0, 3, SamplingMode::rac, nullptr, o), Error);
  }
}

TEST_CASE("compare_rac_rp") {
  SUBCASE("divergence example: RAC has the smaller expected radius for every composition") {
    const RacRpComparison c = compare_rac_rp(zeros(6), divergence_example_matrix(), 1.0, 3);
    REQUIRE(c.rho_rp.size() == 15);
    CHECK(c.rac_better_everywhere);
    for (double r : c.rho_rp) {
      CHECK(r > 0.9867 - 1e-4);
      CHECK(r < 0.9946 + 1e-4);
    }
  }
  SUBCASE("p = 1 has a single composition with equal radii") {
    std::mt19937_64 rng(1);
    const Matrix A = random_matrix(3, 3, rng);
    const RacRpComparison c = compare_rac_rp(zeros(3), A, 1.0, 1);
    REQUIRE(c.rho_rp.size() == 1);
    CHECK(c.rho_rp[0] == doctest::Approx(c.rho_rac));
  }
  SUBCASE("random nonsingular A with H = 0: some composition is no better than RAC") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      const Matrix A = random_matrix(4, 4, rng);
      const RacRpComparison c = compare_rac_rp(zeros(4), A, 1.0, 2);
      CAPTURE(seed);
      CHECK(c.rp_not_better_somewhere);
    }
  }
}

TEST_CASE("simulate_iterates") {
  const Matrix A = divergence_example_matrix();
  SUBCASE("RP on the paired composition decays") {
    SimulationOptions o;
    o.mode = SamplingMode::rp;
    o.partition = kPairs;
    o.steps = 5000;
    const TrajectoryStats s = simulate_iterates(zeros(6), A, 1.0, 3, o);
    CHECK(s.max_final < 1e-6);
  }
  SUBCASE("RAC does not decay") {
    SimulationOptions o;
    o.steps = 1000;
    const TrajectoryStats s = simulate_iterates(zeros(6), A, 1.0, 3, o);
    CHECK(s.median[1000] >= s.median[0]);
    CHECK(s.median[1000] >= s.median[200]);
  }
  SUBCASE("strictly convex instance decays at the mapping radius") {
    const Matrix H = Matrix::Identity(2, 2), B = dense({{1, 1}});
    SimulationOptions o;
    o.mode = SamplingMode::rp;
    o.steps = 500;
    o.trials = 5;
    o.c = vec({1, -2});
    o.b = vec({0.5});
    // beta = 0.025 puts rho near 0.95 so 500 steps stay well above round-off.
    const TrajectoryStats s = simulate_iterates(H, B, 0.025, 1, o);
    const double rho = spectral_radius(expected_M(H, B, 0.025, 1));
    CHECK(rho == doctest::Approx(1.0 - 0.05 / 1.05));
    const double rate = std::pow(s.median[500] / s.median[0], 1.0 / 500.0);
    CHECK(rate <= 2.0 * rho);
    CHECK(rate >= 0.5 * rho);
    // The fixed point is the KKT pair: x = -(c - A'y) with A x = b.
    CHECK((B * s.z_star.head(2))(0) == doctest::Approx(0.5));
  }
}

TEST_CASE("analyze report") {
  AnalyzeOptions o;
  o.p = 3;
  o.rp_partition = kPairs;
  const SpectralReport r = analyze(zeros(6), divergence_example_matrix(), o);
  CHECK(r.rho_M == doctest::Approx(kRhoRac).epsilon(1e-5));
  CHECK(r.rho_T == doctest::Approx(kRhoTRac).epsilon(1e-5));
  CHECK(*r.rho_M_rp == doctest::Approx(kRhoRp).epsilon(1e-5));
  CHECK(*r.rho_T_rp == doctest::Approx(kRhoTRp).epsilon(1e-5));
  CHECK(r.expected_convergent);
  CHECK_FALSE(r.almost_sure_convergent);
  CHECK(r.rho_rp.size() == 15);
  const auto j = r.to_json();
  CHECK(j["rho_rp"].size() == 15);
  CHECK(j.contains("eig_QS"));

  Lcqp pb = make_unconstrained(sparse(zeros(2)), vec({0, 0}));
  pb.A_ineq = sparse(dense({{1, 1}}));
  pb.b_ineq = vec({1});
  finalize(pb);
  CHECK_THROWS_AS(spectral_inputs(pb), Error);
}
