// Copyright 2026 The mfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "mfc/distributions.h"
#include "mfc/random.h"

using namespace mfc;

namespace {

// Counting oracle kept independent of the library: a map from (x, k) to
// the number of agents, divided by N_pop at the end.
std::map<std::pair<int, int>, double> count_oracle(
    const std::vector<std::vector<int>>& states) {
  std::map<std::pair<int, int>, double> out;
  double total = 0;
  for (size_t k = 0; k < states.size(); ++k) {
    for (int x : states[k]) {
      out[{x, static_cast<int>(k)}] += 1;
      total += 1;
    }
  }
  for (auto& [key, v] : out) v /= total;
  return out;
}

std::vector<std::vector<int>> random_states(const ClassWeights& w, int nx,
                                            Rng& rng) {
  std::vector<std::vector<int>> s(w.nk());
  for (int k = 0; k < w.nk(); ++k) {
    for (int64_t j = 0; j < w.pop(k); ++j) s[k].push_back(rng() % nx);
  }
  return s;
}

}  // namespace

TEST_CASE("empirical joint counts agents") {
  const ClassWeights w({2, 2});
  const JointDist mu = empirical_joint_state({{0, 1}, {1, 1}}, w, 2);
  CHECK(mu(0, 0) == 0.25);
  CHECK(mu(1, 0) == 0.25);
  CHECK(mu(1, 1) == 0.5);
  CHECK(mu(0, 1) == 0.0);

  const JointDist single = empirical_joint_state({{0}}, ClassWeights({1}), 1);
  CHECK(single == JointDist::dirac(1, 1, 0, 0));

  const JointDist three =
      empirical_joint_state({{0, 0, 2}, {1}}, ClassWeights({3, 1}), 3);
  CHECK(three(0, 0) == 0.5);
  CHECK(three(2, 0) == 0.25);
  CHECK(three(1, 1) == 0.25);
}

TEST_CASE("empirical joint matches the counting oracle") {
  Rng rng = make_rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int nk = 1 + rng() % 3, nx = 1 + rng() % 4;
    std::vector<int64_t> pops(nk);
    for (auto& p : pops) p = 1 + rng() % 6;
    const ClassWeights w(pops);
    const auto states = random_states(w, nx, rng);
    const JointDist mu = empirical_joint_state(states, w, nx);
    const auto oracle = count_oracle(states);
    for (int x = 0; x < nx; ++x) {
      for (int k = 0; k < nk; ++k) {
        const auto it = oracle.find({x, k});
        CHECK(mu(x, k) == doctest::Approx(it == oracle.end() ? 0.0 : it->second)
                              .epsilon(1e-15));
      }
    }
    CHECK(l1_distance(joint_to_class(mu, w),
                      empirical_class_state(states, w, nx)) < 1e-12);
  }
}

TEST_CASE("empirical constructors reject bad input") {
  const ClassWeights w({2});
  try {
    empirical_joint_state({{0, 5}}, w, 2);
    FAIL("expected InvalidState");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidState);
  }
  try {
    empirical_class_state({{0}}, w, 2);
    FAIL("expected PopulationMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kPopulationMismatch);
  }
}

TEST_CASE("empirical class rows") {
  const ClassDistCollection bar =
      empirical_class_state({{0, 1}, {1, 1}}, ClassWeights({2, 2}), 2);
  CHECK(bar(0, 0) == 0.5);
  CHECK(bar(1, 0) == 0.5);
  CHECK(bar(0, 1) == 0.0);
  CHECK(bar(1, 1) == 1.0);
  const ClassDistCollection both =
      empirical_class_state({{0}, {0}}, ClassWeights({1, 1}), 2);
  CHECK(both(0, 0) == 1.0);
  CHECK(both(0, 1) == 1.0);
}

TEST_CASE("joint and class conversions") {
  const JointDist mu(2, 2, {0.5, 0.0, 0.0, 0.5});
  const ClassWeights half({1, 1});
  const ClassDistCollection bar = joint_to_class(mu, half);
  CHECK(bar(0, 0) == 1.0);
  CHECK(bar(1, 1) == 1.0);
  CHECK(class_to_joint(bar, half) == mu);

  const JointDist one(3, 1, {0.2, 0.3, 0.5});
  const ClassDistCollection row = joint_to_class(one, ClassWeights({4}));
  for (int x = 0; x < 3; ++x) CHECK(row(x, 0) == one(x, 0));

  try {
    joint_to_class(mu, ClassWeights({1, 3}));
    FAIL("expected ThetaIncompatible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kThetaIncompatible);
  }

  Rng rng = make_rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const ClassWeights w({1 + static_cast<int64_t>(rng() % 9),
                          1 + static_cast<int64_t>(rng() % 9), 3});
    std::vector<double> v;
    for (int k = 0; k < 3; ++k) {
      const auto r = sample_dirichlet(4, 1.0, rng);
      v.insert(v.end(), r.begin(), r.end());
    }
    const ClassDistCollection b(4, 3, v);
    const JointDist j = class_to_joint(b, w);
    const ClassDistCollection back = joint_to_class(j, w);
    CHECK(l1_distance(back, b) < 1e-12);
    CHECK(l1_distance(class_to_joint(back, w), j) < 1e-12);
  }
}

TEST_CASE("marginals") {
  const JointDist one(3, 1, {0.2, 0.3, 0.5});
  const MarginalDist m = marginal(one);
  for (int x = 0; x < 3; ++x) CHECK(m(x) == one(x, 0));
  CHECK(marginal(JointDist::uniform(2, 2)) == MarginalDist::uniform(2));

  Rng rng = make_rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const JointDist a(3, 2, sample_dirichlet(6, 0.5, rng));
    const JointDist b(3, 2, sample_dirichlet(6, 0.5, rng));
    const MarginalDist ma = marginal(a);
    double total = 0;
    for (double v : ma.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l1_distance(marginal(a), marginal(b)) <= l1_distance(a, b) + 1e-15);
  }
}

TEST_CASE("l1 distance") {
  const MarginalDist a = MarginalDist::dirac(2, 0), b = MarginalDist::dirac(2, 1);
  CHECK(l1_distance(a, a) == 0.0);
  CHECK(l1_distance(a, b) == 2.0);
  CHECK_THROWS_AS(l1_distance(MarginalDist::uniform(2), MarginalDist::uniform(3)),
                  Error);
  Rng rng = make_rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const MarginalDist x(sample_dirichlet(5, 1.0, rng));
    const MarginalDist y(sample_dirichlet(5, 1.0, rng));
    const MarginalDist z(sample_dirichlet(5, 1.0, rng));
    CHECK(l1_distance(x, z) <= l1_distance(x, y) + l1_distance(y, z) + 1e-15);
  }
}

TEST_CASE("normalization tolerances") {
  // Within 1e-12 values are kept verbatim, small drift is renormalized and
  // anything larger is rejected.
  std::vector<double> exact = {0.5, 0.5 + 1e-13};
  normalize_in_place(exact, "t");
  CHECK(exact[1] == 0.5 + 1e-13);
  std::vector<double> drift = {0.5, 0.5 + 1e-10};
  normalize_in_place(drift, "t");
  CHECK(drift[0] + drift[1] == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> bad = {0.5, 0.6};
  CHECK_THROWS_AS(normalize_in_place(bad, "t"), Error);
  std::vector<double> negative = {1.5, -0.5};
  CHECK_THROWS_AS(normalize_in_place(negative, "t"), Error);
}

TEST_CASE("json round trip") {
  const JointDist mu(2, 2, {0.1, 0.2, 0.3, 0.4});
  CHECK(from_json<JointDist>(to_json(mu)) == mu);
  const ClassDistCollection bar(2, 2, {0.25, 0.75, 1.0, 0.0});
  CHECK(from_json<ClassDistCollection>(to_json(bar)) == bar);
  const ActionMarginalDist m({0.5, 0.5});
  CHECK(from_json<ActionMarginalDist>(to_json(m)) == m);
  CHECK_THROWS_AS(from_json<ClassDistCollection>(to_json(mu)), Error);
}

TEST_CASE("class weights") {
  const ClassWeights w({9, 1});
  CHECK(w.total() == 10);
  CHECK(w.theta(0) == doctest::Approx(0.9));
  CHECK(w.theta_max_inverse() == doctest::Approx(10.0));
}
