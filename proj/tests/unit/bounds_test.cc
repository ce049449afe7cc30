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

#include <cmath>
#include <vector>

#include "mfc/bounds.h"
#include "mfc/builtin_envs.h"
#include "mfc/random.h"

using namespace mfc;

namespace {

BoundConstants make(double m, double lr, double lp, double lq, double g,
                    int nx, int nu, std::vector<int64_t> pops) {
  BoundConstants c;
  c.m_r = m;
  c.l_r = lr;
  c.l_p = lp;
  c.l_q = lq;
  c.gamma = g;
  c.nx = nx;
  c.nu = nu;
  c.pops = std::move(pops);
  return c;
}

bool throws_kind(ErrorKind kind, double (*f)(const BoundConstants&),
                 const BoundConstants& c) {
  try {
    f(c);
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

BoundConstants random_constants(Rng& rng, std::vector<int64_t> pops) {
  auto u = [&](double hi) { return hi * uniform01(rng); };
  return make(u(2.0), u(1.0), u(0.3), u(0.3), u(0.9),
              1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6),
              std::move(pops));
}

}  // namespace

// Reference values below were evaluated by hand (double precision) from the
// closed forms, independently of the library.
TEST_CASE("hand-evaluated bound values") {
  BoundConstants c = make(1, 0.5, 0.2, 0.1, 0.5, 4, 4, {100, 300});
  CHECK(std::fabs(theorem1_bound(c) - 5.79422442105233) < 1e-12);
  CHECK(std::fabs(theorem3_bound(c) - 5.348893513114596) < 1e-12);
  CHECK(throws_kind(ErrorKind::kBoundInvalid, theorem2_bound, c));

  BoundConstants d = make(1, 0.05, 0.02, 0.01, 0.5, 3, 2, {90, 10});
  CHECK(std::fabs(theorem1_bound(d) - 1.8391953178061413) < 1e-12);
  CHECK(std::fabs(theorem2_bound(d) - 7.375207788454054) < 1e-12);
  CHECK(std::fabs(theorem3_bound(d) - 1.7479622876468899) < 1e-12);
  CHECK(std::fabs(loose_bound_joint_via_class(d) - 7.375207788454054) < 1e-12);
}

TEST_CASE("theta = (0.9, 0.1) inflates the L constants tenfold") {
  BoundConstants d = make(1, 0.05, 0.02, 0.01, 0.5, 3, 2, {90, 10});
  CHECK(d.theta_max_inverse() == doctest::Approx(10.0));
  BoundConstants t = d.theta_inflated();
  CHECK(t.l_r == doctest::Approx(0.5));
  CHECK(t.l_p == doctest::Approx(0.2));
  CHECK(t.l_q == doctest::Approx(0.1));
  CHECK(t.m_r == 1.0);
  CHECK(std::fabs(loose_bound_class_via_joint(d) - 6.643060057120312) < 1e-12);
  // Inflating past validity is reported, not silently evaluated.
  BoundConstants c = make(1, 0.5, 0.2, 0.1, 0.5, 4, 4, {100, 300});
  CHECK(throws_kind(ErrorKind::kBoundInvalid, loose_bound_class_via_joint, c));
}

TEST_CASE("trivial constant sets") {
  BoundConstants c = make(1, 0, 0, 0, 0, 3, 5, {4, 9, 16});
  const double pop = (2.0 + 3.0 + 4.0) / 29.0;
  CHECK(theorem1_bound(c) == doctest::Approx(std::sqrt(5.0) * pop).epsilon(1e-14));
  CHECK(theorem2_bound(c) ==
        doctest::Approx(std::sqrt(15.0) * (0.5 + 1.0 / 3 + 0.25)).epsilon(1e-14));
  BoundConstants q = make(2, 0.3, 0.4, 0, 0.5, 2, 2, {10});
  CHECK(q.s_r_second() == q.l_r);
  CHECK(q.s_p_second() == q.l_p);
}

TEST_CASE("unit S_P uses the analytic limit") {
  CHECK(geometric_factor(2.0, 1.0, 0.5) == doctest::Approx(4.0));
  CHECK(geometric_factor(2.0, 1.0 + 1e-12, 0.5) == doctest::Approx(4.0));
  // Just outside the switch the closed form is still close to the limit.
  CHECK(geometric_factor(2.0, 1.0 + 1e-6, 0.5) == doctest::Approx(4.0).epsilon(1e-4));
  BoundConstants c = make(1, 0.3, 0, 0, 0.5, 2, 3, {25});
  CHECK(c.s_p() == 1.0);
  CHECK(std::fabs(theorem1_bound(c) - 4.036013290698284) < 1e-12);
}

TEST_CASE("population scaling") {
  BoundConstants c = make(1, 0.2, 0.1, 0.05, 0.5, 3, 3, {100});
  BoundConstants c4 = c;
  c4.pops = {400};
  CHECK(theorem1_bound(c) / theorem1_bound(c4) == doctest::Approx(2.0));
  CHECK(theorem3_bound(c) / theorem3_bound(c4) == doctest::Approx(2.0));
  // Equal classes at fixed N_pop: bound grows like sqrt(K).
  BoundConstants k4 = c4;
  k4.pops = {100, 100, 100, 100};
  CHECK(theorem1_bound(k4) / theorem1_bound(c4) == doctest::Approx(2.0));
}

TEST_CASE("single class: translations coincide with the direct theorems") {
  Rng rng = make_rng(3);
  for (int i = 0; i < 200; ++i) {
    BoundConstants c = random_constants(rng, {1 + static_cast<int64_t>(rng() % 500)});
    if (!c.valid_joint()) continue;
    CHECK(loose_bound_class_via_joint(c) == theorem1_bound(c));
    CHECK(loose_bound_joint_via_class(c) == theorem2_bound(c));
    // K = 1: the second terms agree; the first differs by sqrt(|X|).
    const double first1 = c.c_r() / (1 - c.gamma) * std::sqrt(1.0 * c.nu) /
                          std::sqrt(1.0 * c.pops[0]);
    CHECK(theorem2_bound(c) - std::sqrt(1.0 * c.nx) * first1 ==
          doctest::Approx(theorem1_bound(c) - first1).epsilon(1e-10));
  }
}

TEST_CASE("orderings over random constant sets") {
  Rng rng = make_rng(4);
  int t2_checked = 0, t3_checked = 0, jvc_checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const int k = 1 + static_cast<int>(rng() % 4);
    const int64_t n = 1 + static_cast<int64_t>(rng() % 300);
    BoundConstants c = random_constants(rng, std::vector<int64_t>(k, n));
    if (c.valid_joint()) {
      CHECK(theorem3_bound(c) <= theorem1_bound(c) * (1 + 1e-12));
      ++t3_checked;
    }
    if (c.valid_class()) {
      CHECK(theorem2_bound(c) >= theorem1_bound(c) * (1 - 1e-12));
      CHECK(loose_bound_joint_via_class(c) >= theorem1_bound(c) * (1 - 1e-12));
      ++t2_checked;
      ++jvc_checked;
    }
  }
  CHECK(t3_checked >= 1000);
  CHECK(t2_checked >= 1000);
  CHECK(jvc_checked >= 1000);
}

TEST_CASE("monotone in every constant") {
  Rng rng = make_rng(5);
  for (int i = 0; i < 500; ++i) {
    BoundConstants c = random_constants(rng, {20, 30});
    if (!c.valid_joint()) continue;
    BoundConstants d = c;
    d.m_r += 0.1;
    d.l_r += 0.05;
    d.l_q += 0.01;
    if (!d.valid_joint()) continue;
    CHECK(theorem1_bound(d) >= theorem1_bound(c));
    CHECK(theorem3_bound(d) >= theorem3_bound(c));
  }
}

TEST_CASE("validation errors") {
  BoundConstants c = make(1, 0, 0, 0, 0.5, 2, 2, {10});
  c.gamma = 1.0;
  CHECK(throws_kind(ErrorKind::kInvalidDiscount, theorem1_bound, c));
  c.gamma = 0.5;
  c.l_r = -1;
  CHECK(throws_kind(ErrorKind::kConfigError, theorem1_bound, c));
  c.l_r = 0;
  c.pops = {0};
  CHECK(throws_kind(ErrorKind::kPopulationMismatch, theorem1_bound, c));
  BoundConstants big = make(1, 1, 1, 1, 0.9, 2, 2, {10});
  CHECK(!big.valid_joint());
  CHECK(throws_kind(ErrorKind::kBoundInvalid, theorem1_bound, big));
  CHECK(throws_kind(ErrorKind::kBoundInvalid, theorem3_bound, big));
}

TEST_CASE("measure_gap on the constant env") {
  EnvSpec env = make_constant_env(3, 2, 2, 0.5, 0.5);
  FixedPolicy pi = FixedPolicy::uniform(env);
  AgentState x0 = AgentState::round_robin(ClassWeights({3, 4}), 3);
  GapReport r = measure_gap(env, pi, x0, x0.empirical_joint(), 20, 1e-10, 1);
  CHECK(r.gap < 1e-9);
  CHECK(r.theorem == "theorem1");
  CHECK(r.bound_valid);
  CHECK(r.within_bound());
  CHECK(r.gap_ci_half >= 0.0);

  EnvSpec cls = make_constant_env(3, 2, 2, 0.5, 0.5, Regime::kClass);
  GapReport rc = measure_gap(cls, FixedPolicy::uniform(cls), x0,
                             x0.empirical_class(), 20, 1e-10, 1);
  CHECK(rc.gap < 1e-9);
  CHECK(rc.theorem == "theorem2");
}

TEST_CASE("measure_gap rejects a mismatched initial distribution") {
  EnvSpec env = make_constant_env(3, 2, 2, 0.5, 0.5);
  AgentState x0 = AgentState::round_robin(ClassWeights({3, 4}), 3);
  try {
    measure_gap(env, FixedPolicy::uniform(env), x0, JointDist::uniform(3, 2),
                20, 1e-6, 1);
    FAIL("expected InitMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInitMismatch);
  }
}

TEST_CASE("measure_gap stays under the bound on a small congestion system") {
  CongestionParams cp;
  EnvSpec env = make_congestion_env(cp);
  FixedPolicy pi = FixedPolicy::uniform(env);
  AgentState x0 = AgentState::round_robin(ClassWeights({10, 10}), 4);
  GapReport r = measure_gap(env, pi, x0, x0.empirical_joint(), 2000, 1e-4, 9);
  CHECK(r.bound_valid);
  CHECK(r.gap > 0.0);
  CHECK(r.within_bound());
}

TEST_CASE("loglog slope") {
  std::vector<double> x = {10, 100, 1000}, y;
  for (double v : x) y.push_back(3.0 / std::sqrt(v));
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5));
}
