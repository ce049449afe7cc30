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
#include <sstream>
#include <vector>

#include "mfc/builtin_envs.h"
#include "mfc/meanfield.h"
#include "mfc/policy.h"
#include "mfc/random.h"

using namespace mfc;

namespace {

// Straight double loop over (x, k, u) using only the public env and policy
// evaluators.
struct OracleStep {
  std::vector<double> nu;    // [u * nk + k]
  std::vector<double> next;  // [x * nk + k]
  std::vector<double> r;     // [k]
};

OracleStep oracle_step(const EnvSpec& env, const Policy& pi,
                       const JointDist& mu) {
  const int nx = env.nx(), nu = env.nu(), nk = env.nk();
  const std::vector<double> f = features_from_joint(pi.regime(), mu);
  std::vector<double> table(nk * nx * nu);
  OracleStep s{std::vector<double>(nu * nk, 0.0),
               std::vector<double>(nx * nk, 0.0), std::vector<double>(nk, 0.0)};
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      pi.probs(k, x, f, std::span<double>(table).subspan((k * nx + x) * nu, nu));
      for (int u = 0; u < nu; ++u) {
        s.nu[u * nk + k] += mu(x, k) * table[(k * nx + x) * nu + u];
      }
    }
  }
  ActionJointDist nu_dist(nu, nk, s.nu);
  RegimeArgs args = make_regime_args(env, mu, nu_dist);
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      for (int u = 0; u < nu; ++u) {
        const double w = mu(x, k) * table[(k * nx + x) * nu + u];
        s.r[k] += w * reward_eval(env, k, x, u, args);
        MarginalDist p = transition_dist(env, k, x, u, args);
        for (int y = 0; y < nx; ++y) s.next[y * nk + k] += w * p(y);
      }
    }
  }
  return s;
}

JointDist random_joint(int nx, int nk, Rng& rng) {
  return JointDist(nx, nk, sample_dirichlet(nx * nk, 1.0, rng));
}

ClassDistCollection random_bar(int nx, int nk, Rng& rng) {
  std::vector<double> v;
  for (int k = 0; k < nk; ++k) {
    std::vector<double> row = sample_dirichlet(nx, 1.0, rng);
    v.insert(v.end(), row.begin(), row.end());
  }
  return ClassDistCollection(nx, nk, v);
}

}  // namespace

TEST_CASE("mean-field step matches the double-loop oracle") {
  CongestionParams cp;
  std::vector<EnvSpec> envs = {make_congestion_env(cp),
                               make_marginal_congestion_env(cp)};
  Rng rng = make_rng(1);
  for (const EnvSpec& env : envs) {
    CAPTURE(env.name());
    for (int i = 0; i < 50; ++i) {
      Regime pr = env.regime();
      SoftmaxPolicy pi(PolicyParams::random(PolicyArch{pr, 2, 4, 4}, 1.0, 1.0, rng));
      JointDist mu = random_joint(4, 2, rng);
      MFStep s = mf_step(env, pi, mu);
      OracleStep o = oracle_step(env, pi, mu);
      for (size_t j = 0; j < o.nu.size(); ++j) {
        CHECK(s.nu.values()[j] == doctest::Approx(o.nu[j]).epsilon(1e-12));
      }
      for (size_t j = 0; j < o.next.size(); ++j) {
        CHECK(s.next.values()[j] == doctest::Approx(o.next[j]).epsilon(1e-12));
      }
      for (int k = 0; k < 2; ++k) {
        CHECK(s.rewards[k] == doctest::Approx(o.r[k]).epsilon(1e-12));
      }
      CHECK(l1_distance(p_mf(env, pi, mu), s.next) == 0.0);
    }
  }
}

TEST_CASE("class mass is conserved by the joint map") {
  EnvSpec env = make_congestion_env(CongestionParams{});
  FixedPolicy pi = FixedPolicy::uniform(env);
  Rng rng = make_rng(2);
  JointDist mu = random_joint(4, 2, rng);
  const std::vector<double> mass = mu.class_masses();
  MFTrajectory traj = mf_rollout(env, pi, mu, 25);
  CHECK(traj.horizon() == 25);
  for (const JointDist& m : traj.mu) {
    for (int k = 0; k < 2; ++k) {
      CHECK(m.class_mass(k) == doctest::Approx(mass[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant env values") {
  const double c = 0.7, gamma = 0.5, tol = 1e-10;
  EnvSpec joint = make_constant_env(3, 2, 2, c, gamma);
  FixedPolicy pj = FixedPolicy::uniform(joint);
  Rng rng = make_rng(3);
  MFValue v = v_mf(joint, pj, random_joint(3, 2, rng), tol);
  CHECK(std::fabs(v.value - c / (1 - gamma)) < tol);
  // K M_R gamma^{T+1} / (1 - gamma) < tol picks T by hand.
  int t = 0;
  while (2 * c * std::pow(gamma, t + 1) / (1 - gamma) >= tol) ++t;
  CHECK(v.horizon == t);

  EnvSpec cls = make_constant_env(3, 2, 2, c, gamma, Regime::kClass);
  FixedPolicy pc = FixedPolicy::uniform(cls);
  MFValue vb = v_mf_bar(cls, pc, random_bar(3, 2, rng), ClassWeights({2, 7}), tol);
  CHECK(std::fabs(vb.value - c / (1 - gamma)) < tol);
}

TEST_CASE("truncation horizon") {
  CHECK(truncation_horizon(0.0, 5.0, 1e-6) == 0);
  CHECK(truncation_horizon(0.5, 1.0, 0.6) == 1);
  CHECK(truncation_horizon(0.5, 1.0, 1.0) == 1);
  CHECK(truncation_horizon(0.5, 1.0, 1.1) == 0);
  try {
    truncation_horizon(1.0, 1.0, 1e-3);
    FAIL("expected InvalidDiscount");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidDiscount);
  }
}

TEST_CASE("single class barred value equals the joint value") {
  CongestionParams cp;
  cp.nk = 1;
  EnvSpec joint = make_congestion_env(cp);
  ClassWeights w({17});
  EnvSpec bar = translate_joint_to_class(joint, w);
  Rng rng = make_rng(4);
  for (int i = 0; i < 10; ++i) {
    PolicyParams p = PolicyParams::random(PolicyArch{Regime::kJoint, 1, 4, 4},
                                          1.0, 1.0, rng);
    SoftmaxPolicy pi(p);
    PolicyParams pb = p;
    pb.arch.regime = Regime::kClass;
    SoftmaxPolicy pib(pb);
    JointDist mu = random_joint(4, 1, rng);
    const double a = v_mf(joint, pi, mu, 1e-10).value;
    const double b = v_mf_bar(bar, pib, joint_to_class(mu, w), w, 1e-10).value;
    CHECK(std::fabs(a - b) < 1e-10);
  }
}

TEST_CASE("class env and its joint translation agree") {
  EnvSpec sis = make_sis_epidemic_env(SisParams{});
  ClassWeights w({3, 5});
  EnvSpec joint = translate_class_to_joint(sis, w);
  Rng rng = make_rng(5);
  for (int i = 0; i < 20; ++i) {
    SoftmaxPolicy pi(PolicyParams::random(PolicyArch{Regime::kClass, 2, 2, 2},
                                          1.0, 1.0, rng));
    ClassDistCollection bar = random_bar(2, 2, rng);
    JointDist mu = class_to_joint(bar, w);
    const double vb = v_mf_bar(sis, pi, bar, w, 1e-12).value;
    const double vj = v_mf(joint, pi, mu, 1e-12).value;
    CHECK(std::fabs(vb - vj) < 1e-10);

    // Per-step: joint rewards carry class mass theta_k.
    MFBarStep sb = mf_step_bar(sis, pi, bar, w);
    MFStep sj = mf_step(joint, pi, mu);
    for (int k = 0; k < 2; ++k) {
      CHECK(std::fabs(sj.rewards[k] - w.theta(k) * sb.rewards[k]) < 1e-12);
    }
    CHECK(l1_distance(joint_to_class(sj.next, w), sb.next) < 1e-12);
  }
}

TEST_CASE("regime errors") {
  EnvSpec sis = make_sis_epidemic_env(SisParams{});
  FixedPolicy pi = FixedPolicy::uniform(sis);
  try {
    mf_step(sis, pi, JointDist::uniform(2, 2));
    FAIL("expected RegimeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRegimeError);
  }
  EnvSpec cong = make_congestion_env(CongestionParams{});
  try {
    mf_step_bar(cong, FixedPolicy::uniform(cong),
                ClassDistCollection::uniform(4, 2), ClassWeights({1, 1}));
    FAIL("expected RegimeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRegimeError);
  }
}

TEST_CASE("trajectory csv has one row per step") {
  EnvSpec env = make_cycle_env(3, 2, 1, 0.5);
  MFTrajectory traj =
      mf_rollout(env, FixedPolicy::uniform(env), JointDist::dirac(3, 1, 0, 0), 4);
  // The cycle moves the Dirac mass one state per step.
  CHECK(traj.mu[1](1, 0) == 1.0);
  CHECK(traj.mu[3](0, 0) == 1.0);
  CHECK(traj.rewards[3][0] == 1.0);
  std::ostringstream os;
  write_csv(traj, os);
  int lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  CHECK(lines == 6);
}
