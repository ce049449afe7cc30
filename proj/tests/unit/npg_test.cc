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

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "mfc/builtin_envs.h"
#include "mfc/meanfield.h"
#include "mfc/npg.h"
#include "mfc/policy.h"
#include "mfc/random.h"

using namespace mfc;

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  double s = 0.0, sq = 0.0;
  for (double x : v) {
    s += x;
    sq += x * x;
  }
  const double n = static_cast<double>(v.size());
  Moments m;
  m.mean = s / n;
  m.se = std::sqrt(std::max(sq / n - m.mean * m.mean, 0.0) / n);
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

EnvSpec small_congestion(double gamma) {
  CongestionParams cp;
  cp.nk = 1;
  cp.nx = 2;
  cp.nu = 2;
  cp.gamma = gamma;
  cp.lambda = 0.5;
  return make_congestion_env(cp);
}

}  // namespace

TEST_CASE("horizon cap") {
  CHECK(horizon_cap(0.0) == 0);
  CHECK(horizon_cap(0.5) == 27);  // 0.5^27 < 1e-8 <= 0.5^26
  CHECK(std::pow(0.9, horizon_cap(0.9)) <= 1e-8);
  CHECK(std::pow(0.9, horizon_cap(0.9) - 1) > 1e-8);
}

TEST_CASE("gamma = 0 stops immediately") {
  EnvSpec env = make_bandit_env(0.2, 1.0);
  PolicyArch a = arch_for(env);
  Rng rng = make_rng(1);
  for (int i = 0; i < 200; ++i) {
    OccupancySample s =
        sample_occupation(env, PolicyParams::zeros(a), JointDist::uniform(2, 1), rng);
    CHECK(s.stop_time == 0);
    CHECK(s.sum_length == 1);
    CHECK_FALSE(s.horizon_cap_hit);
  }
}

TEST_CASE("stop time is geometric") {
  const double gamma = 0.5;
  EnvSpec env = make_constant_env(2, 2, 1, 1.0, gamma);
  FixedPolicy pi = FixedPolicy::uniform(env);
  OccupationSampler sampler(env, pi, JointDist::uniform(2, 1));
  const int n = 20000, bins = 7;
  std::vector<int> obs(bins, 0);
  Rng rng = make_rng(2);
  for (int i = 0; i < n; ++i) {
    const int t = sampler.sample(rng).stop_time;
    ++obs[std::min(t, bins - 1)];
  }
  double chi2 = 0.0;
  for (int t = 0; t < bins; ++t) {
    const double p = t < bins - 1 ? (1 - gamma) * std::pow(gamma, t)
                                  : std::pow(gamma, bins - 1);
    const double e = n * p;
    chi2 += (obs[t] - e) * (obs[t] - e) / e;
  }
  // 6 degrees of freedom, 0.999 quantile.
  CHECK(chi2 < 22.46);
}

TEST_CASE("constant rewards give zero mean advantage") {
  EnvSpec env = make_constant_env(2, 2, 1, 1.0, 0.7);
  SoftmaxPolicy pi(PolicyParams::zeros(arch_for(env)));
  for (AdvantageVariant v : {AdvantageVariant::kCorrected, AdvantageVariant::kLiteral}) {
    OccupationSampler sampler(env, pi, JointDist::uniform(2, 1),
                              SamplerOptions{v, RewardWeighting::kTheta});
    Rng rng = make_rng(3);
    std::vector<double> adv;
    for (int i = 0; i < 20000; ++i) adv.push_back(sampler.sample(rng).advantage);
    Moments m = moments(adv);
    CHECK(std::fabs(m.mean) <= 4.0 * m.se);
  }
}

TEST_CASE("corrected advantage is unbiased on a tiny system") {
  // Exact Q_t and V_t along the mean-field path by backward recursion.
  const double gamma = 0.5;
  EnvSpec env = small_congestion(gamma);
  Rng prng = make_rng(4);
  SoftmaxPolicy pi(PolicyParams::random(arch_for(env), 1.0, 2.0, prng));
  const JointDist mu0(2, 1, {0.3, 0.7});
  const int H = 80;
  MFTrajectory path = mf_rollout(env, pi, mu0, H);
  std::vector<std::vector<double>> q(H + 2, std::vector<double>(4, 0.0));
  std::vector<std::vector<double>> v(H + 2, std::vector<double>(2, 0.0));
  for (int t = H; t >= 0; --t) {
    RegimeArgs args = make_regime_args(env, path.mu[t], path.nu[t]);
    std::vector<double> f = features_from_joint(Regime::kJoint, path.mu[t]);
    for (int x = 0; x < 2; ++x) {
      std::vector<double> p(2);
      pi.probs(0, x, f, p);
      for (int u = 0; u < 2; ++u) {
        MarginalDist next = transition_dist(env, 0, x, u, args);
        q[t][x * 2 + u] = reward_eval(env, 0, x, u, args) +
                          gamma * (next(0) * v[t + 1][0] + next(1) * v[t + 1][1]);
      }
      v[t][x] = p[0] * q[t][x * 2] + p[1] * q[t][x * 2 + 1];
    }
  }

  OccupationSampler sampler(env, pi, mu0);
  Rng rng = make_rng(5);
  std::vector<double> diff, diff_u0, lit;
  for (int i = 0; i < 200000; ++i) {
    OccupancySample s = sampler.sample(rng);
    REQUIRE(s.stop_time <= H);
    const double a = q[s.stop_time][s.x[0] * 2 + s.u[0]] - v[s.stop_time][s.x[0]];
    diff.push_back(s.advantage - a);
    diff_u0.push_back(s.u[0] == 0 ? s.advantage - a : 0.0);
  }
  Moments m = moments(diff), m0 = moments(diff_u0);
  CAPTURE(m.mean);
  CAPTURE(m0.mean);
  CHECK(std::fabs(m.mean) <= 4.0 * m.se);
  CHECK(std::fabs(m0.mean) <= 4.0 * m0.se);

  // The literal variant has mean zero instead.
  OccupationSampler literal(env, pi, mu0,
                            SamplerOptions{AdvantageVariant::kLiteral,
                                           RewardWeighting::kTheta});
  Rng rng2 = make_rng(6);
  for (int i = 0; i < 50000; ++i) lit.push_back(literal.sample(rng2).advantage);
  Moments ml = moments(lit);
  CHECK(std::fabs(ml.mean) <= 4.0 * ml.se);
}

TEST_CASE("inner direction formula and gradient identity") {
  const double gamma = 0.6;
  EnvSpec env = small_congestion(gamma);
  Rng rng = make_rng(7);
  PolicyParams p = PolicyParams::random(arch_for(env), 1.0, 1.0, rng);
  SoftmaxPolicy pi(p);
  OccupationSampler sampler(env, pi, JointDist::uniform(2, 1));
  std::vector<OccupancySample> samples;
  std::vector<std::vector<double>> scores;
  for (int i = 0; i < 300; ++i) {
    samples.push_back(sampler.sample(rng));
    const OccupancySample& s = samples.back();
    scores.push_back(score_gradient(pi, s.x, StateArg(s.mu), s.u));
  }
  std::vector<double> w(p.d());
  for (double& x : w) x = uniform01(rng) - 0.5;

  std::vector<double> mean_h(p.d(), 0.0);
  for (size_t i = 0; i < samples.size(); ++i) {
    std::vector<double> h = inner_direction(pi, w, samples[i], gamma);
    const double c = dot(w, scores[i]) - samples[i].advantage / (1 - gamma);
    for (int j = 0; j < p.d(); ++j) {
      CHECK(h[j] == doctest::Approx(c * scores[i][j]).epsilon(1e-12));
      mean_h[j] += h[j] / samples.size();
    }
  }
  // L(w) = mean (A - (1 - gamma) w . g)^2 on the same samples.
  auto loss = [&](const std::vector<double>& ww) {
    double s = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
      const double r = samples[i].advantage - (1 - gamma) * dot(ww, scores[i]);
      s += r * r;
    }
    return s / samples.size();
  };
  const double step = 1e-5;
  for (int j = 0; j < p.d(); ++j) {
    std::vector<double> up = w, dn = w;
    up[j] += step;
    dn[j] -= step;
    const double fd = (loss(up) - loss(dn)) / (2 * step);
    CHECK(mean_h[j] == doctest::Approx(fd / (2 * (1 - gamma) * (1 - gamma)))
                           .epsilon(1e-5)
                           .scale(1.0));
  }
}

TEST_CASE("inner loop approaches the least-squares solution") {
  // Frozen Phi and a frozen sample set: the squared loss is quadratic in w.
  // Steps along the mean inner direction from w = 0 stay in the span of the
  // scores, so they converge to the minimum-norm solution of the normal
  // equations.
  const double gamma = 0.5;
  EnvSpec env = small_congestion(gamma);
  Rng rng = make_rng(11);
  PolicyParams p = PolicyParams::random(arch_for(env), 0.5, 0.5, rng);
  SoftmaxPolicy pi(p);
  OccupationSampler sampler(env, pi, JointDist::uniform(2, 1));
  const int n = 200, d = p.d();
  std::vector<OccupancySample> samples;
  Eigen::MatrixXd g(n, d);
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) {
    samples.push_back(sampler.sample(rng));
    const OccupancySample& s = samples.back();
    std::vector<double> sc = score_gradient(pi, s.x, StateArg(s.mu), s.u);
    for (int j = 0; j < d; ++j) g(i, j) = sc[j];
    a(i) = s.advantage / (1 - gamma);
  }
  const Eigen::VectorXd w_star =
      g.completeOrthogonalDecomposition().pseudoInverse() * a;

  std::vector<double> w(d, 0.0);
  const double alpha = 0.5;
  double prev = (Eigen::Map<Eigen::VectorXd>(w.data(), d) - w_star).norm();
  std::vector<double> dist;
  for (int step = 1; step <= 4000; ++step) {
    std::vector<double> mean(d, 0.0);
    for (const OccupancySample& s : samples) {
      std::vector<double> h = inner_direction(pi, w, s, gamma);
      for (int j = 0; j < d; ++j) mean[j] += h[j] / n;
    }
    for (int j = 0; j < d; ++j) w[j] -= alpha * mean[j];
    const double cur = (Eigen::Map<Eigen::VectorXd>(w.data(), d) - w_star).norm();
    CHECK(cur <= prev * (1 + 1e-12));
    prev = cur;
    if (step % 1000 == 0) dist.push_back(cur);
  }
  CHECK(dist.back() < dist.front());
  // Excess loss over the optimum; the slow directions are the ones with
  // small singular values, which barely move the loss.
  const Eigen::Map<Eigen::VectorXd> wv(w.data(), d);
  const double best = (g * w_star - a).squaredNorm() / n;
  const double start = a.squaredNorm() / n;
  const double now = (g * wv - a).squaredNorm() / n;
  CHECK(now - best < 0.05 * (start - best));
}

TEST_CASE("zero step size keeps the policy fixed") {
  EnvSpec env = make_bandit_env(0.2, 1.0);
  NPGConfig cfg;
  cfg.eta = 0.0;
  cfg.J = 4;
  cfg.L = 8;
  cfg.mu0 = JointDist::uniform(2, 1);
  cfg.seed = 1;
  PolicyParams phi0 = PolicyParams::zeros(arch_for(env));
  NPGReport r = npg_train(env, cfg, phi0);
  REQUIRE(r.snapshot.iterates.size() == 4);
  for (const PolicyParams& p : r.snapshot.iterates) CHECK(p.phi == phi0.phi);
  for (double v : r.snapshot.values) CHECK(v == doctest::Approx(0.6));
}

TEST_CASE("training is deterministic and thread independent") {
  EnvSpec env = make_congestion_env(CongestionParams{});
  NPGConfig cfg;
  cfg.eta = 0.2;
  cfg.alpha = 0.01;
  cfg.J = 3;
  cfg.L = 16;
  cfg.mu0 = JointDist::uniform(4, 2);
  cfg.seed = 9;
  PolicyParams phi0 = PolicyParams::zeros(arch_for(env));
  NPGReport a = npg_train(env, cfg, phi0);
  cfg.threads = 3;
  NPGReport b = npg_train(env, cfg, phi0);
  for (size_t j = 0; j < a.snapshot.iterates.size(); ++j) {
    CHECK(a.snapshot.iterates[j].phi == b.snapshot.iterates[j].phi);
  }
  CHECK(a.snapshot.values == b.snapshot.values);
  CHECK(a.w_norms == b.w_norms);
}

TEST_CASE("bandit training approaches the best arm") {
  EnvSpec env = make_bandit_env(0.2, 1.0);
  NPGConfig cfg;
  cfg.eta = 8.0;
  cfg.alpha = 0.1;
  cfg.J = 50;
  cfg.L = 256;
  cfg.mu0 = JointDist::uniform(2, 1);
  cfg.seed = 3;
  NPGReport r = npg_train(env, cfg, PolicyParams::zeros(arch_for(env)));
  CHECK(r.snapshot.values.back() > 0.99);
  CHECK(r.mean_value() > 0.97);
}

TEST_CASE("configuration errors and divergence") {
  EnvSpec env = make_bandit_env(0.2, 1.0);
  NPGConfig cfg;
  cfg.mu0 = JointDist::uniform(2, 1);
  cfg.alpha = 0.0;
  try {
    npg_train(env, cfg, PolicyParams::zeros(arch_for(env)));
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfigError);
  }
  cfg.alpha = 1e4;
  cfg.L = 64;
  try {
    npg_train(env, cfg, PolicyParams::zeros(arch_for(env)));
    FAIL("expected DivergedInnerLoop");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDivergedInnerLoop);
  }
  EnvSpec sis = make_sis_epidemic_env(SisParams{});
  try {
    OccupationSampler s(sis, FixedPolicy::uniform(sis), JointDist::uniform(2, 2));
    FAIL("expected RegimeError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRegimeError);
  }
}

TEST_CASE("fisher diagnostics at zero parameters") {
  EnvSpec env = make_congestion_env(CongestionParams{});
  FisherDiagnostics f = fisher_diagnostics(PolicyParams::zeros(arch_for(env)),
                                           JointDist::uniform(4, 2), env, 256, 4);
  CHECK(f.samples == 256);
  CHECK(f.min_eigenvalue >= 0.0);
  CHECK(f.max_score_norm > 0.0);
  CHECK(f.max_score_norm <= 2.0 * env.nk());
  CHECK(std::isfinite(f.score_lipschitz));
}
