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

#include "mfc/lemmas.h"

#include <cmath>

#include "mfc/bounds.h"
#include "mfc/builtin_envs.h"
#include "mfc/meanfield.h"
#include "mfc/nagent.h"
#include "mfc/parallel.h"
#include "mfc/policy.h"

namespace mfc {
namespace {

constexpr double kSlack = 1e-9;

struct Tally {
  int64_t instances = 0;
  int64_t violations = 0;
  double worst_ratio = 0.0;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;

  // lhs is the quantity compared; test is what must not exceed rhs.
  void add(double lhs, double rhs, double test) {
    ++instances;
    if (test > rhs * (1.0 + kSlack) + 1e-12) ++violations;
    double ratio = 0.0;
    if (rhs > 0.0) {
      ratio = lhs / rhs;
    } else if (lhs > 1e-12) {
      ratio = std::numeric_limits<double>::infinity();
    }
    if (ratio > worst_ratio || instances == 1) {
      worst_ratio = ratio;
      worst_lhs = lhs;
      worst_rhs = rhs;
    }
  }
  void add(double lhs, double rhs) { add(lhs, rhs, lhs); }

  void merge(const Tally& o) {
    if (o.instances == 0) return;
    const bool take = instances == 0 || o.worst_ratio > worst_ratio;
    instances += o.instances;
    violations += o.violations;
    if (take) {
      worst_ratio = o.worst_ratio;
      worst_lhs = o.worst_lhs;
      worst_rhs = o.worst_rhs;
    }
  }

  LemmaRow row(const EnvSpec& env, const std::string& check) const {
    return LemmaRow{env.name(), regime_name(env.regime()), check, instances,
                    violations, worst_ratio, worst_lhs, worst_rhs};
  }
};

// Independent pairs, sparse pairs and close pairs: the Lipschitz ratio
// tends to peak for nearby points, so all three are mixed.
std::vector<double> simplex_point(int n, int mode, Rng& rng) {
  return sample_dirichlet(n, mode == 1 ? 0.2 : 1.0, rng);
}

void perturb(std::vector<double>& v, std::span<const double> base, Rng& rng) {
  const double eps = std::pow(10.0, -1.0 - 3.0 * uniform01(rng));
  for (size_t i = 0; i < v.size(); ++i) v[i] = (1 - eps) * base[i] + eps * v[i];
}

ClassWeights random_weights(const EnvSpec& env, int max_pop, Rng& rng) {
  if (env.pinned_weights()) return *env.pinned_weights();
  std::uniform_int_distribution<int64_t> pop(1, max_pop);
  std::vector<int64_t> pops(env.nk());
  for (auto& p : pops) p = pop(rng);
  return ClassWeights(pops);
}

ClassDistCollection random_class(int nx, int nk, int mode, Rng& rng,
                                 const ClassDistCollection* near) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(nx) * nk);
  for (int k = 0; k < nk; ++k) {
    std::vector<double> row = simplex_point(nx, mode, rng);
    if (near) perturb(row, near->row(k), rng);
    v.insert(v.end(), row.begin(), row.end());
  }
  return ClassDistCollection(nx, nk, std::move(v));
}

JointDist random_joint(const EnvSpec& env, int mode, Rng& rng,
                       const JointDist* near) {
  const int nx = env.nx(), nk = env.nk();
  if (env.pinned_weights()) {
    const ClassDistCollection* base = nullptr;
    ClassDistCollection near_bar = ClassDistCollection::uniform(nx, nk);
    if (near) {
      near_bar = joint_to_class(*near, *env.pinned_weights());
      base = &near_bar;
    }
    return class_to_joint(random_class(nx, nk, mode, rng, base),
                          *env.pinned_weights());
  }
  std::vector<double> v = simplex_point(nx * nk, mode, rng);
  if (near) perturb(v, near->values(), rng);
  return JointDist(nx, nk, std::move(v));
}

SoftmaxPolicy random_policy(const EnvSpec& env, Rng& rng) {
  static constexpr double kScales[] = {0.0, 0.5, 2.0};
  static constexpr double kFeatureScales[] = {0.0, 1.0, 4.0};
  const double s = kScales[rng() % 3];
  const double f = kFeatureScales[rng() % 3];
  return SoftmaxPolicy(PolicyParams::random(arch_for(env), s, f, rng));
}

BoundConstants constants(const EnvSpec& env, const Policy& pol,
                         const ClassWeights& w) {
  return constants_for(env, pol, w);
}

// Per-thread tallies merged in index order keep the report independent of
// the thread count.
template <class Fn>
std::vector<Tally> sweep(int64_t n, int rows, const CertifyOptions& opts,
                         uint64_t stream, Fn&& fn) {
  constexpr int64_t kChunk = 64;
  const int64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<Tally>> parts(chunks, std::vector<Tally>(rows));
  const uint64_t base = split_seed(opts.seed, stream);
  parallel_for(chunks, opts.threads, [&](int64_t c) {
    for (int64_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
      Rng rng = make_rng(base, static_cast<uint64_t>(i));
      fn(i, rng, parts[c]);
    }
  });
  std::vector<Tally> out(rows);
  for (const auto& p : parts) {
    for (int r = 0; r < rows; ++r) out[r].merge(p[r]);
  }
  return out;
}

uint64_t env_stream(const EnvSpec& env, uint64_t family) {
  uint64_t h = 1469598103934665603ull;
  const std::string key = env.name() + "/" + regime_name(env.regime());
  for (unsigned char c : key) h = (h ^ c) * 1099511628211ull;
  return h ^ (family << 56);
}

}  // namespace

std::vector<LemmaRow> certify_continuity(const EnvSpec& env,
                                         const CertifyOptions& opts) {
  std::vector<LemmaRow> rows;
  const int64_t n = opts.pairs;
  if (env.regime() == Regime::kClass) {
    auto t = sweep(n, 3, opts, env_stream(env, 1),
                   [&](int64_t i, Rng& rng, std::vector<Tally>& out) {
      const int mode = static_cast<int>(i % 3);
      const ClassWeights w = random_weights(env, opts.max_class_pop, rng);
      const SoftmaxPolicy pol = random_policy(env, rng);
      const ClassDistCollection a = random_class(env.nx(), env.nk(), mode % 2, rng, nullptr);
      const ClassDistCollection b =
          random_class(env.nx(), env.nk(), mode % 2, rng, mode == 2 ? &a : nullptr);
      const BoundConstants c = constants(env, pol, w);
      const MFBarStep sa = mf_step_bar(env, pol, a, w);
      const MFBarStep sb = mf_step_bar(env, pol, b, w);
      const double d = l1_distance(a, b);
      out[0].add(l1_distance(sa.nu, sb.nu), (1 + c.nk() * c.l_q) * d);
      double dr = 0.0;
      for (int k = 0; k < env.nk(); ++k) {
        dr += w.theta(k) * std::fabs(sa.rewards[k] - sb.rewards[k]);
      }
      out[1].add(dr, c.s_r_bar() * d);
      out[2].add(l1_distance(sa.next, sb.next), c.s_p_bar() * d);
    });
    rows.push_back(t[0].row(env, "class_nu_continuity"));
    rows.push_back(t[1].row(env, "class_reward_continuity"));
    rows.push_back(t[2].row(env, "class_transition_continuity"));
    return rows;
  }

  const bool marg = env.regime() == Regime::kMarginal;
  auto t = sweep(n, 6, opts, env_stream(env, 2),
                 [&](int64_t i, Rng& rng, std::vector<Tally>& out) {
    const int mode = static_cast<int>(i % 3);
    const SoftmaxPolicy pol = random_policy(env, rng);
    const JointDist a = random_joint(env, mode % 2, rng, nullptr);
    const JointDist b = random_joint(env, mode % 2, rng, mode == 2 ? &a : nullptr);
    const ClassWeights w = env.pinned_weights()
                               ? *env.pinned_weights()
                               : ClassWeights(std::vector<int64_t>(env.nk(), 1));
    const BoundConstants c = constants(env, pol, w);
    const MFStep sa = mf_step(env, pol, a);
    const MFStep sb = mf_step(env, pol, b);
    const double d = l1_distance(a, b);
    const double dnu = l1_distance(sa.nu, sb.nu);
    double dr = 0.0;
    for (int k = 0; k < env.nk(); ++k) dr += std::fabs(sa.rewards[k] - sb.rewards[k]);
    const double dp = l1_distance(sa.next, sb.next);
    out[0].add(dnu, (1 + c.l_q) * d);
    out[1].add(dr, c.s_r() * d);
    out[2].add(dp, c.s_p() * d);
    if (marg) {
      const double dx = l1_distance(marginal(a), marginal(b));
      // The outer inequality is tested on the joint distance; the inner one
      // (projection cannot increase the distance) is folded into the test.
      const double nu_u = l1_distance(marginal(sa.nu), marginal(sb.nu));
      const double p_x = l1_distance(marginal(sa.next), marginal(sb.next));
      const double rhs_nu = d + c.l_q * dx;
      out[3].add(dnu, rhs_nu, nu_u > dnu * (1 + kSlack) + 1e-12 ? 2 * rhs_nu + 1 : dnu);
      out[4].add(dr, c.s_r_prime() * d + c.s_r_second() * dx);
      const double rhs_p = c.s_p_prime() * d + c.s_p_second() * dx;
      out[5].add(dp, rhs_p, p_x > dp * (1 + kSlack) + 1e-12 ? 2 * rhs_p + 1 : dp);
    }
  });
  rows.push_back(t[0].row(env, "nu_continuity"));
  rows.push_back(t[1].row(env, "reward_continuity"));
  rows.push_back(t[2].row(env, "transition_continuity"));
  if (marg) {
    rows.push_back(t[3].row(env, "marginal_nu_continuity"));
    rows.push_back(t[4].row(env, "marginal_reward_continuity"));
    rows.push_back(t[5].row(env, "marginal_transition_continuity"));
  }
  return rows;
}

namespace {

std::vector<Tally> deviation_sweep(const EnvSpec& env,
                                   const CertifyOptions& opts,
                                   DeviationMetric metric, uint64_t family) {
  return sweep(opts.configs, 3, opts, env_stream(env, family),
               [&](int64_t, Rng& rng, std::vector<Tally>& out) {
    const ClassWeights w = random_weights(env, opts.max_class_pop, rng);
    std::vector<std::vector<int>> states(w.nk());
    std::uniform_int_distribution<int> pick(0, env.nx() - 1);
    for (int k = 0; k < w.nk(); ++k) {
      states[k].resize(w.pops()[k]);
      for (int& x : states[k]) x = pick(rng);
    }
    const AgentState config(w, std::move(states), env.nx());
    const SoftmaxPolicy pol = random_policy(env, rng);
    const BoundConstants c = constants(env, pol, w);
    const OneStepDeviation dev =
        one_step_deviation(env, pol, config, opts.trials, rng(), metric, 1);

    const double root_u = std::sqrt(static_cast<double>(env.nu()));
    const double root_xu = std::sqrt(static_cast<double>(env.nx()) * env.nu());
    double scale = 0.0, c_r = c.c_r(), c_p = c.c_p();
    switch (metric) {
      case DeviationMetric::kJoint:
        scale = c.sum_sqrt_pops() / c.n_pop();
        break;
      case DeviationMetric::kClass:
        scale = c.sum_inv_sqrt_pops();
        c_r = c.c_r_bar();
        c_p = c.c_p_bar();
        break;
      case DeviationMetric::kMarginal:
        scale = 1.0 / std::sqrt(c.n_pop());
        break;
    }
    const double rhs[3] = {scale * root_u, c_r * scale * root_u,
                           c_p * scale * root_xu};
    const McEstimate* est[3] = {&dev.nu, &dev.reward, &dev.mu};
    for (int r = 0; r < 3; ++r) {
      out[r].add(est[r]->mean, rhs[r], est[r]->mean - 3.0 * est[r]->stderr_);
    }
  });
}

}  // namespace

std::vector<LemmaRow> certify_deviation(const EnvSpec& env,
                                        const CertifyOptions& opts) {
  std::vector<LemmaRow> rows;
  auto emit = [&](const std::vector<Tally>& t, const std::string& prefix) {
    rows.push_back(t[0].row(env, prefix + "nu_deviation"));
    rows.push_back(t[1].row(env, prefix + "reward_deviation"));
    rows.push_back(t[2].row(env, prefix + "state_deviation"));
  };
  if (env.regime() == Regime::kClass) {
    emit(deviation_sweep(env, opts, DeviationMetric::kClass, 3), "class_");
    return rows;
  }
  emit(deviation_sweep(env, opts, DeviationMetric::kJoint, 4), "");
  if (env.regime() == Regime::kMarginal) {
    emit(deviation_sweep(env, opts, DeviationMetric::kMarginal, 5), "marginal_");
  }
  return rows;
}

LemmaRow certify_bernoulli(const CertifyOptions& opts) {
  CertifyOptions o = opts;
  auto t = sweep(opts.bernoulli_instances, 1, o, 0xBE5ull,
                 [&](int64_t, Rng& rng, std::vector<Tally>& out) {
    std::uniform_int_distribution<int> dim(1, 8);
    const int m = dim(rng), n = dim(rng), s = dim(rng);
    const double c = 0.1 + 1.9 * uniform01(rng);
    const BernoulliInstance inst = random_bernoulli_instance(m, n, s, c, rng);
    const BernoulliCheck mc = bernoulli_deviation_check(inst, opts.bernoulli_trials, rng);
    out[0].add(mc.lhs, mc.rhs, mc.lhs - 3.0 * mc.lhs_stderr);
    if (m * n <= 16) {
      const double exact = bernoulli_deviation_exact(inst);
      out[0].add(exact, mc.rhs);
      --out[0].instances;  // same instance, second oracle
    }
  });
  LemmaRow row{"bernoulli", "-", "bernoulli_deviation", t[0].instances,
               t[0].violations, t[0].worst_ratio, t[0].worst_lhs,
               t[0].worst_rhs};
  return row;
}

LemmaRow certify_fixed_deviation(const EnvSpec& env, int64_t n_pop,
                                 const std::string& which, int64_t trials,
                                 uint64_t seed, int threads) {
  const ClassWeights w({n_pop});
  const AgentState config = AgentState::round_robin(w, env.nx());
  const FixedPolicy pol = FixedPolicy::uniform(env);
  const BoundConstants c = constants(env, pol, w);
  const OneStepDeviation dev = one_step_deviation(
      env, pol, config, trials, seed, DeviationMetric::kJoint, threads);
  const double scale = c.sum_sqrt_pops() / c.n_pop();
  Tally t;
  if (which == "nu") {
    t.add(dev.nu.mean, scale * std::sqrt(static_cast<double>(env.nu())),
          dev.nu.mean - 3.0 * dev.nu.stderr_);
    return t.row(env, "nu_deviation");
  }
  if (which == "mu") {
    t.add(dev.mu.mean,
          c.c_p() * scale * std::sqrt(static_cast<double>(env.nx()) * env.nu()),
          dev.mu.mean - 3.0 * dev.mu.stderr_);
    return t.row(env, "state_deviation");
  }
  throw Error(ErrorKind::kConfigError, "fixed deviation must be nu or mu");
}

std::vector<EnvSpec> certification_envs() {
  std::vector<EnvSpec> envs;
  envs.push_back(make_constant_env(2, 2, 2, 1.0, 0.5, Regime::kJoint));
  envs.push_back(make_constant_env(2, 2, 2, 1.0, 0.5, Regime::kClass));
  envs.push_back(make_uniform_transition_env(3, 2, 2, 0.5, 0.5));
  envs.push_back(make_cycle_env(3, 2, 2, 0.5));
  envs.push_back(make_bandit_env(0.0, 1.0));
  envs.push_back(make_congestion_env(CongestionParams{}));
  envs.push_back(make_marginal_congestion_env(CongestionParams{}));
  envs.push_back(make_sis_epidemic_env(SisParams{}));
  const ClassWeights w({3, 5});
  envs.push_back(translate_joint_to_class(make_congestion_env(CongestionParams{}), w));
  envs.push_back(translate_class_to_joint(make_sis_epidemic_env(SisParams{}), w));
  return envs;
}

}  // namespace mfc
