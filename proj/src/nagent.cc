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

#include "mfc/nagent.h"

#include <cmath>
#include <numeric>

#include "mfc/csv.h"
#include "mfc/meanfield.h"
#include "mfc/parallel.h"

namespace mfc {

AgentState::AgentState(ClassWeights weights,
                       std::vector<std::vector<int>> states, int nx)
    : weights_(std::move(weights)), states_(std::move(states)), nx_(nx) {
  // Reuses the counting validation (lengths and ranges).
  (void)empirical_joint_state(states_, weights_, nx_);
}

AgentState AgentState::round_robin(const ClassWeights& weights, int nx) {
  std::vector<std::vector<int>> states(weights.nk());
  for (int k = 0; k < weights.nk(); ++k) {
    states[k].resize(weights.pop(k));
    for (int64_t j = 0; j < weights.pop(k); ++j) states[k][j] = j % nx;
  }
  return AgentState(weights, std::move(states), nx);
}

JointDist AgentState::empirical_joint() const {
  return empirical_joint_state(states_, weights_, nx_);
}

ClassDistCollection AgentState::empirical_class() const {
  return empirical_class_state(states_, weights_, nx_);
}

std::vector<int64_t> AgentState::counts() const {
  std::vector<int64_t> c(static_cast<size_t>(weights_.nk()) * nx_, 0);
  for (int k = 0; k < weights_.nk(); ++k) {
    for (int x : states_[k]) ++c[k * nx_ + x];
  }
  return c;
}

namespace {

void check_dims(const EnvSpec& env, const Policy& policy, int nk, int nx) {
  if (policy.nk() != env.nk() || policy.nx() != env.nx() ||
      policy.nu() != env.nu() || nk != env.nk() || nx != env.nx()) {
    throw Error(ErrorKind::kShapeError,
                "environment, policy and agent state dimensions differ");
  }
}

// pi[(k * nx + x) * nu + u] for every (class, state) at features feat.
std::vector<double> policy_table(const Policy& policy,
                                 std::span<const double> feat) {
  const int nk = policy.nk(), nx = policy.nx(), nu = policy.nu();
  std::vector<double> pi(static_cast<size_t>(nk) * nx * nu);
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      policy.probs(k, x, feat,
                   std::span<double>(pi).subspan((k * nx + x) * nu, nu));
    }
  }
  return pi;
}

JointDist joint_from_counts(const std::vector<int64_t>& counts, int nk, int n,
                            int64_t total) {
  std::vector<double> v(static_cast<size_t>(n) * nk);
  for (int k = 0; k < nk; ++k) {
    for (int i = 0; i < n; ++i) {
      v[i * nk + k] = static_cast<double>(counts[k * n + i]) / total;
    }
  }
  return JointDist(n, nk, std::move(v));
}

}  // namespace

StepRecord simulate_step(const EnvSpec& env, const Policy& policy,
                         const AgentState& state, Rng& rng) {
  const ClassWeights& w = state.weights();
  const int nk = w.nk(), nx = env.nx(), nu = env.nu();
  check_dims(env, policy, nk, state.nx());
  JointDist mu = state.empirical_joint();
  const std::vector<double> feat = features_from_joint(policy.regime(), mu);
  const std::vector<double> pi = policy_table(policy, feat);

  std::vector<std::vector<int>> actions(nk);
  for (int k = 0; k < nk; ++k) {
    actions[k].resize(w.pop(k));
    for (int64_t j = 0; j < w.pop(k); ++j) {
      const int x = state.states()[k][j];
      actions[k][j] = sample_categorical(
          std::span<const double>(pi).subspan((k * nx + x) * nu, nu), rng);
    }
  }
  ActionJointDist nu_n = empirical_joint<ActionSpace>(actions, w, nu);
  const StepTables tables =
      build_step_tables(env, make_regime_args(env, mu, nu_n));

  std::vector<std::vector<int>> next(nk);
  std::vector<std::vector<double>> rewards(nk);
  for (int k = 0; k < nk; ++k) {
    next[k].resize(w.pop(k));
    rewards[k].resize(w.pop(k));
    for (int64_t j = 0; j < w.pop(k); ++j) {
      const int x = state.states()[k][j];
      const int u = actions[k][j];
      rewards[k][j] = tables.r(k, x, u);
      next[k][j] = sample_categorical(tables.p(k, x, u), rng);
    }
  }
  return StepRecord{AgentState(w, std::move(next), nx), std::move(actions),
                    std::move(rewards), std::move(mu), std::move(nu_n)};
}

SimTrajectory simulate(const EnvSpec& env, const Policy& policy,
                       const AgentState& x0, int horizon, Rng& rng) {
  SimTrajectory traj;
  traj.states.push_back(x0);
  for (int t = 0; t <= horizon; ++t) {
    StepRecord s = simulate_step(env, policy, traj.states.back(), rng);
    traj.actions.push_back(std::move(s.actions));
    traj.rewards.push_back(std::move(s.rewards));
    traj.mu.push_back(std::move(s.mu));
    traj.nu.push_back(std::move(s.nu));
    traj.states.push_back(std::move(s.next));
  }
  return traj;
}

void write_csv(const SimTrajectory& traj, std::ostream& out) {
  CsvWriter csv(out, {"t", "class", "agent", "state", "action", "reward"});
  for (size_t t = 0; t < traj.actions.size(); ++t) {
    const auto& states = traj.states[t].states();
    for (size_t k = 0; k < states.size(); ++k) {
      for (size_t j = 0; j < states[k].size(); ++j) {
        csv.cell(static_cast<int64_t>(t))
            .cell(static_cast<int64_t>(k))
            .cell(static_cast<int64_t>(j))
            .cell(states[k][j])
            .cell(traj.actions[t][k][j])
            .cell(traj.rewards[t][k][j]);
        csv.end_row();
      }
    }
  }
}

CountStep count_step(const EnvSpec& env, const Policy& policy,
                     const ClassWeights& weights,
                     const std::vector<int64_t>& counts, Rng& rng) {
  const int nk = weights.nk(), nx = env.nx(), nu = env.nu();
  check_dims(env, policy, nk, nx);
  const int64_t total = weights.total();
  JointDist mu = joint_from_counts(counts, nk, nx, total);
  const std::vector<double> feat = features_from_joint(policy.regime(), mu);
  const std::vector<double> pi = policy_table(policy, feat);

  std::vector<int64_t> kxu(static_cast<size_t>(nk) * nx * nu, 0);
  std::vector<int64_t> actions(static_cast<size_t>(nk) * nu, 0);
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      const int64_t n = counts[k * nx + x];
      if (n == 0) continue;
      const size_t row = (k * nx + x) * nu;
      sample_multinomial(n, std::span<const double>(pi).subspan(row, nu), rng,
                         std::span<int64_t>(kxu).subspan(row, nu));
      for (int u = 0; u < nu; ++u) actions[k * nu + u] += kxu[row + u];
    }
  }
  std::vector<double> nv(static_cast<size_t>(nu) * nk);
  for (int k = 0; k < nk; ++k) {
    for (int u = 0; u < nu; ++u) {
      nv[u * nk + k] = static_cast<double>(actions[k * nu + u]) / total;
    }
  }
  ActionJointDist nu_n(nu, nk, std::move(nv));
  const StepTables tables =
      build_step_tables(env, make_regime_args(env, mu, nu_n));

  CountStep out{std::vector<int64_t>(static_cast<size_t>(nk) * nx, 0),
                std::move(actions), 0.0, std::move(mu), std::move(nu_n)};
  std::vector<int64_t> dest(nx);
  double reward_sum = 0.0;
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      for (int u = 0; u < nu; ++u) {
        const int64_t n = kxu[(k * nx + x) * nu + u];
        if (n == 0) continue;
        reward_sum += static_cast<double>(n) * tables.r(k, x, u);
        sample_multinomial(n, tables.p(k, x, u), rng, dest);
        for (int y = 0; y < nx; ++y) out.next[k * nx + y] += dest[y];
      }
    }
  }
  out.reward = reward_sum / total;
  return out;
}

namespace {

McEstimate summarize(const std::vector<double>& samples) {
  McEstimate e;
  e.trials = static_cast<int64_t>(samples.size());
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  e.mean = mean;
  e.stderr_ = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return e;
}

}  // namespace

ValueEstimate v_n_estimate(const EnvSpec& env, const Policy& policy,
                           const AgentState& x0, int64_t reps, double tol,
                           uint64_t seed, int threads) {
  if (reps < 1) throw Error(ErrorKind::kConfigError, "reps must be >= 1");
  check_dims(env, policy, x0.weights().nk(), x0.nx());
  const double m_r = env.declared().m_r;
  const int horizon = truncation_horizon(env.gamma(), m_r, tol);
  const std::vector<int64_t> start = x0.counts();
  std::vector<double> returns(reps);
  parallel_for(reps, threads, [&](int64_t rep) {
    Rng rng = make_rng(seed, static_cast<uint64_t>(rep));
    std::vector<int64_t> counts = start;
    double value = 0.0, discount = 1.0;
    for (int t = 0; t <= horizon; ++t) {
      CountStep s = count_step(env, policy, x0.weights(), counts, rng);
      value += discount * s.reward;
      discount *= env.gamma();
      counts = std::move(s.next);
    }
    returns[rep] = value;
  });
  const McEstimate e = summarize(returns);
  ValueEstimate out;
  out.mean = e.mean;
  out.stderr_ = e.stderr_;
  out.reps = reps;
  out.horizon = horizon;
  out.tail_bound =
      m_r * std::pow(env.gamma(), horizon + 1) / (1.0 - env.gamma());
  return out;
}

namespace {

double metric_distance(DeviationMetric metric, const auto& a, const auto& b,
                       const ClassWeights& w) {
  switch (metric) {
    case DeviationMetric::kJoint:
      return l1_distance(a, b);
    case DeviationMetric::kClass:
      return l1_distance(joint_to_class(a, w), joint_to_class(b, w));
    case DeviationMetric::kMarginal:
      return l1_distance(marginal(a), marginal(b));
  }
  return 0.0;
}

constexpr int64_t kTrialsPerStream = 256;

}  // namespace

OneStepDeviation one_step_deviation(const EnvSpec& env, const Policy& policy,
                                    const AgentState& config, int64_t trials,
                                    uint64_t seed, DeviationMetric metric,
                                    int threads) {
  if (trials < 1) throw Error(ErrorKind::kConfigError, "trials must be >= 1");
  const ClassWeights& w = config.weights();
  check_dims(env, policy, w.nk(), config.nx());
  const JointDist mu_n = config.empirical_joint();

  // Mean-field images of mu^N, held in joint form.
  ActionJointDist nu_mf_j = ActionJointDist::uniform(env.nu(), env.nk());
  JointDist p_mf_j = mu_n;
  double r_mf_total = 0.0;
  if (env.regime() == Regime::kClass) {
    MFBarStep s = mf_step_bar(env, policy, config.empirical_class(), w);
    nu_mf_j = class_to_joint(s.nu, w);
    p_mf_j = class_to_joint(s.next, w);
    for (int k = 0; k < w.nk(); ++k) r_mf_total += w.theta(k) * s.rewards[k];
  } else {
    MFStep s = mf_step(env, policy, mu_n);
    nu_mf_j = std::move(s.nu);
    p_mf_j = std::move(s.next);
    for (double r : s.rewards) r_mf_total += r;
  }

  const std::vector<int64_t> start = config.counts();
  std::vector<double> dn(trials), dr(trials), dm(trials);
  const int64_t streams = (trials + kTrialsPerStream - 1) / kTrialsPerStream;
  parallel_for(streams, threads, [&](int64_t sidx) {
    Rng rng = make_rng(seed, static_cast<uint64_t>(sidx));
    const int64_t lo = sidx * kTrialsPerStream;
    const int64_t hi = std::min(trials, lo + kTrialsPerStream);
    for (int64_t i = lo; i < hi; ++i) {
      CountStep s = count_step(env, policy, w, start, rng);
      dn[i] = metric_distance(metric, s.nu, nu_mf_j, w);
      dr[i] = std::fabs(s.reward - r_mf_total);
      const JointDist next =
          joint_from_counts(s.next, w.nk(), env.nx(), w.total());
      dm[i] = metric_distance(metric, next, p_mf_j, w);
    }
  });
  return OneStepDeviation{summarize(dn), summarize(dr), summarize(dm)};
}

McEstimate deviation_nu(const EnvSpec& env, const Policy& policy,
                        const AgentState& config, int64_t trials,
                        uint64_t seed) {
  return one_step_deviation(env, policy, config, trials, seed,
                            DeviationMetric::kJoint)
      .nu;
}

McEstimate deviation_mu(const EnvSpec& env, const Policy& policy,
                        const AgentState& config, int64_t trials,
                        uint64_t seed) {
  return one_step_deviation(env, policy, config, trials, seed,
                            DeviationMetric::kJoint)
      .mu;
}

McEstimate deviation_reward(const EnvSpec& env, const Policy& policy,
                            const AgentState& config, int64_t trials,
                            uint64_t seed) {
  return one_step_deviation(env, policy, config, trials, seed,
                            DeviationMetric::kJoint)
      .reward;
}

void validate_bernoulli_instance(const BernoulliInstance& inst) {
  const size_t mn = static_cast<size_t>(inst.m) * inst.n;
  if (inst.m < 1 || inst.n < 1 || inst.s < 1 || inst.p.size() != mn ||
      inst.coef.size() != mn * inst.s) {
    throw Error(ErrorKind::kInvalidInstance, "Bernoulli instance shape");
  }
  for (double p : inst.p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::kInvalidInstance, "Bernoulli mean outside [0,1]");
    }
  }
  for (int n = 0; n < inst.n; ++n) {
    double col = 0.0;
    for (int m = 0; m < inst.m; ++m) col += inst.p[m * inst.n + n];
    if (std::fabs(col - 1.0) > 1e-9) {
      throw Error(ErrorKind::kInvalidInstance,
                  "sum_m E[X_{m,n}] != 1 for n=" + std::to_string(n));
    }
  }
  for (size_t mnI = 0; mnI < mn; ++mnI) {
    double norm = 0.0;
    for (int s = 0; s < inst.s; ++s) norm += std::fabs(inst.coef[mnI * inst.s + s]);
    if (norm > inst.c * (1.0 + 1e-12)) {
      throw Error(ErrorKind::kInvalidInstance, "|C_{m,n}|_1 exceeds C");
    }
  }
}

BernoulliInstance random_bernoulli_instance(int m, int n, int s, double c,
                                            Rng& rng) {
  BernoulliInstance inst;
  inst.m = m;
  inst.n = n;
  inst.s = s;
  inst.c = c;
  inst.p.assign(static_cast<size_t>(m) * n, 0.0);
  for (int col = 0; col < n; ++col) {
    const std::vector<double> d = sample_dirichlet(m, 1.0, rng);
    for (int r = 0; r < m; ++r) inst.p[r * n + col] = d[r];
  }
  inst.coef.resize(static_cast<size_t>(m) * n * s);
  for (int mn = 0; mn < m * n; ++mn) {
    // Uniform radius fraction times a random signed direction on the sphere
    // of the L1 norm.
    const std::vector<double> dir = sample_dirichlet(s, 1.0, rng);
    const double radius = c * uniform01(rng);
    for (int k = 0; k < s; ++k) {
      const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
      inst.coef[mn * s + k] = sign * radius * dir[k];
    }
  }
  return inst;
}

BernoulliCheck bernoulli_deviation_check(const BernoulliInstance& inst,
                                         int64_t trials, Rng& rng) {
  validate_bernoulli_instance(inst);
  if (trials < 1) throw Error(ErrorKind::kConfigError, "trials must be >= 1");
  std::vector<double> totals(trials);
  std::vector<double> centered(static_cast<size_t>(inst.m) * inst.n);
  for (int64_t t = 0; t < trials; ++t) {
    for (size_t i = 0; i < centered.size(); ++i) {
      centered[i] = (uniform01(rng) < inst.p[i] ? 1.0 : 0.0) - inst.p[i];
    }
    double total = 0.0;
    for (int m = 0; m < inst.m; ++m) {
      for (int s = 0; s < inst.s; ++s) {
        double acc = 0.0;
        for (int n = 0; n < inst.n; ++n) {
          const int mn = m * inst.n + n;
          acc += inst.coef[mn * inst.s + s] * centered[mn];
        }
        total += std::fabs(acc);
      }
    }
    totals[t] = total;
  }
  const McEstimate e = summarize(totals);
  return BernoulliCheck{e.mean, e.stderr_,
                        inst.c * std::sqrt(static_cast<double>(inst.m) *
                                           inst.n * inst.s),
                        false};
}

double bernoulli_deviation_exact(const BernoulliInstance& inst) {
  validate_bernoulli_instance(inst);
  if (inst.n > 20) {
    throw Error(ErrorKind::kInvalidInstance, "exact enumeration needs N <= 20");
  }
  double lhs = 0.0;
  for (int m = 0; m < inst.m; ++m) {
    for (uint32_t mask = 0; mask < (1u << inst.n); ++mask) {
      double prob = 1.0;
      for (int n = 0; n < inst.n; ++n) {
        const double p = inst.p[m * inst.n + n];
        prob *= (mask >> n) & 1u ? p : 1.0 - p;
      }
      if (prob == 0.0) continue;
      for (int s = 0; s < inst.s; ++s) {
        double acc = 0.0;
        for (int n = 0; n < inst.n; ++n) {
          const int mn = m * inst.n + n;
          const double x = (mask >> n) & 1u ? 1.0 : 0.0;
          acc += inst.coef[mn * inst.s + s] * (x - inst.p[mn]);
        }
        lhs += prob * std::fabs(acc);
      }
    }
  }
  return lhs;
}

}  // namespace mfc
