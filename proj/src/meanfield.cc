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

#include "mfc/meanfield.h"

#include <cmath>

#include "mfc/csv.h"

namespace mfc {
namespace {

void check_dims(const EnvSpec& env, const Policy& policy) {
  if (policy.nk() != env.nk() || policy.nx() != env.nx() ||
      policy.nu() != env.nu()) {
    throw Error(ErrorKind::kShapeError, "policy and environment dimensions");
  }
}

void require_joint_family(const EnvSpec& env) {
  if (env.regime() == Regime::kClass) {
    throw Error(ErrorKind::kRegimeError,
                "joint mean-field maps need a joint or marginal environment");
  }
}

void require_class(const EnvSpec& env) {
  if (env.regime() != Regime::kClass) {
    throw Error(ErrorKind::kRegimeError,
                "barred mean-field maps need a class-regime environment");
  }
}

// The maps are linear in the per-class state weights, so one kernel serves
// both normalizations. rows[k * nx + x] is mu(x,k) or mu_bar(x,k); outputs
// use the same convention.
struct Kernel {
  std::vector<double> pi;         // [(k * nx + x) * nu + u]
  std::vector<double> nu_rows;    // [k * nu + u]
  std::vector<double> next_rows;  // [k * nx + x']
  std::vector<double> rewards;    // [k]
};

Kernel policy_pass(const EnvSpec& env, const Policy& policy,
                   const std::vector<double>& rows,
                   std::span<const double> features) {
  const int nk = env.nk(), nx = env.nx(), nu = env.nu();
  Kernel out;
  out.pi.resize(static_cast<size_t>(nk) * nx * nu);
  out.nu_rows.assign(static_cast<size_t>(nk) * nu, 0.0);
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      std::span<double> p =
          std::span<double>(out.pi).subspan((k * nx + x) * nu, nu);
      policy.probs(k, x, features, p);
      const double w = rows[k * nx + x];
      for (int u = 0; u < nu; ++u) out.nu_rows[k * nu + u] += p[u] * w;
    }
  }
  return out;
}

void env_pass(const EnvSpec& env, const std::vector<double>& rows,
              const RegimeArgs& args, Kernel& out) {
  const int nk = env.nk(), nx = env.nx(), nu = env.nu();
  const StepTables tables = build_step_tables(env, args);
  out.next_rows.assign(static_cast<size_t>(nk) * nx, 0.0);
  out.rewards.assign(nk, 0.0);
  for (int k = 0; k < nk; ++k) {
    for (int x = 0; x < nx; ++x) {
      const double wx = rows[k * nx + x];
      if (wx == 0.0) continue;
      for (int u = 0; u < nu; ++u) {
        const double w = wx * out.pi[(k * nx + x) * nu + u];
        if (w == 0.0) continue;
        out.rewards[k] += w * tables.r(k, x, u);
        const auto p = tables.p(k, x, u);
        for (int y = 0; y < nx; ++y) out.next_rows[k * nx + y] += w * p[y];
      }
    }
  }
}

std::vector<double> joint_rows(const JointDist& mu) {
  const int n = mu.n(), nk = mu.nk();
  std::vector<double> rows(static_cast<size_t>(n) * nk);
  for (int k = 0; k < nk; ++k) {
    for (int i = 0; i < n; ++i) rows[k * n + i] = mu(i, k);
  }
  return rows;
}

template <class D>
D joint_from_rows(int n, int nk, const std::vector<double>& rows) {
  std::vector<double> v(static_cast<size_t>(n) * nk);
  for (int k = 0; k < nk; ++k) {
    for (int i = 0; i < n; ++i) v[i * nk + k] = rows[k * n + i];
  }
  return D(n, nk, std::move(v));
}

Kernel joint_kernel(const EnvSpec& env, const Policy& policy,
                    const JointDist& mu, bool with_env,
                    ActionJointDist* nu_out) {
  require_joint_family(env);
  check_dims(env, policy);
  if (mu.n() != env.nx() || mu.nk() != env.nk()) {
    throw Error(ErrorKind::kShapeError, "mu does not match the environment");
  }
  const std::vector<double> rows = joint_rows(mu);
  const std::vector<double> feat = features_from_joint(policy.regime(), mu);
  Kernel k = policy_pass(env, policy, rows, feat);
  ActionJointDist nu =
      joint_from_rows<ActionJointDist>(env.nu(), env.nk(), k.nu_rows);
  if (with_env) env_pass(env, rows, make_regime_args(env, mu, nu), k);
  if (nu_out) *nu_out = std::move(nu);
  return k;
}

Kernel class_kernel(const EnvSpec& env, const Policy& policy,
                    const ClassDistCollection& mu_bar,
                    const ClassWeights& weights, bool with_env,
                    ActionClassDist* nu_out) {
  require_class(env);
  check_dims(env, policy);
  if (mu_bar.n() != env.nx() || mu_bar.nk() != env.nk() ||
      weights.nk() != env.nk()) {
    throw Error(ErrorKind::kShapeError, "mu_bar does not match the environment");
  }
  const std::vector<double> rows(mu_bar.values().begin(),
                                 mu_bar.values().end());
  const std::vector<double> feat =
      features_from_class(policy.regime(), mu_bar, weights.thetas());
  Kernel k = policy_pass(env, policy, rows, feat);
  ActionClassDist nu(env.nu(), env.nk(), k.nu_rows);
  if (with_env) env_pass(env, rows, ClassArgs{mu_bar, nu}, k);
  if (nu_out) *nu_out = std::move(nu);
  return k;
}

}  // namespace

MFStep mf_step(const EnvSpec& env, const Policy& policy, const JointDist& mu) {
  ActionJointDist nu = ActionJointDist::uniform(env.nu(), env.nk());
  Kernel k = joint_kernel(env, policy, mu, true, &nu);
  return MFStep{std::move(nu),
                joint_from_rows<JointDist>(env.nx(), env.nk(), k.next_rows),
                std::move(k.rewards)};
}

ActionJointDist nu_mf(const EnvSpec& env, const Policy& policy,
                      const JointDist& mu) {
  ActionJointDist nu = ActionJointDist::uniform(env.nu(), env.nk());
  joint_kernel(env, policy, mu, false, &nu);
  return nu;
}

JointDist p_mf(const EnvSpec& env, const Policy& policy, const JointDist& mu) {
  return mf_step(env, policy, mu).next;
}

std::vector<double> r_mf(const EnvSpec& env, const Policy& policy,
                         const JointDist& mu) {
  return mf_step(env, policy, mu).rewards;
}

MFBarStep mf_step_bar(const EnvSpec& env, const Policy& policy,
                      const ClassDistCollection& mu_bar,
                      const ClassWeights& weights) {
  ActionClassDist nu = ActionClassDist::uniform(env.nu(), env.nk());
  Kernel k = class_kernel(env, policy, mu_bar, weights, true, &nu);
  return MFBarStep{std::move(nu),
                   ClassDistCollection(env.nx(), env.nk(), k.next_rows),
                   std::move(k.rewards)};
}

ActionClassDist nu_mf_bar(const EnvSpec& env, const Policy& policy,
                          const ClassDistCollection& mu_bar,
                          const ClassWeights& weights) {
  ActionClassDist nu = ActionClassDist::uniform(env.nu(), env.nk());
  class_kernel(env, policy, mu_bar, weights, false, &nu);
  return nu;
}

ClassDistCollection p_mf_bar(const EnvSpec& env, const Policy& policy,
                             const ClassDistCollection& mu_bar,
                             const ClassWeights& weights) {
  return mf_step_bar(env, policy, mu_bar, weights).next;
}

std::vector<double> r_mf_bar(const EnvSpec& env, const Policy& policy,
                             const ClassDistCollection& mu_bar,
                             const ClassWeights& weights) {
  return mf_step_bar(env, policy, mu_bar, weights).rewards;
}

int truncation_horizon(double gamma, double scale, double tol) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::kInvalidDiscount, "gamma must lie in [0,1)");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::kConfigError, "tol must be > 0");
  int t = 0;
  double tail = scale * gamma / (1.0 - gamma);
  while (tail >= tol) {
    ++t;
    tail *= gamma;
  }
  return t;
}

MFValue v_mf(const EnvSpec& env, const Policy& policy, const JointDist& mu0,
             double tol) {
  require_joint_family(env);
  const int horizon =
      truncation_horizon(env.gamma(), env.nk() * env.declared().m_r, tol);
  MFValue out{0.0, horizon};
  JointDist mu = mu0;
  double discount = 1.0;
  for (int t = 0; t <= horizon; ++t) {
    MFStep s = mf_step(env, policy, mu);
    for (double r : s.rewards) out.value += discount * r;
    discount *= env.gamma();
    mu = std::move(s.next);
  }
  return out;
}

MFValue v_mf_bar(const EnvSpec& env, const Policy& policy,
                 const ClassDistCollection& mu_bar0,
                 const ClassWeights& weights, double tol) {
  require_class(env);
  const int horizon =
      truncation_horizon(env.gamma(), env.declared().m_r, tol);
  MFValue out{0.0, horizon};
  ClassDistCollection mu = mu_bar0;
  double discount = 1.0;
  for (int t = 0; t <= horizon; ++t) {
    MFBarStep s = mf_step_bar(env, policy, mu, weights);
    for (int k = 0; k < env.nk(); ++k) {
      out.value += discount * weights.theta(k) * s.rewards[k];
    }
    discount *= env.gamma();
    mu = std::move(s.next);
  }
  return out;
}

MFTrajectory mf_rollout(const EnvSpec& env, const Policy& policy,
                        const JointDist& mu0, int horizon) {
  if (horizon < 0) throw Error(ErrorKind::kConfigError, "horizon must be >= 0");
  MFTrajectory traj;
  JointDist mu = mu0;
  for (int t = 0; t <= horizon; ++t) {
    MFStep s = mf_step(env, policy, mu);
    traj.mu.push_back(mu);
    traj.nu.push_back(std::move(s.nu));
    traj.rewards.push_back(std::move(s.rewards));
    mu = std::move(s.next);
  }
  return traj;
}

MFBarTrajectory mf_rollout_bar(const EnvSpec& env, const Policy& policy,
                               const ClassDistCollection& mu_bar0,
                               const ClassWeights& weights, int horizon) {
  if (horizon < 0) throw Error(ErrorKind::kConfigError, "horizon must be >= 0");
  MFBarTrajectory traj;
  ClassDistCollection mu = mu_bar0;
  for (int t = 0; t <= horizon; ++t) {
    MFBarStep s = mf_step_bar(env, policy, mu, weights);
    traj.mu.push_back(mu);
    traj.nu.push_back(std::move(s.nu));
    traj.rewards.push_back(std::move(s.rewards));
    mu = std::move(s.next);
  }
  return traj;
}

namespace {

template <class Traj>
void write_traj(const Traj& traj, std::ostream& out, const char* mu_name,
                const char* nu_name) {
  if (traj.mu.empty()) return;
  const int nx = traj.mu[0].n(), nu = traj.nu[0].n(), nk = traj.mu[0].nk();
  std::vector<std::string> cols = {"t"};
  for (int x = 0; x < nx; ++x)
    for (int k = 0; k < nk; ++k)
      cols.push_back(std::string(mu_name) + "_" + std::to_string(x) + "_" +
                     std::to_string(k));
  for (int u = 0; u < nu; ++u)
    for (int k = 0; k < nk; ++k)
      cols.push_back(std::string(nu_name) + "_" + std::to_string(u) + "_" +
                     std::to_string(k));
  for (int k = 0; k < nk; ++k) cols.push_back("r_" + std::to_string(k));
  CsvWriter csv(out, cols);
  for (size_t t = 0; t < traj.mu.size(); ++t) {
    csv.cell(static_cast<int64_t>(t));
    for (int x = 0; x < nx; ++x)
      for (int k = 0; k < nk; ++k) csv.cell(traj.mu[t](x, k));
    for (int u = 0; u < nu; ++u)
      for (int k = 0; k < nk; ++k) csv.cell(traj.nu[t](u, k));
    for (double r : traj.rewards[t]) csv.cell(r);
    csv.end_row();
  }
}

}  // namespace

void write_csv(const MFTrajectory& traj, std::ostream& out) {
  write_traj(traj, out, "mu", "nu");
}

void write_csv(const MFBarTrajectory& traj, std::ostream& out) {
  write_traj(traj, out, "mubar", "nubar");
}

}  // namespace mfc
