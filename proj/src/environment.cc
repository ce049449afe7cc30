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

#include "mfc/environment.h"

#include <algorithm>
#include <cmath>

namespace mfc {

Regime regime_of(const RegimeArgs& args) {
  switch (args.index()) {
    case 0: return Regime::kJoint;
    case 1: return Regime::kClass;
    default: return Regime::kMarginal;
  }
}

EnvSpec::EnvSpec(std::string name, int nx, int nu, int nk, double gamma,
                 Regime regime, RewardFn reward, TransitionFn transition,
                 LipschitzConstants declared)
    : name_(std::move(name)),
      nx_(nx),
      nu_(nu),
      nk_(nk),
      gamma_(gamma),
      regime_(regime),
      reward_(std::move(reward)),
      transition_(std::move(transition)),
      declared_(declared) {
  if (nx < 1 || nu < 1 || nk < 1) {
    throw Error(ErrorKind::kShapeError, "environment dimensions must be >= 1");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::kInvalidDiscount, "gamma must lie in [0,1)");
  }
}

EnvSpec EnvSpec::with_gamma(double gamma) const {
  EnvSpec copy(name_, nx_, nu_, nk_, gamma, regime_, reward_, transition_,
               declared_);
  copy.pinned_ = pinned_;
  return copy;
}

namespace {

void check_call(const EnvSpec& env, int k, int x, int u,
                const RegimeArgs& args) {
  if (regime_of(args) != env.regime()) {
    throw Error(ErrorKind::kRegimeError,
                std::string("env '") + env.name() + "' expects " +
                    regime_name(env.regime()) + " arguments, got " +
                    regime_name(regime_of(args)));
  }
  if (k < 0 || k >= env.nk() || x < 0 || x >= env.nx() || u < 0 ||
      u >= env.nu()) {
    throw Error(ErrorKind::kInvalidState, "index out of range in env call");
  }
}

}  // namespace

double reward_eval(const EnvSpec& env, int k, int x, int u,
                   const RegimeArgs& args) {
  check_call(env, k, x, u, args);
  return env.reward_fn()(k, x, u, args);
}

MarginalDist transition_dist(const EnvSpec& env, int k, int x, int u,
                             const RegimeArgs& args) {
  check_call(env, k, x, u, args);
  std::vector<double> out(env.nx(), 0.0);
  env.transition_fn()(k, x, u, args, out);
  return MarginalDist(std::move(out));
}

int transition_sample(const EnvSpec& env, int k, int x, int u,
                      const RegimeArgs& args, Rng& rng) {
  const MarginalDist p = transition_dist(env, k, x, u, args);
  return sample_categorical(p.values(), rng);
}

RegimeArgs make_regime_args(const EnvSpec& env, const JointDist& mu,
                            const ActionJointDist& nu) {
  switch (env.regime()) {
    case Regime::kJoint:
      return JointArgs{mu, nu};
    case Regime::kClass:
      return ClassArgs{joint_to_class_by_mass(mu), joint_to_class_by_mass(nu)};
    case Regime::kMarginal:
      return MarginalArgs{marginal(mu), marginal(nu)};
  }
  throw Error(ErrorKind::kRegimeError, "unknown regime");
}

RegimeArgs make_regime_args(const EnvSpec& env, const ClassDistCollection& mu,
                            const ActionClassDist& nu,
                            std::span<const double> theta) {
  if (env.regime() == Regime::kClass) return ClassArgs{mu, nu};
  return make_regime_args(env, class_to_joint(mu, theta),
                          class_to_joint(nu, theta));
}

StepTables build_step_tables(const EnvSpec& env, const RegimeArgs& args) {
  check_call(env, 0, 0, 0, args);
  StepTables t;
  t.nk = env.nk();
  t.nx = env.nx();
  t.nu = env.nu();
  const size_t rows = static_cast<size_t>(t.nk) * t.nx * t.nu;
  t.reward.resize(rows);
  t.transition.assign(rows * t.nx, 0.0);
  size_t row = 0;
  for (int k = 0; k < t.nk; ++k) {
    for (int x = 0; x < t.nx; ++x) {
      for (int u = 0; u < t.nu; ++u, ++row) {
        t.reward[row] = env.reward_fn()(k, x, u, args);
        std::span<double> out =
            std::span<double>(t.transition).subspan(row * t.nx, t.nx);
        env.transition_fn()(k, x, u, args, out);
        normalize_in_place(out, "transition row");
      }
    }
  }
  return t;
}

namespace {

template <class Space>
BasicClassDist<Space> random_class(int n, int nk, Rng& rng) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(n) * nk);
  for (int k = 0; k < nk; ++k) {
    const std::vector<double> row = sample_dirichlet(n, 1.0, rng);
    v.insert(v.end(), row.begin(), row.end());
  }
  return BasicClassDist<Space>(n, nk, std::move(v));
}

double args_distance(const RegimeArgs& a, const RegimeArgs& b) {
  return std::visit(
      [&](const auto& lhs) -> double {
        const auto& rhs = std::get<std::decay_t<decltype(lhs)>>(b);
        return l1_distance(lhs.state, rhs.state) +
               l1_distance(lhs.action, rhs.action);
      },
      a);
}

}  // namespace

RegimeArgs random_regime_args(const EnvSpec& env, Rng& rng) {
  const int nx = env.nx();
  const int nu = env.nu();
  const int nk = env.nk();
  switch (env.regime()) {
    case Regime::kJoint:
      if (env.pinned_weights()) {
        const auto& w = *env.pinned_weights();
        return JointArgs{class_to_joint(random_class<StateSpace>(nx, nk, rng), w),
                         class_to_joint(random_class<ActionSpace>(nu, nk, rng), w)};
      }
      return JointArgs{JointDist(nx, nk, sample_dirichlet(nx * nk, 1.0, rng)),
                       ActionJointDist(nu, nk,
                                       sample_dirichlet(nu * nk, 1.0, rng))};
    case Regime::kClass:
      return ClassArgs{random_class<StateSpace>(nx, nk, rng),
                       random_class<ActionSpace>(nu, nk, rng)};
    case Regime::kMarginal:
      return MarginalArgs{MarginalDist(sample_dirichlet(nx, 1.0, rng)),
                          ActionMarginalDist(sample_dirichlet(nu, 1.0, rng))};
  }
  throw Error(ErrorKind::kRegimeError, "unknown regime");
}

double estimate_lipschitz(const EnvSpec& env, LipschitzField field,
                          int samples, Rng& rng) {
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const RegimeArgs a = random_regime_args(env, rng);
    const RegimeArgs b = random_regime_args(env, rng);
    const double denom = args_distance(a, b);
    if (denom < 1e-12) continue;
    const StepTables ta = build_step_tables(env, a);
    const StepTables tb = build_step_tables(env, b);
    if (field == LipschitzField::kReward) {
      for (size_t i = 0; i < ta.reward.size(); ++i) {
        best = std::max(best, std::fabs(ta.reward[i] - tb.reward[i]) / denom);
      }
    } else {
      const size_t rows = ta.reward.size();
      for (size_t i = 0; i < rows; ++i) {
        const auto pa =
            std::span<const double>(ta.transition).subspan(i * ta.nx, ta.nx);
        const auto pb =
            std::span<const double>(tb.transition).subspan(i * tb.nx, tb.nx);
        best = std::max(best, l1_distance(pa, pb) / denom);
      }
    }
  }
  return best;
}

EnvSpec translate_class_to_joint(const EnvSpec& class_env,
                                 const ClassWeights& weights) {
  if (class_env.regime() != Regime::kClass) {
    throw Error(ErrorKind::kRegimeError,
                "translate_class_to_joint needs a class-regime environment");
  }
  if (weights.nk() != class_env.nk()) {
    throw Error(ErrorKind::kShapeError, "class weights do not match K");
  }
  auto to_class = [weights](const RegimeArgs& args) -> RegimeArgs {
    const auto& j = std::get<JointArgs>(args);
    return ClassArgs{joint_to_class(j.state, weights),
                     joint_to_class(j.action, weights)};
  };
  RewardFn reward = [base = class_env.reward_fn(), to_class](
                        int k, int x, int u, const RegimeArgs& args) {
    return base(k, x, u, to_class(args));
  };
  TransitionFn transition = [base = class_env.transition_fn(), to_class](
                                int k, int x, int u, const RegimeArgs& args,
                                std::span<double> out) {
    base(k, x, u, to_class(args), out);
  };
  const double inflate = weights.theta_max_inverse();
  const LipschitzConstants& bar = class_env.declared();
  EnvSpec out(class_env.name() + "-as-joint", class_env.nx(), class_env.nu(),
              class_env.nk(), class_env.gamma(), Regime::kJoint,
              std::move(reward), std::move(transition),
              {bar.m_r, bar.l_r * inflate, bar.l_p * inflate});
  out.pin_weights(weights);
  return out;
}

EnvSpec translate_joint_to_class(const EnvSpec& joint_env,
                                 const ClassWeights& weights) {
  if (joint_env.regime() == Regime::kClass) {
    throw Error(ErrorKind::kRegimeError,
                "translate_joint_to_class needs a joint or marginal environment");
  }
  if (weights.nk() != joint_env.nk()) {
    throw Error(ErrorKind::kShapeError, "class weights do not match K");
  }
  const Regime inner = joint_env.regime();
  auto to_joint = [weights, inner](const RegimeArgs& args) -> RegimeArgs {
    const auto& c = std::get<ClassArgs>(args);
    JointDist mu = class_to_joint(c.state, weights);
    ActionJointDist nu = class_to_joint(c.action, weights);
    if (inner == Regime::kMarginal) {
      return MarginalArgs{marginal(mu), marginal(nu)};
    }
    return JointArgs{std::move(mu), std::move(nu)};
  };
  RewardFn reward = [base = joint_env.reward_fn(), to_joint](
                        int k, int x, int u, const RegimeArgs& args) {
    return base(k, x, u, to_joint(args));
  };
  TransitionFn transition = [base = joint_env.transition_fn(), to_joint](
                                int k, int x, int u, const RegimeArgs& args,
                                std::span<double> out) {
    base(k, x, u, to_joint(args), out);
  };
  EnvSpec out(joint_env.name() + "-as-class", joint_env.nx(), joint_env.nu(),
              joint_env.nk(), joint_env.gamma(), Regime::kClass,
              std::move(reward), std::move(transition), joint_env.declared());
  out.pin_weights(weights);
  return out;
}

}  // namespace mfc
