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

#ifndef MFC_ENVIRONMENT_H_
#define MFC_ENVIRONMENT_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfc/distributions.h"
#include "mfc/random.h"

namespace mfc {

struct JointArgs {
  JointDist state;
  ActionJointDist action;
};
struct ClassArgs {
  ClassDistCollection state;
  ActionClassDist action;
};
struct MarginalArgs {
  MarginalDist state;
  ActionMarginalDist action;
};
using RegimeArgs = std::variant<JointArgs, ClassArgs, MarginalArgs>;

Regime regime_of(const RegimeArgs& args);

// Declared (M_R, L_R, L_P) for joint/marginal environments, or the barred
// (M̄_R, L̄_R, L̄_P) for class environments.
struct LipschitzConstants {
  double m_r = 0.0;
  double l_r = 0.0;
  double l_p = 0.0;
};

using RewardFn =
    std::function<double(int k, int x, int u, const RegimeArgs& args)>;
// Writes P_k(x, u, args) into out (length nx).
using TransitionFn = std::function<void(int k, int x, int u,
                                        const RegimeArgs& args,
                                        std::span<double> out)>;

class EnvSpec {
 public:
  EnvSpec(std::string name, int nx, int nu, int nk, double gamma,
          Regime regime, RewardFn reward, TransitionFn transition,
          LipschitzConstants declared);

  const std::string& name() const { return name_; }
  int nx() const { return nx_; }
  int nu() const { return nu_; }
  int nk() const { return nk_; }
  double gamma() const { return gamma_; }
  Regime regime() const { return regime_; }
  const LipschitzConstants& declared() const { return declared_; }
  const RewardFn& reward_fn() const { return reward_; }
  const TransitionFn& transition_fn() const { return transition_; }

  // Translated environments are only defined on theta-compatible joint
  // distributions; they remember the class weights they were built for.
  const std::optional<ClassWeights>& pinned_weights() const { return pinned_; }
  void pin_weights(ClassWeights w) { pinned_ = std::move(w); }

  EnvSpec with_gamma(double gamma) const;

 private:
  std::string name_;
  int nx_;
  int nu_;
  int nk_;
  double gamma_;
  Regime regime_;
  RewardFn reward_;
  TransitionFn transition_;
  LipschitzConstants declared_;
  std::optional<ClassWeights> pinned_;
};

double reward_eval(const EnvSpec& env, int k, int x, int u,
                   const RegimeArgs& args);
MarginalDist transition_dist(const EnvSpec& env, int k, int x, int u,
                             const RegimeArgs& args);
int transition_sample(const EnvSpec& env, int k, int x, int u,
                      const RegimeArgs& args, Rng& rng);

// Arguments in the environment's own regime, built from joint (mu, nu).
// Class arguments use the distributions' own class masses as theta.
RegimeArgs make_regime_args(const EnvSpec& env, const JointDist& mu,
                            const ActionJointDist& nu);
// Same from per-class collections and class weights theta.
RegimeArgs make_regime_args(const EnvSpec& env, const ClassDistCollection& mu,
                            const ActionClassDist& nu,
                            std::span<const double> theta);

// Every reward and transition row for one set of distribution arguments.
// Rows are validated (normalized) once here so hot loops can index freely.
struct StepTables {
  int nk = 0;
  int nx = 0;
  int nu = 0;
  std::vector<double> reward;      // [(k * nx + x) * nu + u]
  std::vector<double> transition;  // [((k * nx + x) * nu + u) * nx + x']
  double r(int k, int x, int u) const { return reward[(k * nx + x) * nu + u]; }
  std::span<const double> p(int k, int x, int u) const {
    return std::span<const double>(transition)
        .subspan(((k * nx + x) * nu + u) * nx, nx);
  }
};
StepTables build_step_tables(const EnvSpec& env, const RegimeArgs& args);

enum class LipschitzField { kReward, kTransition };

// Empirical sup of |f(a) - f(b)| / (|mu-mu'|_1 + |nu-nu'|_1) over Dirichlet(1)
// pairs drawn on the environment's simplex, maximized over every (k, x, u).
// Pinned environments draw theta-compatible pairs.
double estimate_lipschitz(const EnvSpec& env, LipschitzField field,
                          int samples, Rng& rng);

// A random argument pair for the environment's regime (used by the Lipschitz
// estimator and the lemma sweeps).
RegimeArgs random_regime_args(const EnvSpec& env, Rng& rng);

// Class-regime system seen as a joint system on P_theta. Constants inflate
// by theta_M^{-1} in L_R and L_P.
EnvSpec translate_class_to_joint(const EnvSpec& class_env,
                                 const ClassWeights& weights);
// Joint (or marginal) system seen through per-class collections. Since
// |mu - mu'|_1 <= |mu_bar - mu_bar'|_1 the constants carry over unchanged.
EnvSpec translate_joint_to_class(const EnvSpec& joint_env,
                                 const ClassWeights& weights);

}  // namespace mfc

#endif  // MFC_ENVIRONMENT_H_
