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

#ifndef MFC_POLICY_H_
#define MFC_POLICY_H_

#include <span>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mfc/distributions.h"
#include "mfc/environment.h"
#include "mfc/random.h"

namespace mfc {

// Logits are clamped to [-kLogitClamp, kLogitClamp] before the softmax, so
// every action keeps probability at least exp(-2 kLogitClamp) / |U|.
inline constexpr double kLogitClamp = 30.0;

// "TabularSoftmaxLinearMu": logit(k,x,u) = A[k,x,u] + sum_f B[k,x,u,f] feat_f
// where feat is the flattened distribution the regime conditions on
// (mu for joint, mu_bar for class, mu[X] for marginal).
struct PolicyArch {
  Regime regime = Regime::kJoint;
  int nk = 1;
  int nx = 1;
  int nu = 1;

  int feature_dim() const { return regime == Regime::kMarginal ? nx : nx * nk; }
  int table_size() const { return nk * nx * nu; }
  int dim() const { return table_size() * (1 + feature_dim()); }
  int a_index(int k, int x, int u) const { return (k * nx + x) * nu + u; }
  int b_index(int k, int x, int u, int f) const {
    return table_size() + a_index(k, x, u) * feature_dim() + f;
  }
  bool operator==(const PolicyArch& o) const {
    return regime == o.regime && nk == o.nk && nx == o.nx && nu == o.nu;
  }
};

PolicyArch arch_for(const EnvSpec& env);

struct PolicyParams {
  PolicyParams(PolicyArch arch, std::vector<double> phi);
  static PolicyParams zeros(const PolicyArch& arch);
  // Entries drawn N(0, scale^2); feature weights scaled by feature_scale.
  static PolicyParams random(const PolicyArch& arch, double scale,
                             double feature_scale, Rng& rng);

  int d() const { return static_cast<int>(phi.size()); }

  PolicyArch arch;
  std::vector<double> phi;
};

// Phi_1..Phi_J plus the value of each iterate.
struct PolicySnapshot {
  std::vector<PolicyParams> iterates;
  std::vector<double> values;
};

nlohmann::json to_json(const PolicyParams& params);
PolicyParams policy_params_from_json(const nlohmann::json& doc);

using StateArg = std::variant<JointDist, ClassDistCollection, MarginalDist>;

// Flattened conditioning features; the argument must match the regime.
std::vector<double> policy_features(Regime regime, const StateArg& dist);
// Features for `regime` derived from a joint distribution. Class features use
// the distribution's own class masses as theta.
std::vector<double> features_from_joint(Regime regime, const JointDist& mu);
std::vector<double> features_from_class(Regime regime,
                                        const ClassDistCollection& mu_bar,
                                        std::span<const double> theta);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Regime regime() const = 0;
  virtual int nk() const = 0;
  virtual int nx() const = 0;
  virtual int nu() const = 0;
  // pi_k(x, feat) written into out (length nu).
  virtual void probs(int k, int x, std::span<const double> features,
                     std::span<double> out) const = 0;
  // Certified Lipschitz constant w.r.t. the conditioning distribution.
  virtual double lipschitz_q() const;
};

class SoftmaxPolicy : public Policy {
 public:
  explicit SoftmaxPolicy(PolicyParams params);

  Regime regime() const override { return params_.arch.regime; }
  int nk() const override { return params_.arch.nk; }
  int nx() const override { return params_.arch.nx; }
  int nu() const override { return params_.arch.nu; }
  void probs(int k, int x, std::span<const double> features,
             std::span<double> out) const override;
  double lipschitz_q() const override;

  const PolicyParams& params() const { return params_; }

  // Adds grad_phi log pi_k(x, feat)(u) to grad.
  void add_score(int k, int x, int u, std::span<const double> features,
                 std::span<double> grad) const;

 private:
  // Clamped logits; clamped[u] records whether the clamp was active.
  void logits(int k, int x, std::span<const double> features,
              std::span<double> out, std::vector<char>* clamped) const;

  PolicyParams params_;
};

// A fixed table pi[k][x][u] that ignores the distribution argument.
class FixedPolicy : public Policy {
 public:
  FixedPolicy(Regime regime, int nk, int nx, int nu, std::vector<double> table);
  static FixedPolicy uniform(const EnvSpec& env);
  static FixedPolicy deterministic(const EnvSpec& env,
                                   const std::vector<int>& action_of_state);

  Regime regime() const override { return regime_; }
  int nk() const override { return nk_; }
  int nx() const override { return nx_; }
  int nu() const override { return nu_; }
  void probs(int k, int x, std::span<const double> features,
             std::span<double> out) const override;
  double lipschitz_q() const override { return 0.0; }

 private:
  Regime regime_;
  int nk_, nx_, nu_;
  std::vector<double> table_;
};

ActionMarginalDist evaluate(const Policy& policy, int k, int x,
                            const StateArg& dist);

// sum_k grad log pi_k(x_k, mu)(u_k), one state and action per class.
std::vector<double> score_gradient(const SoftmaxPolicy& policy,
                                   std::span<const int> xs,
                                   const StateArg& dist,
                                   std::span<const int> us);

double lipschitz_Q(const PolicyParams& params);

}  // namespace mfc

#endif  // MFC_POLICY_H_
