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

#ifndef MFC_MEANFIELD_H_
#define MFC_MEANFIELD_H_

#include <ostream>
#include <vector>

#include "mfc/distributions.h"
#include "mfc/environment.h"
#include "mfc/policy.h"

namespace mfc {

// One application of the mean-field maps: nu^MF(mu), P^MF(mu), r^MF(mu).
struct MFStep {
  ActionJointDist nu;
  JointDist next;
  std::vector<double> rewards;  // r_k^MF, carries the class mass of k
};
struct MFBarStep {
  ActionClassDist nu;
  ClassDistCollection next;
  std::vector<double> rewards;  // r_bar_k^MF, a per-class average
};

// Joint-regime maps. Marginal-regime environments go through the same maps
// (their callables only read marginals). Class-regime environments are
// rejected; use the barred maps or translate the environment first.
MFStep mf_step(const EnvSpec& env, const Policy& policy, const JointDist& mu);
ActionJointDist nu_mf(const EnvSpec& env, const Policy& policy,
                      const JointDist& mu);
JointDist p_mf(const EnvSpec& env, const Policy& policy, const JointDist& mu);
std::vector<double> r_mf(const EnvSpec& env, const Policy& policy,
                         const JointDist& mu);

// Barred maps; class-regime environments only.
MFBarStep mf_step_bar(const EnvSpec& env, const Policy& policy,
                      const ClassDistCollection& mu_bar,
                      const ClassWeights& weights);
ActionClassDist nu_mf_bar(const EnvSpec& env, const Policy& policy,
                          const ClassDistCollection& mu_bar,
                          const ClassWeights& weights);
ClassDistCollection p_mf_bar(const EnvSpec& env, const Policy& policy,
                             const ClassDistCollection& mu_bar,
                             const ClassWeights& weights);
std::vector<double> r_mf_bar(const EnvSpec& env, const Policy& policy,
                             const ClassDistCollection& mu_bar,
                             const ClassWeights& weights);

struct MFValue {
  double value = 0.0;
  int horizon = 0;  // last t included in the truncated sum
};

// sum_k sum_{t<=T} gamma^t r_k^MF(mu_t), with the smallest T such that
// K M_R gamma^{T+1} / (1 - gamma) < tol. Classes are not weighted here.
MFValue v_mf(const EnvSpec& env, const Policy& policy, const JointDist& mu0,
             double tol);
// sum_k theta_k sum_t gamma^t r_bar_k^MF(mu_bar_t); T from
// M_R gamma^{T+1} / (1 - gamma) < tol since the theta weights sum to 1.
MFValue v_mf_bar(const EnvSpec& env, const Policy& policy,
                 const ClassDistCollection& mu_bar0,
                 const ClassWeights& weights, double tol);

// Smallest T with scale * gamma^{T+1} / (1 - gamma) < tol.
int truncation_horizon(double gamma, double scale, double tol);

template <class S, class A>
struct BasicTrajectory {
  std::vector<S> mu;
  std::vector<A> nu;
  std::vector<std::vector<double>> rewards;
  int horizon() const { return static_cast<int>(mu.size()) - 1; }
};
using MFTrajectory = BasicTrajectory<JointDist, ActionJointDist>;
using MFBarTrajectory = BasicTrajectory<ClassDistCollection, ActionClassDist>;

MFTrajectory mf_rollout(const EnvSpec& env, const Policy& policy,
                        const JointDist& mu0, int horizon);
MFBarTrajectory mf_rollout_bar(const EnvSpec& env, const Policy& policy,
                               const ClassDistCollection& mu_bar0,
                               const ClassWeights& weights, int horizon);

// One row per t: t, flattened mu_t, flattened nu_t, per-class rewards.
void write_csv(const MFTrajectory& traj, std::ostream& out);
void write_csv(const MFBarTrajectory& traj, std::ostream& out);

}  // namespace mfc

#endif  // MFC_MEANFIELD_H_
