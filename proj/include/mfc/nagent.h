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

#ifndef MFC_NAGENT_H_
#define MFC_NAGENT_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "mfc/distributions.h"
#include "mfc/environment.h"
#include "mfc/policy.h"
#include "mfc/random.h"

namespace mfc {

class AgentState {
 public:
  AgentState(ClassWeights weights, std::vector<std::vector<int>> states,
             int nx);
  // Agent j of class k starts in state j mod nx.
  static AgentState round_robin(const ClassWeights& weights, int nx);

  const ClassWeights& weights() const { return weights_; }
  int nx() const { return nx_; }
  const std::vector<std::vector<int>>& states() const { return states_; }
  JointDist empirical_joint() const;
  ClassDistCollection empirical_class() const;
  // counts[k * nx + x].
  std::vector<int64_t> counts() const;

 private:
  ClassWeights weights_;
  std::vector<std::vector<int>> states_;
  int nx_;
};

struct StepRecord {
  AgentState next;
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<double>> rewards;
  JointDist mu;
  ActionJointDist nu;
};

// One synchronous step. The empirical state distribution is formed before
// any action is drawn and the empirical action distribution before any
// transition, so every agent sees the same (mu^N, nu^N).
StepRecord simulate_step(const EnvSpec& env, const Policy& policy,
                         const AgentState& state, Rng& rng);

struct SimTrajectory {
  std::vector<AgentState> states;  // x_0 .. x_T
  std::vector<std::vector<std::vector<int>>> actions;
  std::vector<std::vector<std::vector<double>>> rewards;
  std::vector<JointDist> mu;
  std::vector<ActionJointDist> nu;
  int horizon() const { return static_cast<int>(actions.size()) - 1; }
};

// Steps t = 0..horizon.
SimTrajectory simulate(const EnvSpec& env, const Policy& policy,
                       const AgentState& x0, int horizon, Rng& rng);
// Long format: t, class, agent, state, action, reward.
void write_csv(const SimTrajectory& traj, std::ostream& out);

struct ValueEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int64_t reps = 0;
  int horizon = 0;
  double tail_bound = 0.0;
  double ci95() const { return 1.96 * stderr_; }
};

// Mean of `reps` independent truncated discounted returns of
// (1/N_pop) sum_{k,j} r_{j,k}; T is the smallest horizon with
// M_R gamma^{T+1} / (1 - gamma) < tol. Replication i draws from stream
// (seed, i), so the result does not depend on `threads`.
ValueEstimate v_n_estimate(const EnvSpec& env, const Policy& policy,
                           const AgentState& x0, int64_t reps, double tol,
                           uint64_t seed, int threads = 1);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int64_t trials = 0;
  double ci95() const { return 1.96 * stderr_; }
};

enum class DeviationMetric { kJoint, kClass, kMarginal };

// Monte-Carlo estimates of one-step deviations from a fixed configuration:
// |nu^N - nu^MF(mu^N)|_1, |(1/N) sum r - mean-field reward| and
// |mu^N_{t+1} - P^MF(mu^N)|_1, measured in the joint, per-class or
// marginal metric.
struct OneStepDeviation {
  McEstimate nu;
  McEstimate reward;
  McEstimate mu;
};
OneStepDeviation one_step_deviation(const EnvSpec& env, const Policy& policy,
                                    const AgentState& config, int64_t trials,
                                    uint64_t seed, DeviationMetric metric,
                                    int threads = 1);

McEstimate deviation_nu(const EnvSpec& env, const Policy& policy,
                        const AgentState& config, int64_t trials,
                        uint64_t seed);
McEstimate deviation_mu(const EnvSpec& env, const Policy& policy,
                        const AgentState& config, int64_t trials,
                        uint64_t seed);
McEstimate deviation_reward(const EnvSpec& env, const Policy& policy,
                            const AgentState& config, int64_t trials,
                            uint64_t seed);

// Coefficients C[(m * N + n) * S + s] and Bernoulli means p[m * N + n].
struct BernoulliInstance {
  int m = 1;
  int n = 1;
  int s = 1;
  std::vector<double> p;
  std::vector<double> coef;
  double c = 1.0;  // declared bound on every |C_{m,n}|_1
};

// Random instance: each column n gets a Dirichlet(1) vector over m (so the
// column-sum constraint holds) and coefficients uniform on the L1 ball of
// radius c.
BernoulliInstance random_bernoulli_instance(int m, int n, int s, double c,
                                            Rng& rng);

struct BernoulliCheck {
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  bool exact = false;
};

// sum_s sum_m E|sum_n C_{m,n}(s) (X_{m,n} - E X_{m,n})| with every X_{m,n}
// independent. Throws InvalidInstance when the constraints fail.
BernoulliCheck bernoulli_deviation_check(const BernoulliInstance& inst,
                                         int64_t trials, Rng& rng);
// Exact left-hand side by enumerating 2^N outcomes per m (N <= 20).
double bernoulli_deviation_exact(const BernoulliInstance& inst);
void validate_bernoulli_instance(const BernoulliInstance& inst);

// Count-based engine: one step of the N-agent system driven by multinomial
// draws per (class, state) and (class, state, action). Equivalent in law to
// simulate_step but with cost independent of N_pop.
struct CountStep {
  std::vector<int64_t> next;     // [k * nx + x']
  std::vector<int64_t> actions;  // [k * nu + u]
  double reward = 0.0;           // (1/N_pop) sum_{k,j} r_{j,k}
  JointDist mu;
  ActionJointDist nu;
};
CountStep count_step(const EnvSpec& env, const Policy& policy,
                     const ClassWeights& weights,
                     const std::vector<int64_t>& counts, Rng& rng);

}  // namespace mfc

#endif  // MFC_NAGENT_H_
