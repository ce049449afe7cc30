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

#ifndef MFC_NPG_H_
#define MFC_NPG_H_

#include <cstdint>
#include <vector>

#include "mfc/distributions.h"
#include "mfc/environment.h"
#include "mfc/policy.h"
#include "mfc/random.h"

namespace mfc {

// kLiteral draws one reward sum from (x_T, mu_T, u_T) and only then assigns
// it to V or Q by a fair coin, so E[A] = 0.
// kCorrected flips the coin first; the V branch resamples u_T from the policy
// before summing. Its expectation is the advantage.
enum class AdvantageVariant { kCorrected, kLiteral };
// kTheta weights class rewards by the class masses of mu0 inside the reward
// sum; kUnweighted sums them as the mean-field value does.
enum class RewardWeighting { kTheta, kUnweighted };

struct SamplerOptions {
  AdvantageVariant variant = AdvantageVariant::kCorrected;
  RewardWeighting weighting = RewardWeighting::kTheta;
};

// Largest stop time either geometric loop may reach; beyond it the
// remaining probability mass is below 1e-8. Zero when gamma = 0.
int horizon_cap(double gamma);

struct OccupancySample {
  std::vector<int> x;
  JointDist mu = JointDist::uniform(1, 1);
  std::vector<int> u;
  double advantage = 0.0;
  int stop_time = 0;
  int sum_length = 0;  // number of rewards in the second loop
  bool q_branch = false;
  bool horizon_cap_hit = false;
};

// Draws (x, mu, u) ~ zeta and an advantage estimate. The mean-field path
// mu_0, mu_1, ... is deterministic given the policy, so it is computed once
// up to twice the horizon cap and shared by every draw; sample() is then
// safe to call from several threads with separate generators.
class OccupationSampler {
 public:
  OccupationSampler(const EnvSpec& env, const Policy& policy, JointDist mu0,
                    SamplerOptions options = {});

  OccupancySample sample(Rng& rng) const;

  int cap() const { return cap_; }
  const JointDist& mu(int t) const { return path_.at(t).mu; }

 private:
  struct PathStep {
    JointDist mu;
    std::vector<double> pi;  // [(k * nx + x) * nu + u]
    StepTables tables;
  };

  int draw_action(int t, int k, int x, Rng& rng) const;
  int draw_next(int t, int k, int x, int u, Rng& rng) const;

  int nk_, nx_, nu_;
  double gamma_;
  int cap_;
  SamplerOptions options_;
  std::vector<double> weights_;
  std::vector<PathStep> path_;
};

OccupancySample sample_occupation(const EnvSpec& env, const PolicyParams& phi,
                                  const JointDist& mu0, Rng& rng,
                                  SamplerOptions options = {});

// (w . g - A / (1 - gamma)) g with g the score of the product policy.
std::vector<double> inner_direction(const SoftmaxPolicy& policy,
                                    std::span<const double> w,
                                    const OccupancySample& sample,
                                    double gamma);

struct NPGConfig {
  double eta = 0.1;
  double alpha = 0.01;
  int J = 10;
  int L = 16;
  std::vector<double> w0;  // empty means zeros
  JointDist mu0 = JointDist::uniform(1, 1);
  uint64_t seed = 0;
  SamplerOptions sampler;
  double value_tol = 1e-6;
  int threads = 1;
  // Class populations, only used to view a class environment as a joint one.
  std::vector<int64_t> pops;

  void validate() const;
};

struct NPGReport {
  PolicySnapshot snapshot;            // Phi_1 .. Phi_J with v^MF(mu0)
  std::vector<double> w_norms;        // |w_j|_2
  std::vector<double> residual_loss;  // mean (A - (1-gamma) w_j . g)^2
  std::vector<double> max_score_norm;
  int64_t horizon_cap_hits = 0;
  double mean_value() const;
};

// Outer NPG loop. Occupation samples of outer step j come from stream
// split_seed(seed, j) with sub-stream l, drawn before the sequential SGD
// pass, so the result does not depend on the thread count.
NPGReport npg_train(const EnvSpec& env, const NPGConfig& config,
                    const PolicyParams& phi0);

struct FisherDiagnostics {
  double min_eigenvalue = 0.0;   // chi proxy
  double max_score_norm = 0.0;   // G proxy, Euclidean norm
  double score_lipschitz = 0.0;  // M proxy
  int samples = 0;
};

FisherDiagnostics fisher_diagnostics(const PolicyParams& phi,
                                     const JointDist& mu0, const EnvSpec& env,
                                     int samples, uint64_t seed,
                                     SamplerOptions options = {});

}  // namespace mfc

#endif  // MFC_NPG_H_
