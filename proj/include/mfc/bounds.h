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

#ifndef MFC_BOUNDS_H_
#define MFC_BOUNDS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mfc/environment.h"
#include "mfc/nagent.h"
#include "mfc/policy.h"

namespace mfc {

// Inputs of every approximation bound. For the class-regime bounds the four
// Lipschitz fields hold the barred constants (M̄_R, L̄_R, L̄_P, L̄_Q).
// Derived constants are computed on demand, never cached.
struct BoundConstants {
  double m_r = 0.0;
  double l_r = 0.0;
  double l_p = 0.0;
  double l_q = 0.0;
  double gamma = 0.0;
  int nx = 1;
  int nu = 1;
  std::vector<int64_t> pops = {1};
  std::string source = "declared";  // or "estimated"

  int nk() const { return static_cast<int>(pops.size()); }
  double n_pop() const;
  double sum_sqrt_pops() const;      // sum_k sqrt(N_k)
  double sum_inv_sqrt_pops() const;  // sum_k 1/sqrt(N_k)
  double theta_max_inverse() const;  // max_k N_pop / N_k

  double s_r() const { return m_r * (1 + l_q) + l_r * (2 + l_q); }
  double s_p() const { return (1 + l_q) + l_p * (2 + l_q); }
  double c_r() const { return m_r + l_r; }
  double c_p() const { return 2 + l_p; }

  double s_r_bar() const { return m_r * (1 + l_q) + l_r * (2 + nk() * l_q); }
  double s_p_bar() const {
    return (1 + nk() * l_q) + nk() * l_p * (2 + nk() * l_q);
  }
  double c_r_bar() const { return m_r + l_r; }
  double c_p_bar() const { return 2 + nk() * l_p; }

  double s_r_prime() const { return m_r + l_r; }
  double s_r_second() const { return m_r * l_q + l_r * (1 + l_q); }
  double s_p_prime() const { return 1 + l_p; }
  double s_p_second() const { return l_q + l_p * (1 + l_q); }

  // The same system seen as a joint one on P_theta: L constants inflate by
  // theta_M^{-1}, M_R is unchanged.
  BoundConstants theta_inflated() const;

  bool valid_joint() const { return gamma * s_p() < 1.0; }
  bool valid_class() const { return gamma * s_p_bar() < 1.0; }

  void validate() const;
};

// (S_R / (S_P - 1)) [1/(1 - gamma S_P) - 1/(1 - gamma)]. Near S_P = 1 the
// analytic limit S_R gamma / (1 - gamma)^2 is used.
double geometric_factor(double s_r, double s_p, double gamma);

double theorem1_bound(const BoundConstants& c);
double theorem2_bound(const BoundConstants& c);
double theorem3_bound(const BoundConstants& c);
// Class system (barred constants) bounded through the joint theorem.
double loose_bound_class_via_joint(const BoundConstants& c);
// Joint system bounded through the class theorem.
double loose_bound_joint_via_class(const BoundConstants& c);

// Constants of (env, policy) with the given populations. Uses the declared
// environment constants and the policy's certified L_Q.
BoundConstants constants_for(const EnvSpec& env, const Policy& policy,
                             const ClassWeights& weights);

struct GapReport {
  std::string env;
  std::string theorem;  // which bound applies to the regime
  std::vector<int64_t> pops;
  uint64_t seed = 0;
  double v_n = 0.0;
  double v_n_stderr = 0.0;
  double v_mf = 0.0;
  int horizon_n = 0;
  int horizon_mf = 0;
  double gap = 0.0;
  double gap_ci_half = 0.0;
  double bound = 0.0;
  bool bound_valid = false;
  BoundConstants constants;

  // gap - 3 stderr <= bound whenever the bound applies.
  bool within_bound() const {
    return !bound_valid || gap - 3.0 * v_n_stderr <= bound;
  }
};

// Pairs the Monte-Carlo N-agent value with the mean-field value and the
// bound of the environment's regime (joint: theorem1_bound, class: theorem2_bound,
// marginal: theorem3_bound). mu0 must be the empirical distribution of x0.
GapReport measure_gap(const EnvSpec& env, const Policy& policy,
                      const AgentState& x0, const StateArg& mu0, int64_t reps,
                      double tol, uint64_t seed, int threads = 1);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mfc

#endif  // MFC_BOUNDS_H_
