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

#ifndef MFC_BUILTIN_ENVS_H_
#define MFC_BUILTIN_ENVS_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "mfc/environment.h"

namespace mfc {

// r_k == c with the identity kernel. Lipschitz constants are zero.
EnvSpec make_constant_env(int nx, int nu, int nk, double c, double gamma,
                          Regime regime = Regime::kJoint);

// P(x,u,mu,nu)(x') = 1/|X| and r == c. With (nx, nu) = (1, 32) and (32, 1)
// these are the two counterexample systems for the deviation lemmas.
EnvSpec make_uniform_transition_env(int nx, int nu, int nk = 1,
                                    double c = 0.0, double gamma = 0.5);

// x -> x+1 mod nx regardless of action; reward 1 in state 0.
EnvSpec make_cycle_env(int nx, int nu, int nk, double gamma);

// One class, two states that never change, two actions, gamma = 0. Reward
// depends on the action only.
EnvSpec make_bandit_env(double reward0, double reward1);

struct CongestionParams {
  int nk = 2;
  int nx = 4;
  int nu = 4;
  double gamma = 0.5;
  // Weight of the crowding kernel in the transition mixture (this is L_P).
  double lambda = 0.2;
  // Probability that the base kernel follows its deterministic move.
  double base_follow = 0.8;
  // Base reward table a_k(x,u), length nk*nx*nu. Empty selects the
  // built-in pattern.
  std::vector<double> a;
  // Imbalance penalty per class, length nk. Empty selects 1, 1.5, 2, ...
  std::vector<double> b;
  // Load coupling w_{kk'}, row-major nk x nk. Empty selects 1 on the
  // diagonal and 0.5 elsewhere.
  std::vector<double> w;
};

// Joint regime. r_k = a_k(x,u) - b_k |load_k(u) - mean_u' load_k(u')| with
// load_k(u) = sum_k' w_{kk'} nu(u,k'); the transition mixes a class-specific
// base kernel with a crowd-avoiding kernel built from the state marginal.
EnvSpec make_congestion_env(const CongestionParams& params);

// Marginal regime variant: the imbalance is |nu[U](u) - 1/|U|| and the crowd
// kernel reads mu[X].
EnvSpec make_marginal_congestion_env(const CongestionParams& params);

struct SisParams {
  int nk = 2;
  double gamma = 0.5;
  // Infection rate under action 0 (protect) and 1 (expose).
  std::vector<double> beta = {0.3, 1.0};
  // Contact matrix c_{kk'}, row-major nk x nk. Empty selects 0.6 on the
  // diagonal and 0.3 / (nk - 1) spread elsewhere.
  std::vector<double> contact;
  std::vector<double> recovery;         // delta_k; empty selects 0.3
  std::vector<double> infection_cost;   // h_k; empty selects 1
  std::vector<double> protection_cost;  // p_k; empty selects 0.3
  double prevalence_cost = 0.5;         // rho
};

// Class regime epidemic. States {S, I}, actions {protect, expose}.
// Infection probability beta_u sum_k' c_{kk'} mu_bar(I, k').
EnvSpec make_sis_epidemic_env(const SisParams& params);

// {"name": ..., "params": {...}} with strictly checked keys.
EnvSpec make_env_from_json(const nlohmann::json& doc);
std::vector<std::string> builtin_env_names();

}  // namespace mfc

#endif  // MFC_BUILTIN_ENVS_H_
