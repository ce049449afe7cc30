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

#ifndef MFC_LEMMAS_H_
#define MFC_LEMMAS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mfc/environment.h"

namespace mfc {

// One certification row: an inequality checked on many random instances.
// Deterministic rows fail on lhs > rhs (1e-9 relative slack); Monte-Carlo
// rows fail when mean - 3 stderr > rhs. worst_ratio is max lhs / rhs.
struct LemmaRow {
  std::string env;
  std::string regime;
  std::string check;
  int64_t instances = 0;
  int64_t violations = 0;
  double worst_ratio = 0.0;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  bool pass() const { return violations == 0; }
};

struct CertifyOptions {
  int64_t pairs = 10000;     // continuity pairs per row
  int64_t configs = 10000;   // agent configurations per deviation row
  int64_t trials = 16;       // one-step Monte-Carlo trials per configuration
  int max_class_pop = 30;    // N_k drawn uniformly from [1, max_class_pop]
  int64_t bernoulli_instances = 100;
  int64_t bernoulli_trials = 10000;
  uint64_t seed = 0;
  int threads = 1;
};

// Regime families the environment supports: continuity and deviation rows
// of the joint family for joint and marginal environments, the class family
// for class environments, and additionally the marginal family for marginal
// environments.
std::vector<LemmaRow> certify_continuity(const EnvSpec& env,
                                         const CertifyOptions& opts);
std::vector<LemmaRow> certify_deviation(const EnvSpec& env,
                                        const CertifyOptions& opts);
LemmaRow certify_bernoulli(const CertifyOptions& opts);

// The one-step deviation from a fixed uniform-policy configuration with
// N_pop agents in one class; used for the two counterexample setups.
LemmaRow certify_fixed_deviation(const EnvSpec& env, int64_t n_pop,
                                 const std::string& which, int64_t trials,
                                 uint64_t seed, int threads);

// Built-in environments with default parameters plus both regime
// translations, in a fixed order.
std::vector<EnvSpec> certification_envs();

}  // namespace mfc

#endif  // MFC_LEMMAS_H_
