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

#ifndef MFC_RANDOM_H_
#define MFC_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mfc {

using Rng = std::mt19937_64;

// Streams are derived as splitmix64(master ^ splitmix64(stream + 1)), so a
// replication's randomness depends only on (seed, index) and never on which
// worker thread ran it.
uint64_t split_seed(uint64_t master, uint64_t stream);
Rng make_rng(uint64_t master, uint64_t stream = 0);

// Uniform draw in [0, 1).
inline double uniform01(Rng& rng) {
  return std::generate_canonical<double, 64>(rng);
}

// Inverse-CDF draw. Rounding slack at the top end falls back to the last
// index with positive mass.
int sample_categorical(std::span<const double> probs, Rng& rng);

// Symmetric Dirichlet(alpha) sample on the n-simplex.
std::vector<double> sample_dirichlet(int n, double alpha, Rng& rng);

// Multinomial(n, probs) via conditional binomials; cost is O(len(probs))
// regardless of n.
void sample_multinomial(int64_t n, std::span<const double> probs, Rng& rng,
                        std::span<int64_t> counts);

}  // namespace mfc

#endif  // MFC_RANDOM_H_
