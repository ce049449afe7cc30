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

#include "mfc/random.h"

#include <algorithm>

namespace mfc {
namespace {

uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t split_seed(uint64_t master, uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

Rng make_rng(uint64_t master, uint64_t stream) {
  return Rng(split_seed(master, stream));
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  int last_positive = 0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] <= 0.0) continue;
    cum += probs[i];
    last_positive = i;
    if (u < cum) return i;
  }
  return last_positive;
}

std::vector<double> sample_dirichlet(int n, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (double& v : out) {
    v = gamma(rng);
    total += v;
  }
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / n);
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

void sample_multinomial(int64_t n, std::span<const double> probs, Rng& rng,
                        std::span<int64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  double remaining_mass = 1.0;
  int64_t remaining = n;
  const int m = static_cast<int>(probs.size());
  int last_positive = m - 1;
  while (last_positive > 0 && probs[last_positive] <= 0.0) --last_positive;
  for (int i = 0; i <= last_positive && remaining > 0; ++i) {
    if (i == last_positive || remaining_mass <= 0.0) {
      counts[i] = remaining;
      remaining = 0;
      break;
    }
    const double p = std::clamp(probs[i] / remaining_mass, 0.0, 1.0);
    int64_t c = 0;
    if (p >= 1.0) {
      c = remaining;
    } else if (p > 0.0) {
      std::binomial_distribution<int64_t> binom(remaining, p);
      c = binom(rng);
    }
    counts[i] = c;
    remaining -= c;
    remaining_mass -= probs[i];
  }
}

}  // namespace mfc
