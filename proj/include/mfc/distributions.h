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

#ifndef MFC_DISTRIBUTIONS_H_
#define MFC_DISTRIBUTIONS_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mfc/error.h"

namespace mfc {

// Which distribution arguments rewards, transitions and decision rules see.
enum class Regime { kJoint, kClass, kMarginal };

const char* regime_name(Regime regime);
Regime regime_from_name(const std::string& name);

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kRenormTolerance = 1e-9;
inline constexpr double kThetaTolerance = 1e-9;

// Checks entries are finite and non-negative and the sum is 1. Sums within
// kNormTolerance are kept verbatim (so serialization round-trips exactly);
// drift below kRenormTolerance is divided out; anything else throws.
void normalize_in_place(std::span<double> values, const char* what);

double l1_distance(std::span<const double> a, std::span<const double> b);

struct StateSpace {
  static constexpr const char* kName = "state";
};
struct ActionSpace {
  static constexpr const char* kName = "action";
};

class ClassWeights {
 public:
  explicit ClassWeights(std::vector<int64_t> pops);
  static ClassWeights equal(int nk, int64_t per_class) {
    return ClassWeights(std::vector<int64_t>(nk, per_class));
  }

  int nk() const { return static_cast<int>(pops_.size()); }
  int64_t pop(int k) const { return pops_[k]; }
  int64_t total() const { return total_; }
  double theta(int k) const { return theta_[k]; }
  const std::vector<int64_t>& pops() const { return pops_; }
  const std::vector<double>& thetas() const { return theta_; }
  // max_k 1/theta_k.
  double theta_max_inverse() const;

  bool operator==(const ClassWeights& o) const { return pops_ == o.pops_; }

 private:
  std::vector<int64_t> pops_;
  std::vector<double> theta_;
  int64_t total_ = 0;
};

// mu in P(S x [K]), stored with the atom index outer and the class inner.
template <class Space>
class BasicJointDist {
 public:
  using space = Space;
  BasicJointDist(int n, int nk, std::vector<double> values)
      : n_(n), nk_(nk), values_(std::move(values)) {
    if (n < 1 || nk < 1 ||
        values_.size() != static_cast<size_t>(n) * static_cast<size_t>(nk)) {
      throw Error(ErrorKind::kShapeError, "joint distribution shape");
    }
    normalize_in_place(values_, "joint distribution");
  }
  static BasicJointDist uniform(int n, int nk) {
    return BasicJointDist(n, nk, std::vector<double>(n * nk, 1.0 / (n * nk)));
  }
  static BasicJointDist dirac(int n, int nk, int atom, int k) {
    std::vector<double> v(n * nk, 0.0);
    v.at(atom * nk + k) = 1.0;
    return BasicJointDist(n, nk, std::move(v));
  }

  int n() const { return n_; }
  int nk() const { return nk_; }
  double operator()(int i, int k) const { return values_[i * nk_ + k]; }
  std::span<const double> values() const { return values_; }
  double class_mass(int k) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += values_[i * nk_ + k];
    return s;
  }
  std::vector<double> class_masses() const {
    std::vector<double> m(nk_, 0.0);
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < nk_; ++k) m[k] += values_[i * nk_ + k];
    }
    return m;
  }
  bool operator==(const BasicJointDist& o) const {
    return n_ == o.n_ && nk_ == o.nk_ && values_ == o.values_;
  }

 private:
  int n_;
  int nk_;
  std::vector<double> values_;
};

// K per-class distributions; row k is contiguous.
template <class Space>
class BasicClassDist {
 public:
  using space = Space;
  BasicClassDist(int n, int nk, std::vector<double> values)
      : n_(n), nk_(nk), values_(std::move(values)) {
    if (n < 1 || nk < 1 ||
        values_.size() != static_cast<size_t>(n) * static_cast<size_t>(nk)) {
      throw Error(ErrorKind::kShapeError, "class distribution shape");
    }
    for (int k = 0; k < nk_; ++k) {
      normalize_in_place(std::span<double>(values_).subspan(k * n_, n_),
                         "class distribution row");
    }
  }
  static BasicClassDist uniform(int n, int nk) {
    return BasicClassDist(n, nk, std::vector<double>(n * nk, 1.0 / n));
  }

  int n() const { return n_; }
  int nk() const { return nk_; }
  double operator()(int i, int k) const { return values_[k * n_ + i]; }
  std::span<const double> row(int k) const {
    return std::span<const double>(values_).subspan(k * n_, n_);
  }
  std::span<const double> values() const { return values_; }
  bool operator==(const BasicClassDist& o) const {
    return n_ == o.n_ && nk_ == o.nk_ && values_ == o.values_;
  }

 private:
  int n_;
  int nk_;
  std::vector<double> values_;
};

template <class Space>
class BasicMarginalDist {
 public:
  using space = Space;
  explicit BasicMarginalDist(std::vector<double> values)
      : values_(std::move(values)) {
    if (values_.empty()) throw Error(ErrorKind::kShapeError, "empty marginal");
    normalize_in_place(values_, "marginal distribution");
  }
  static BasicMarginalDist uniform(int n) {
    return BasicMarginalDist(std::vector<double>(n, 1.0 / n));
  }
  static BasicMarginalDist dirac(int n, int atom) {
    std::vector<double> v(n, 0.0);
    v.at(atom) = 1.0;
    return BasicMarginalDist(std::move(v));
  }

  int n() const { return static_cast<int>(values_.size()); }
  double operator()(int i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  bool operator==(const BasicMarginalDist& o) const {
    return values_ == o.values_;
  }

 private:
  std::vector<double> values_;
};

using JointDist = BasicJointDist<StateSpace>;
using ActionJointDist = BasicJointDist<ActionSpace>;
using ClassDistCollection = BasicClassDist<StateSpace>;
using ActionClassDist = BasicClassDist<ActionSpace>;
using MarginalDist = BasicMarginalDist<StateSpace>;
using ActionMarginalDist = BasicMarginalDist<ActionSpace>;

// Counting constructors. lists[k] holds the indices of the N_k agents of
// class k; every index must lie in [0, n).
template <class Space>
BasicJointDist<Space> empirical_joint(
    const std::vector<std::vector<int>>& lists, const ClassWeights& weights,
    int n);
template <class Space>
BasicClassDist<Space> empirical_class(
    const std::vector<std::vector<int>>& lists, const ClassWeights& weights,
    int n);

inline JointDist empirical_joint_state(
    const std::vector<std::vector<int>>& states, const ClassWeights& weights,
    int nx) {
  return empirical_joint<StateSpace>(states, weights, nx);
}
inline ClassDistCollection empirical_class_state(
    const std::vector<std::vector<int>>& states, const ClassWeights& weights,
    int nx) {
  return empirical_class<StateSpace>(states, weights, nx);
}

template <class Space>
BasicClassDist<Space> joint_to_class(const BasicJointDist<Space>& mu,
                                     const ClassWeights& weights);
// Same conversion with theta read off the distribution's own class masses;
// every class must carry positive mass.
template <class Space>
BasicClassDist<Space> joint_to_class_by_mass(const BasicJointDist<Space>& mu);
template <class Space>
BasicJointDist<Space> class_to_joint(const BasicClassDist<Space>& bar,
                                     std::span<const double> theta);
template <class Space>
BasicJointDist<Space> class_to_joint(const BasicClassDist<Space>& bar,
                                     const ClassWeights& weights) {
  return class_to_joint(bar, std::span<const double>(weights.thetas()));
}
template <class Space>
BasicMarginalDist<Space> marginal(const BasicJointDist<Space>& mu);

template <class D>
double l1_distance(const D& a, const D& b) {
  if (a.values().size() != b.values().size()) {
    throw Error(ErrorKind::kShapeError, "l1_distance operands differ in shape");
  }
  return l1_distance(a.values(), b.values());
}

// Dense row-major JSON documents with dimension fields.
template <class D>
nlohmann::json to_json(const D& dist);
template <class D>
D from_json(const nlohmann::json& doc);

}  // namespace mfc

#endif  // MFC_DISTRIBUTIONS_H_
