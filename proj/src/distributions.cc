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

#include "mfc/distributions.h"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace mfc {

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::kJoint: return "joint";
    case Regime::kClass: return "class";
    case Regime::kMarginal: return "marginal";
  }
  return "unknown";
}

Regime regime_from_name(const std::string& name) {
  if (name == "joint") return Regime::kJoint;
  if (name == "class") return Regime::kClass;
  if (name == "marginal") return Regime::kMarginal;
  throw Error(ErrorKind::kConfigError, "unknown regime '" + name + "'");
}

void normalize_in_place(std::span<double> values, const char* what) {
  double total = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::kNormalizationError,
                  std::string(what) + " has a negative or non-finite entry");
    }
    total += v;
  }
  const double drift = std::fabs(total - 1.0);
  if (drift <= kNormTolerance) return;
  if (drift < kRenormTolerance) {
    for (double& v : values) v /= total;
    return;
  }
  throw Error(ErrorKind::kNormalizationError,
              std::string(what) + " sums to " + std::to_string(total));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kShapeError, "l1_distance operands differ in shape");
  }
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

ClassWeights::ClassWeights(std::vector<int64_t> pops) : pops_(std::move(pops)) {
  if (pops_.empty()) {
    throw Error(ErrorKind::kPopulationMismatch, "no classes");
  }
  for (int64_t p : pops_) {
    if (p < 1) throw Error(ErrorKind::kPopulationMismatch, "N_k must be >= 1");
    total_ += p;
  }
  theta_.resize(pops_.size());
  for (size_t k = 0; k < pops_.size(); ++k) {
    theta_[k] = static_cast<double>(pops_[k]) / static_cast<double>(total_);
  }
}

double ClassWeights::theta_max_inverse() const {
  int64_t smallest = pops_[0];
  for (int64_t p : pops_) smallest = std::min(smallest, p);
  return static_cast<double>(total_) / static_cast<double>(smallest);
}

namespace {

void check_lists(const std::vector<std::vector<int>>& lists,
                 const ClassWeights& weights, int n) {
  if (static_cast<int>(lists.size()) != weights.nk()) {
    throw Error(ErrorKind::kPopulationMismatch, "class count differs from K");
  }
  for (int k = 0; k < weights.nk(); ++k) {
    if (static_cast<int64_t>(lists[k].size()) != weights.pop(k)) {
      throw Error(ErrorKind::kPopulationMismatch,
                  "class " + std::to_string(k) + " list length != N_k");
    }
    for (int v : lists[k]) {
      if (v < 0 || v >= n) {
        throw Error(ErrorKind::kInvalidState,
                    "index " + std::to_string(v) + " outside [0," +
                        std::to_string(n) + ")");
      }
    }
  }
}

}  // namespace

template <class Space>
BasicJointDist<Space> empirical_joint(
    const std::vector<std::vector<int>>& lists, const ClassWeights& weights,
    int n) {
  check_lists(lists, weights, n);
  const int nk = weights.nk();
  std::vector<int64_t> counts(static_cast<size_t>(n) * nk, 0);
  for (int k = 0; k < nk; ++k) {
    for (int v : lists[k]) ++counts[v * nk + k];
  }
  std::vector<double> values(counts.size());
  const double total = static_cast<double>(weights.total());
  for (size_t i = 0; i < counts.size(); ++i) values[i] = counts[i] / total;
  return BasicJointDist<Space>(n, nk, std::move(values));
}

template <class Space>
BasicClassDist<Space> empirical_class(
    const std::vector<std::vector<int>>& lists, const ClassWeights& weights,
    int n) {
  check_lists(lists, weights, n);
  const int nk = weights.nk();
  std::vector<double> values(static_cast<size_t>(n) * nk, 0.0);
  for (int k = 0; k < nk; ++k) {
    std::vector<int64_t> counts(n, 0);
    for (int v : lists[k]) ++counts[v];
    for (int i = 0; i < n; ++i) {
      values[k * n + i] =
          static_cast<double>(counts[i]) / static_cast<double>(weights.pop(k));
    }
  }
  return BasicClassDist<Space>(n, nk, std::move(values));
}

namespace {

template <class Space>
BasicClassDist<Space> scale_rows(const BasicJointDist<Space>& mu,
                                 const std::vector<double>& theta) {
  const int n = mu.n();
  const int nk = mu.nk();
  std::vector<double> values(static_cast<size_t>(n) * nk);
  for (int k = 0; k < nk; ++k) {
    for (int i = 0; i < n; ++i) values[k * n + i] = mu(i, k) / theta[k];
  }
  return BasicClassDist<Space>(n, nk, std::move(values));
}

}  // namespace

template <class Space>
BasicClassDist<Space> joint_to_class(const BasicJointDist<Space>& mu,
                                     const ClassWeights& weights) {
  if (mu.nk() != weights.nk()) {
    throw Error(ErrorKind::kShapeError, "joint_to_class: K mismatch");
  }
  const std::vector<double> masses = mu.class_masses();
  for (int k = 0; k < mu.nk(); ++k) {
    if (std::fabs(masses[k] - weights.theta(k)) > kThetaTolerance) {
      throw Error(ErrorKind::kThetaIncompatible,
                  "class " + std::to_string(k) + " mass " +
                      std::to_string(masses[k]) + " vs theta " +
                      std::to_string(weights.theta(k)));
    }
  }
  return scale_rows(mu, weights.thetas());
}

template <class Space>
BasicClassDist<Space> joint_to_class_by_mass(const BasicJointDist<Space>& mu) {
  const std::vector<double> masses = mu.class_masses();
  for (double m : masses) {
    if (m <= 0.0) {
      throw Error(ErrorKind::kThetaIncompatible, "class with zero mass");
    }
  }
  return scale_rows(mu, masses);
}

template <class Space>
BasicJointDist<Space> class_to_joint(const BasicClassDist<Space>& bar,
                                     std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != bar.nk()) {
    throw Error(ErrorKind::kShapeError, "class_to_joint: K mismatch");
  }
  const int n = bar.n();
  const int nk = bar.nk();
  std::vector<double> values(static_cast<size_t>(n) * nk);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < nk; ++k) values[i * nk + k] = theta[k] * bar(i, k);
  }
  return BasicJointDist<Space>(n, nk, std::move(values));
}

template <class Space>
BasicMarginalDist<Space> marginal(const BasicJointDist<Space>& mu) {
  std::vector<double> m(mu.n(), 0.0);
  for (int i = 0; i < mu.n(); ++i) {
    for (int k = 0; k < mu.nk(); ++k) m[i] += mu(i, k);
  }
  return BasicMarginalDist<Space>(std::move(m));
}

namespace {

template <class D>
struct DocInfo;
template <class S>
struct DocInfo<BasicJointDist<S>> {
  static constexpr const char* kKind = "joint";
};
template <class S>
struct DocInfo<BasicClassDist<S>> {
  static constexpr const char* kKind = "class";
};
template <class S>
struct DocInfo<BasicMarginalDist<S>> {
  static constexpr const char* kKind = "marginal";
};

void expect_header(const nlohmann::json& doc, const char* kind,
                   const char* space) {
  if (!doc.is_object() || doc.value("kind", "") != kind ||
      doc.value("space", "") != space) {
    throw Error(ErrorKind::kShapeError,
                std::string("expected a ") + kind + "/" + space + " document");
  }
}

}  // namespace

template <class D>
nlohmann::json to_json(const D& dist) {
  nlohmann::json doc;
  doc["kind"] = DocInfo<D>::kKind;
  doc["space"] = D::space::kName;
  doc["n"] = dist.n();
  if constexpr (!std::is_same_v<D, BasicMarginalDist<typename D::space>>) {
    doc["nk"] = dist.nk();
  }
  doc["values"] = std::vector<double>(dist.values().begin(),
                                      dist.values().end());
  return doc;
}

template <class D>
D from_json(const nlohmann::json& doc) {
  expect_header(doc, DocInfo<D>::kKind, D::space::kName);
  std::vector<double> values = doc.at("values").get<std::vector<double>>();
  const int n = doc.at("n").get<int>();
  if constexpr (std::is_same_v<D, BasicMarginalDist<typename D::space>>) {
    if (static_cast<int>(values.size()) != n) {
      throw Error(ErrorKind::kShapeError, "marginal document length");
    }
    return D(std::move(values));
  } else {
    return D(n, doc.at("nk").get<int>(), std::move(values));
  }
}

#define MFC_INSTANTIATE_SPACE(S)                                             \
  template BasicJointDist<S> empirical_joint<S>(                             \
      const std::vector<std::vector<int>>&, const ClassWeights&, int);       \
  template BasicClassDist<S> empirical_class<S>(                             \
      const std::vector<std::vector<int>>&, const ClassWeights&, int);       \
  template BasicClassDist<S> joint_to_class(const BasicJointDist<S>&,        \
                                            const ClassWeights&);            \
  template BasicClassDist<S> joint_to_class_by_mass(const BasicJointDist<S>&); \
  template BasicJointDist<S> class_to_joint(const BasicClassDist<S>&,        \
                                            std::span<const double>);        \
  template BasicMarginalDist<S> marginal(const BasicJointDist<S>&);          \
  template nlohmann::json to_json(const BasicJointDist<S>&);                 \
  template nlohmann::json to_json(const BasicClassDist<S>&);                 \
  template nlohmann::json to_json(const BasicMarginalDist<S>&);              \
  template BasicJointDist<S> from_json<BasicJointDist<S>>(const nlohmann::json&);               \
  template BasicClassDist<S> from_json<BasicClassDist<S>>(const nlohmann::json&);               \
  template BasicMarginalDist<S> from_json<BasicMarginalDist<S>>(const nlohmann::json&);

MFC_INSTANTIATE_SPACE(StateSpace)
MFC_INSTANTIATE_SPACE(ActionSpace)

#undef MFC_INSTANTIATE_SPACE

}  // namespace mfc
