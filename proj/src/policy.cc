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

#include "mfc/policy.h"

#include <algorithm>
#include <cmath>

namespace mfc {

PolicyArch arch_for(const EnvSpec& env) {
  return PolicyArch{env.regime(), env.nk(), env.nx(), env.nu()};
}

PolicyParams::PolicyParams(PolicyArch a, std::vector<double> p)
    : arch(a), phi(std::move(p)) {
  if (arch.nk < 1 || arch.nx < 1 || arch.nu < 1) {
    throw Error(ErrorKind::kShapeError, "policy arch dimensions must be >= 1");
  }
  if (static_cast<int>(phi.size()) != arch.dim()) {
    throw Error(ErrorKind::kShapeError,
                "phi has length " + std::to_string(phi.size()) + ", arch needs " +
                    std::to_string(arch.dim()));
  }
  for (double v : phi) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kShapeError, "phi has a non-finite entry");
    }
  }
}

PolicyParams PolicyParams::zeros(const PolicyArch& arch) {
  return PolicyParams(arch, std::vector<double>(arch.dim(), 0.0));
}

PolicyParams PolicyParams::random(const PolicyArch& arch, double scale,
                                  double feature_scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> phi(arch.dim());
  for (int i = 0; i < arch.dim(); ++i) {
    phi[i] = normal(rng) * (i < arch.table_size() ? scale : feature_scale);
  }
  return PolicyParams(arch, std::move(phi));
}

nlohmann::json to_json(const PolicyParams& params) {
  nlohmann::json arch = {{"name", "tabular_softmax_linear_mu"},
                         {"regime", regime_name(params.arch.regime)},
                         {"nk", params.arch.nk},
                         {"nx", params.arch.nx},
                         {"nu", params.arch.nu}};
  return {{"arch", arch}, {"phi", params.phi}};
}

PolicyParams policy_params_from_json(const nlohmann::json& doc) {
  try {
    const auto& a = doc.at("arch");
    if (a.at("name").get<std::string>() != "tabular_softmax_linear_mu") {
      throw Error(ErrorKind::kNoClosedForm, "unsupported policy arch");
    }
    PolicyArch arch{regime_from_name(a.at("regime").get<std::string>()),
                    a.at("nk").get<int>(), a.at("nx").get<int>(),
                    a.at("nu").get<int>()};
    return PolicyParams(arch, doc.at("phi").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError,
                std::string("bad policy document: ") + e.what());
  }
}

std::vector<double> policy_features(Regime regime, const StateArg& dist) {
  const bool match =
      (regime == Regime::kJoint && std::holds_alternative<JointDist>(dist)) ||
      (regime == Regime::kClass &&
       std::holds_alternative<ClassDistCollection>(dist)) ||
      (regime == Regime::kMarginal &&
       std::holds_alternative<MarginalDist>(dist));
  if (!match) {
    throw Error(ErrorKind::kRegimeError,
                std::string("policy conditions on ") + regime_name(regime) +
                    " distributions");
  }
  return std::visit(
      [](const auto& d) {
        return std::vector<double>(d.values().begin(), d.values().end());
      },
      dist);
}

std::vector<double> features_from_joint(Regime regime, const JointDist& mu) {
  switch (regime) {
    case Regime::kJoint:
      return {mu.values().begin(), mu.values().end()};
    case Regime::kClass: {
      const ClassDistCollection bar = joint_to_class_by_mass(mu);
      return {bar.values().begin(), bar.values().end()};
    }
    case Regime::kMarginal: {
      const MarginalDist m = marginal(mu);
      return {m.values().begin(), m.values().end()};
    }
  }
  throw Error(ErrorKind::kRegimeError, "unknown regime");
}

std::vector<double> features_from_class(Regime regime,
                                        const ClassDistCollection& mu_bar,
                                        std::span<const double> theta) {
  if (regime == Regime::kClass) {
    return {mu_bar.values().begin(), mu_bar.values().end()};
  }
  return features_from_joint(regime, class_to_joint(mu_bar, theta));
}

double Policy::lipschitz_q() const {
  throw Error(ErrorKind::kNoClosedForm, "policy has no closed-form L_Q");
}

SoftmaxPolicy::SoftmaxPolicy(PolicyParams params) : params_(std::move(params)) {}

void SoftmaxPolicy::logits(int k, int x, std::span<const double> features,
                           std::span<double> out,
                           std::vector<char>* clamped) const {
  const PolicyArch& a = params_.arch;
  const int nf = a.feature_dim();
  if (static_cast<int>(features.size()) != nf) {
    throw Error(ErrorKind::kShapeError, "feature vector length");
  }
  const double* phi = params_.phi.data();
  for (int u = 0; u < a.nu; ++u) {
    double z = phi[a.a_index(k, x, u)];
    const double* b = phi + a.b_index(k, x, u, 0);
    for (int f = 0; f < nf; ++f) z += b[f] * features[f];
    const double c = std::clamp(z, -kLogitClamp, kLogitClamp);
    if (clamped) (*clamped)[u] = c != z;
    out[u] = c;
  }
}

void SoftmaxPolicy::probs(int k, int x, std::span<const double> features,
                          std::span<double> out) const {
  logits(k, x, features, out, nullptr);
  double top = out[0];
  for (int u = 1; u < nu(); ++u) top = std::max(top, out[u]);
  double total = 0.0;
  for (int u = 0; u < nu(); ++u) {
    out[u] = std::exp(out[u] - top);
    total += out[u];
  }
  for (int u = 0; u < nu(); ++u) out[u] /= total;
}

void SoftmaxPolicy::add_score(int k, int x, int u,
                              std::span<const double> features,
                              std::span<double> grad) const {
  const PolicyArch& a = params_.arch;
  std::vector<double> p(a.nu);
  std::vector<char> clamped(a.nu, 0);
  logits(k, x, features, p, &clamped);
  double top = p[0];
  for (double v : p) top = std::max(top, v);
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  if (!(p[u] > 0.0) || !std::isfinite(p[u])) {
    throw Error(ErrorKind::kScoreUnderflow, "log-probability underflow");
  }
  // d log pi(u) / d logit_v = [v == u] - pi(v); zero behind an active clamp.
  const int nf = a.feature_dim();
  for (int v = 0; v < a.nu; ++v) {
    if (clamped[v]) continue;
    const double g = (v == u ? 1.0 : 0.0) - p[v];
    grad[a.a_index(k, x, v)] += g;
    double* b = grad.data() + a.b_index(k, x, v, 0);
    for (int f = 0; f < nf; ++f) b[f] += g * features[f];
  }
}

// |softmax(a) - softmax(b)|_1 is at most half the spread of a - b (mean
// absolute deviation of a bounded variable); with the clamp, a coordinate
// can also freeze at 0, hence the 0 in the spread.
double SoftmaxPolicy::lipschitz_q() const { return lipschitz_Q(params_); }

double lipschitz_Q(const PolicyParams& params) {
  const PolicyArch& a = params.arch;
  const int nf = a.feature_dim();
  double best = 0.0;
  for (int k = 0; k < a.nk; ++k) {
    for (int x = 0; x < a.nx; ++x) {
      for (int f = 0; f < nf; ++f) {
        double hi = 0.0, lo = 0.0;
        for (int u = 0; u < a.nu; ++u) {
          const double b = params.phi[a.b_index(k, x, u, f)];
          hi = std::max(hi, b);
          lo = std::min(lo, b);
        }
        best = std::max(best, (hi - lo) / 2.0);
      }
    }
  }
  return best;
}

FixedPolicy::FixedPolicy(Regime regime, int nk, int nx, int nu,
                         std::vector<double> table)
    : regime_(regime), nk_(nk), nx_(nx), nu_(nu), table_(std::move(table)) {
  if (table_.size() != static_cast<size_t>(nk) * nx * nu) {
    throw Error(ErrorKind::kShapeError, "fixed policy table size");
  }
  for (int r = 0; r < nk * nx; ++r) {
    normalize_in_place(std::span<double>(table_).subspan(r * nu, nu),
                       "fixed policy row");
  }
}

FixedPolicy FixedPolicy::uniform(const EnvSpec& env) {
  return FixedPolicy(env.regime(), env.nk(), env.nx(), env.nu(),
                     std::vector<double>(env.nk() * env.nx() * env.nu(),
                                         1.0 / env.nu()));
}

FixedPolicy FixedPolicy::deterministic(const EnvSpec& env,
                                       const std::vector<int>& action_of_state) {
  std::vector<double> table(env.nk() * env.nx() * env.nu(), 0.0);
  for (int k = 0; k < env.nk(); ++k) {
    for (int x = 0; x < env.nx(); ++x) {
      table[(k * env.nx() + x) * env.nu() + action_of_state.at(x)] = 1.0;
    }
  }
  return FixedPolicy(env.regime(), env.nk(), env.nx(), env.nu(),
                     std::move(table));
}

void FixedPolicy::probs(int k, int x, std::span<const double>,
                        std::span<double> out) const {
  std::copy_n(table_.begin() + (k * nx_ + x) * nu_, nu_, out.begin());
}

ActionMarginalDist evaluate(const Policy& policy, int k, int x,
                            const StateArg& dist) {
  const std::vector<double> feat = policy_features(policy.regime(), dist);
  if (k < 0 || k >= policy.nk() || x < 0 || x >= policy.nx()) {
    throw Error(ErrorKind::kInvalidState, "policy index out of range");
  }
  std::vector<double> out(policy.nu());
  policy.probs(k, x, feat, out);
  return ActionMarginalDist(std::move(out));
}

std::vector<double> score_gradient(const SoftmaxPolicy& policy,
                                   std::span<const int> xs,
                                   const StateArg& dist,
                                   std::span<const int> us) {
  if (static_cast<int>(xs.size()) != policy.nk() ||
      static_cast<int>(us.size()) != policy.nk()) {
    throw Error(ErrorKind::kShapeError, "one state and action per class");
  }
  const std::vector<double> feat = policy_features(policy.regime(), dist);
  std::vector<double> grad(policy.params().d(), 0.0);
  for (int k = 0; k < policy.nk(); ++k) {
    policy.add_score(k, xs[k], us[k], feat, grad);
  }
  return grad;
}

}  // namespace mfc
