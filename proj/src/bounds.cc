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

#include "mfc/bounds.h"

#include <cmath>
#include <limits>

#include "mfc/meanfield.h"

namespace mfc {

double BoundConstants::n_pop() const {
  double s = 0.0;
  for (int64_t p : pops) s += static_cast<double>(p);
  return s;
}

double BoundConstants::sum_sqrt_pops() const {
  double s = 0.0;
  for (int64_t p : pops) s += std::sqrt(static_cast<double>(p));
  return s;
}

double BoundConstants::sum_inv_sqrt_pops() const {
  double s = 0.0;
  for (int64_t p : pops) s += 1.0 / std::sqrt(static_cast<double>(p));
  return s;
}

double BoundConstants::theta_max_inverse() const {
  int64_t smallest = pops.at(0);
  for (int64_t p : pops) smallest = std::min(smallest, p);
  return n_pop() / static_cast<double>(smallest);
}

BoundConstants BoundConstants::theta_inflated() const {
  BoundConstants out = *this;
  const double t = theta_max_inverse();
  out.l_r *= t;
  out.l_p *= t;
  out.l_q *= t;
  return out;
}

void BoundConstants::validate() const {
  if (!(m_r >= 0 && l_r >= 0 && l_p >= 0 && l_q >= 0)) {
    throw Error(ErrorKind::kConfigError, "bound constants must be >= 0");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::kInvalidDiscount, "gamma must lie in [0,1)");
  }
  if (nx < 1 || nu < 1 || pops.empty()) {
    throw Error(ErrorKind::kConfigError, "bound dimensions");
  }
  for (int64_t p : pops) {
    if (p < 1) throw Error(ErrorKind::kPopulationMismatch, "N_k must be >= 1");
  }
}

double geometric_factor(double s_r, double s_p, double gamma) {
  if (std::fabs(s_p - 1.0) < 1e-9) {
    return s_r * gamma / ((1.0 - gamma) * (1.0 - gamma));
  }
  return (s_r / (s_p - 1.0)) *
         (1.0 / (1.0 - gamma * s_p) - 1.0 / (1.0 - gamma));
}

namespace {

void require_valid(double gamma, double s_p, const char* which) {
  if (!(gamma * s_p < 1.0)) {
    throw Error(ErrorKind::kBoundInvalid,
                std::string(which) + " needs gamma*S_P < 1, got " +
                    std::to_string(gamma * s_p));
  }
}

}  // namespace

double theorem1_bound(const BoundConstants& c) {
  c.validate();
  require_valid(c.gamma, c.s_p(), "theorem1_bound");
  const double pop = c.sum_sqrt_pops() / c.n_pop();
  const double root_u = std::sqrt(static_cast<double>(c.nu));
  const double root_xu = std::sqrt(static_cast<double>(c.nx) * c.nu);
  return c.c_r() / (1.0 - c.gamma) * root_u * pop +
         c.c_p() * geometric_factor(c.s_r(), c.s_p(), c.gamma) * root_xu * pop;
}

double theorem2_bound(const BoundConstants& c) {
  c.validate();
  require_valid(c.gamma, c.s_p_bar(), "theorem2_bound");
  const double pop = c.sum_inv_sqrt_pops();
  const double root_xu = std::sqrt(static_cast<double>(c.nx) * c.nu);
  return c.c_r_bar() / (1.0 - c.gamma) * root_xu * pop +
         c.c_p_bar() * geometric_factor(c.s_r_bar(), c.s_p_bar(), c.gamma) *
             root_xu * pop;
}

double theorem3_bound(const BoundConstants& c) {
  c.validate();
  require_valid(c.gamma, c.s_p(), "theorem3_bound");
  const double g = c.gamma;
  const double a = c.sum_sqrt_pops() / c.n_pop();
  const double b = 1.0 / std::sqrt(c.n_pop());
  const double root_u = std::sqrt(static_cast<double>(c.nu));
  const double root_xu = std::sqrt(static_cast<double>(c.nx) * c.nu);
  const double first = c.c_r() / (1.0 - g) * root_u * b;
  const double second = root_xu * (g * c.c_p() / (1.0 - g)) *
                        (c.s_r_prime() * a + c.s_r_second() * b);
  // gamma/(1-gamma S_P) - gamma/(1-gamma) is gamma times the theorem1_bound
  // bracket, so the geometric factor carries over with one extra gamma.
  const double third = c.c_p() * g * geometric_factor(c.s_r(), c.s_p(), g) *
                       root_xu * (c.s_p_prime() * a + c.s_p_second() * b);
  return first + second + third;
}

double loose_bound_class_via_joint(const BoundConstants& c) {
  c.validate();
  return theorem1_bound(c.theta_inflated());
}

double loose_bound_joint_via_class(const BoundConstants& c) {
  c.validate();
  return theorem2_bound(c);
}

BoundConstants constants_for(const EnvSpec& env, const Policy& policy,
                             const ClassWeights& weights) {
  BoundConstants c;
  c.m_r = env.declared().m_r;
  c.l_r = env.declared().l_r;
  c.l_p = env.declared().l_p;
  c.l_q = policy.lipschitz_q();
  c.gamma = env.gamma();
  c.nx = env.nx();
  c.nu = env.nu();
  c.pops = weights.pops();
  c.source = "declared";
  return c;
}

GapReport measure_gap(const EnvSpec& env, const Policy& policy,
                      const AgentState& x0, const StateArg& mu0, int64_t reps,
                      double tol, uint64_t seed, int threads) {
  const ClassWeights& w = x0.weights();
  GapReport report;
  report.env = env.name();
  report.pops = w.pops();
  report.seed = seed;

  double v_mf_value = 0.0;
  if (env.regime() == Regime::kClass) {
    const auto* bar = std::get_if<ClassDistCollection>(&mu0);
    if (!bar || !(*bar == x0.empirical_class())) {
      throw Error(ErrorKind::kInitMismatch,
                  "mu0 is not the empirical class distribution of x0");
    }
    const MFValue v = v_mf_bar(env, policy, *bar, w, tol);
    v_mf_value = v.value;
    report.horizon_mf = v.horizon;
  } else {
    const auto* joint = std::get_if<JointDist>(&mu0);
    if (!joint || !(*joint == x0.empirical_joint())) {
      throw Error(ErrorKind::kInitMismatch,
                  "mu0 is not the empirical joint distribution of x0");
    }
    const MFValue v = v_mf(env, policy, *joint, tol);
    v_mf_value = v.value;
    report.horizon_mf = v.horizon;
  }
  const ValueEstimate vn = v_n_estimate(env, policy, x0, reps, tol, seed, threads);
  report.v_n = vn.mean;
  report.v_n_stderr = vn.stderr_;
  report.horizon_n = vn.horizon;
  report.v_mf = v_mf_value;
  report.gap = std::fabs(vn.mean - v_mf_value);
  report.gap_ci_half = vn.ci95();

  report.constants = constants_for(env, policy, w);
  try {
    switch (env.regime()) {
      case Regime::kJoint:
        report.theorem = "theorem1";
        report.bound = theorem1_bound(report.constants);
        break;
      case Regime::kClass:
        report.theorem = "theorem2";
        report.bound = theorem2_bound(report.constants);
        break;
      case Regime::kMarginal:
        report.theorem = "theorem3";
        report.bound = theorem3_bound(report.constants);
        break;
    }
    report.bound_valid = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kBoundInvalid) throw;
    report.bound = std::numeric_limits<double>::infinity();
    report.bound_valid = false;
  }
  return report;
}

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::kShapeError, "slope needs two or more points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mfc
