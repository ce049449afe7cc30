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

#include "mfc/builtin_envs.h"

#include <algorithm>
#include <cmath>

#include "mfc/json_util.h"

namespace mfc {

EnvSpec make_constant_env(int nx, int nu, int nk, double c, double gamma,
                          Regime regime) {
  RewardFn reward = [c](int, int, int, const RegimeArgs&) { return c; };
  TransitionFn transition = [](int, int x, int, const RegimeArgs&,
                               std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[x] = 1.0;
  };
  return EnvSpec("constant", nx, nu, nk, gamma, regime, std::move(reward),
                 std::move(transition), {std::fabs(c), 0.0, 0.0});
}

EnvSpec make_uniform_transition_env(int nx, int nu, int nk, double c,
                                    double gamma) {
  RewardFn reward = [c](int, int, int, const RegimeArgs&) { return c; };
  TransitionFn transition = [nx](int, int, int, const RegimeArgs&,
                                 std::span<double> out) {
    std::fill(out.begin(), out.end(), 1.0 / nx);
  };
  return EnvSpec("uniform", nx, nu, nk, gamma, Regime::kJoint,
                 std::move(reward), std::move(transition),
                 {std::fabs(c), 0.0, 0.0});
}

EnvSpec make_cycle_env(int nx, int nu, int nk, double gamma) {
  RewardFn reward = [](int, int x, int, const RegimeArgs&) {
    return x == 0 ? 1.0 : 0.0;
  };
  TransitionFn transition = [nx](int, int x, int, const RegimeArgs&,
                                 std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[(x + 1) % nx] = 1.0;
  };
  return EnvSpec("cycle", nx, nu, nk, gamma, Regime::kJoint,
                 std::move(reward), std::move(transition), {1.0, 0.0, 0.0});
}

EnvSpec make_bandit_env(double reward0, double reward1) {
  RewardFn reward = [reward0, reward1](int, int, int u, const RegimeArgs&) {
    return u == 0 ? reward0 : reward1;
  };
  TransitionFn transition = [](int, int x, int, const RegimeArgs&,
                               std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[x] = 1.0;
  };
  return EnvSpec("bandit", 2, 2, 1, 0.0, Regime::kJoint, std::move(reward),
                 std::move(transition),
                 {std::max(std::fabs(reward0), std::fabs(reward1)), 0.0, 0.0});
}

namespace {

struct CongestionTables {
  int nk, nx, nu;
  std::vector<double> a, b, w;
  double lambda, follow;
  double a_max = 0.0, b_max = 0.0, w_max = 0.0;
};

CongestionTables resolve(const CongestionParams& p) {
  if (p.nk < 1 || p.nx < 1 || p.nu < 1) {
    throw Error(ErrorKind::kConfigError, "congestion dimensions must be >= 1");
  }
  if (p.lambda < 0.0 || p.lambda > 1.0 || p.base_follow < 0.0 ||
      p.base_follow > 1.0) {
    throw Error(ErrorKind::kConfigError,
                "lambda and base_follow must lie in [0,1]");
  }
  CongestionTables t{p.nk, p.nx, p.nu, p.a, p.b, p.w, p.lambda, p.base_follow};
  const size_t n_a = static_cast<size_t>(p.nk) * p.nx * p.nu;
  if (t.a.empty()) {
    t.a.resize(n_a);
    for (int k = 0; k < p.nk; ++k) {
      for (int x = 0; x < p.nx; ++x) {
        for (int u = 0; u < p.nu; ++u) {
          const int r = (x + 2 * u + 3 * k) % 5;
          t.a[(k * p.nx + x) * p.nu + u] = 0.25 * (r / 2.0 - 1.0);
        }
      }
    }
  }
  if (t.b.empty()) {
    for (int k = 0; k < p.nk; ++k) t.b.push_back(1.0 + 0.5 * k);
  }
  if (t.w.empty()) {
    t.w.assign(static_cast<size_t>(p.nk) * p.nk, 0.5);
    for (int k = 0; k < p.nk; ++k) t.w[k * p.nk + k] = 1.0;
  }
  if (t.a.size() != n_a || static_cast<int>(t.b.size()) != p.nk ||
      t.w.size() != static_cast<size_t>(p.nk) * p.nk) {
    throw Error(ErrorKind::kConfigError, "congestion table sizes");
  }
  for (double v : t.a) t.a_max = std::max(t.a_max, std::fabs(v));
  for (double v : t.b) {
    if (v < 0.0) throw Error(ErrorKind::kConfigError, "b_k must be >= 0");
    t.b_max = std::max(t.b_max, v);
  }
  for (double v : t.w) {
    if (v < 0.0) throw Error(ErrorKind::kConfigError, "w must be >= 0");
    t.w_max = std::max(t.w_max, v);
  }
  return t;
}

// (1 - lambda) Base_k(x,u) + lambda Crowd(m), Crowd(m)(x') = (1-m(x'))/(nx-1).
void congestion_kernel(const CongestionTables& t, int k, int x, int u,
                       std::span<const double> state_marginal,
                       std::span<double> out) {
  const int nx = t.nx;
  const int target = (x + u + k) % nx;
  const double spread = (1.0 - t.follow) / nx;
  for (int y = 0; y < nx; ++y) {
    double base = spread + (y == target ? t.follow : 0.0);
    double crowd = nx == 1 ? 1.0 : (1.0 - state_marginal[y]) / (nx - 1);
    out[y] = (1.0 - t.lambda) * base + t.lambda * crowd;
  }
}

}  // namespace

EnvSpec make_congestion_env(const CongestionParams& params) {
  const CongestionTables t = resolve(params);
  RewardFn reward = [t](int k, int x, int u, const RegimeArgs& args) {
    const auto& nu = std::get<JointArgs>(args).action;
    double load_u = 0.0;
    double mean = 0.0;
    for (int v = 0; v < t.nu; ++v) {
      double load = 0.0;
      for (int j = 0; j < t.nk; ++j) load += t.w[k * t.nk + j] * nu(v, j);
      if (v == u) load_u = load;
      mean += load;
    }
    mean /= t.nu;
    return t.a[(k * t.nx + x) * t.nu + u] - t.b[k] * std::fabs(load_u - mean);
  };
  TransitionFn transition = [t](int k, int x, int u, const RegimeArgs& args,
                                std::span<double> out) {
    const auto& mu = std::get<JointArgs>(args).state;
    std::vector<double> m(t.nx, 0.0);
    for (int y = 0; y < t.nx; ++y) {
      for (int j = 0; j < t.nk; ++j) m[y] += mu(y, j);
    }
    congestion_kernel(t, k, x, u, m, out);
  };
  double bw = 0.0;
  for (int k = 0; k < t.nk; ++k) {
    double row_max = 0.0;
    for (int j = 0; j < t.nk; ++j) row_max = std::max(row_max, t.w[k * t.nk + j]);
    bw = std::max(bw, t.b[k] * row_max);
  }
  LipschitzConstants declared{t.a_max + bw, bw * (1.0 + 1.0 / t.nu), t.lambda};
  return EnvSpec("congestion", t.nx, t.nu, t.nk, params.gamma, Regime::kJoint,
                 std::move(reward), std::move(transition), declared);
}

EnvSpec make_marginal_congestion_env(const CongestionParams& params) {
  const CongestionTables t = resolve(params);
  RewardFn reward = [t](int k, int x, int u, const RegimeArgs& args) {
    const auto& nu = std::get<MarginalArgs>(args).action;
    return t.a[(k * t.nx + x) * t.nu + u] -
           t.b[k] * std::fabs(nu(u) - 1.0 / t.nu);
  };
  TransitionFn transition = [t](int k, int x, int u, const RegimeArgs& args,
                                std::span<double> out) {
    congestion_kernel(t, k, x, u, std::get<MarginalArgs>(args).state.values(),
                      out);
  };
  // nu[U] moves with zero total change, so |d nu(u)| <= |d nu|_1 / 2.
  LipschitzConstants declared{t.a_max + t.b_max * (1.0 - 1.0 / t.nu),
                              t.b_max / 2.0, t.lambda};
  return EnvSpec("marginal-congestion", t.nx, t.nu, t.nk, params.gamma,
                 Regime::kMarginal, std::move(reward), std::move(transition),
                 declared);
}

EnvSpec make_sis_epidemic_env(const SisParams& params) {
  const int nk = params.nk;
  if (nk < 1 || params.beta.size() != 2) {
    throw Error(ErrorKind::kConfigError, "sis needs nk >= 1 and two betas");
  }
  auto fill = [nk](std::vector<double> v, double fallback, const char* what) {
    if (v.empty()) v.assign(nk, fallback);
    if (static_cast<int>(v.size()) != nk) {
      throw Error(ErrorKind::kConfigError, std::string("sis ") + what +
                                               " must have nk entries");
    }
    return v;
  };
  std::vector<double> contact = params.contact;
  if (contact.empty()) {
    contact.assign(static_cast<size_t>(nk) * nk, nk > 1 ? 0.3 / (nk - 1) : 0.0);
    for (int k = 0; k < nk; ++k) contact[k * nk + k] = 0.6;
  }
  if (contact.size() != static_cast<size_t>(nk) * nk) {
    throw Error(ErrorKind::kConfigError, "sis contact must be nk x nk");
  }
  const std::vector<double> delta = fill(params.recovery, 0.3, "recovery");
  const std::vector<double> h = fill(params.infection_cost, 1.0, "infection_cost");
  const std::vector<double> pc =
      fill(params.protection_cost, 0.3, "protection_cost");
  const std::vector<double> beta = params.beta;
  const double rho = params.prevalence_cost;

  double beta_max = 0.0, c_max = 0.0;
  for (double b : beta) beta_max = std::max(beta_max, b);
  for (int k = 0; k < nk; ++k) {
    double row = 0.0;
    for (int j = 0; j < nk; ++j) {
      row += contact[k * nk + j];
      c_max = std::max(c_max, contact[k * nk + j]);
    }
    if (beta_max * row > 1.0 + 1e-12) {
      throw Error(ErrorKind::kConfigError,
                  "sis infection probability can exceed 1");
    }
  }
  for (double d : delta) {
    if (d < 0.0 || d > 1.0) {
      throw Error(ErrorKind::kConfigError, "sis recovery must lie in [0,1]");
    }
  }

  RewardFn reward = [=](int k, int x, int u, const RegimeArgs& args) {
    const auto& mu = std::get<ClassArgs>(args).state;
    double prevalence = 0.0;
    for (int j = 0; j < nk; ++j) prevalence += mu(1, j);
    return -h[k] * (x == 1 ? 1.0 : 0.0) - pc[k] * (u == 0 ? 1.0 : 0.0) -
           rho * prevalence / nk;
  };
  TransitionFn transition = [=](int k, int x, int u, const RegimeArgs& args,
                                std::span<double> out) {
    const auto& mu = std::get<ClassArgs>(args).state;
    if (x == 1) {
      out[0] = delta[k];
      out[1] = 1.0 - delta[k];
      return;
    }
    double pressure = 0.0;
    for (int j = 0; j < nk; ++j) pressure += contact[k * nk + j] * mu(1, j);
    const double p = std::clamp(beta[u] * pressure, 0.0, 1.0);
    out[0] = 1.0 - p;
    out[1] = p;
  };
  double h_max = 0.0, p_max = 0.0;
  for (double v : h) h_max = std::max(h_max, std::fabs(v));
  for (double v : pc) p_max = std::max(p_max, std::fabs(v));
  // Each class row has two atoms, so |d mu_bar(I,k)| = |d mu_bar(.,k)|_1 / 2.
  LipschitzConstants declared{h_max + p_max + std::fabs(rho),
                              std::fabs(rho) / (2.0 * nk), beta_max * c_max};
  return EnvSpec("sis", 2, 2, nk, params.gamma, Regime::kClass,
                 std::move(reward), std::move(transition), declared);
}

std::vector<std::string> builtin_env_names() {
  return {"constant", "uniform", "cycle", "bandit", "congestion",
          "marginal-congestion", "sis"};
}

namespace {

CongestionParams congestion_from_json(const nlohmann::json& p) {
  check_keys(p, {"nk", "nx", "nu", "gamma", "lambda", "base_follow", "a", "b",
                 "w"},
             "congestion params");
  CongestionParams c;
  c.nk = get_or(p, "nk", c.nk);
  c.nx = get_or(p, "nx", c.nx);
  c.nu = get_or(p, "nu", c.nu);
  c.gamma = get_or(p, "gamma", c.gamma);
  c.lambda = get_or(p, "lambda", c.lambda);
  c.base_follow = get_or(p, "base_follow", c.base_follow);
  c.a = get_or(p, "a", c.a);
  c.b = get_or(p, "b", c.b);
  c.w = get_or(p, "w", c.w);
  return c;
}

}  // namespace

EnvSpec make_env_from_json(const nlohmann::json& doc) {
  check_keys(doc, {"name", "params"}, "env");
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw Error(ErrorKind::kConfigError, "env.name is required");
  }
  const std::string name = doc["name"].get<std::string>();
  const nlohmann::json p = doc.value("params", nlohmann::json::object());
  try {
    if (name == "constant") {
      check_keys(p, {"nx", "nu", "nk", "c", "gamma", "regime"},
                 "constant params");
      return make_constant_env(get_or(p, "nx", 2), get_or(p, "nu", 2),
                               get_or(p, "nk", 1), get_or(p, "c", 1.0),
                               get_or(p, "gamma", 0.5),
                               regime_from_name(get_or<std::string>(
                                   p, "regime", "joint")));
    }
    if (name == "uniform") {
      check_keys(p, {"nx", "nu", "nk", "c", "gamma"}, "uniform params");
      return make_uniform_transition_env(get_or(p, "nx", 1), get_or(p, "nu", 32),
                                         get_or(p, "nk", 1), get_or(p, "c", 0.0),
                                         get_or(p, "gamma", 0.5));
    }
    if (name == "cycle") {
      check_keys(p, {"nx", "nu", "nk", "gamma"}, "cycle params");
      return make_cycle_env(get_or(p, "nx", 3), get_or(p, "nu", 2),
                            get_or(p, "nk", 1), get_or(p, "gamma", 0.5));
    }
    if (name == "bandit") {
      check_keys(p, {"rewards"}, "bandit params");
      const auto r = get_or(p, "rewards", std::vector<double>{0.0, 1.0});
      if (r.size() != 2) {
        throw Error(ErrorKind::kConfigError, "bandit needs two rewards");
      }
      return make_bandit_env(r[0], r[1]);
    }
    if (name == "congestion") return make_congestion_env(congestion_from_json(p));
    if (name == "marginal-congestion") {
      return make_marginal_congestion_env(congestion_from_json(p));
    }
    if (name == "sis") {
      check_keys(p, {"nk", "gamma", "beta", "contact", "recovery",
                     "infection_cost", "protection_cost", "prevalence_cost"},
                 "sis params");
      SisParams s;
      s.nk = get_or(p, "nk", s.nk);
      s.gamma = get_or(p, "gamma", s.gamma);
      s.beta = get_or(p, "beta", s.beta);
      s.contact = get_or(p, "contact", s.contact);
      s.recovery = get_or(p, "recovery", s.recovery);
      s.infection_cost = get_or(p, "infection_cost", s.infection_cost);
      s.protection_cost = get_or(p, "protection_cost", s.protection_cost);
      s.prevalence_cost = get_or(p, "prevalence_cost", s.prevalence_cost);
      return make_sis_epidemic_env(s);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidDiscount ||
        e.kind() == ErrorKind::kShapeError) {
      throw Error(ErrorKind::kConfigError, e.what());
    }
    throw;
  }
  throw Error(ErrorKind::kConfigError, "unknown env '" + name + "'");
}

}  // namespace mfc
