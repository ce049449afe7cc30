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

#include "mfc/npg.h"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "mfc/meanfield.h"
#include "mfc/parallel.h"

namespace mfc {

int horizon_cap(double gamma) {
  if (gamma <= 0.0) return 0;
  return static_cast<int>(std::ceil(std::log(1e-8) / std::log(gamma)));
}

OccupationSampler::OccupationSampler(const EnvSpec& env, const Policy& policy,
                                     JointDist mu0, SamplerOptions options)
    : nk_(env.nk()),
      nx_(env.nx()),
      nu_(env.nu()),
      gamma_(env.gamma()),
      cap_(horizon_cap(env.gamma())),
      options_(options) {
  if (env.regime() == Regime::kClass) {
    throw Error(ErrorKind::kRegimeError,
                "the occupation sampler runs on the joint system; translate "
                "class environments first");
  }
  if (mu0.n() != nx_ || mu0.nk() != nk_) {
    throw Error(ErrorKind::kShapeError, "mu0 does not match the environment");
  }
  weights_.assign(nk_, 1.0);
  if (options_.weighting == RewardWeighting::kTheta) {
    weights_ = mu0.class_masses();
  }
  // Two geometric loops of at most cap_ transitions each.
  const int steps = 2 * cap_ + 1;
  path_.reserve(steps);
  JointDist mu = std::move(mu0);
  for (int t = 0; t < steps; ++t) {
    MFStep step = mf_step(env, policy, mu);
    PathStep ps{mu, std::vector<double>(static_cast<size_t>(nk_) * nx_ * nu_),
                build_step_tables(env, make_regime_args(env, mu, step.nu))};
    const std::vector<double> feat = features_from_joint(policy.regime(), mu);
    for (int k = 0; k < nk_; ++k) {
      for (int x = 0; x < nx_; ++x) {
        policy.probs(k, x, feat,
                     std::span<double>(ps.pi).subspan((k * nx_ + x) * nu_, nu_));
      }
    }
    path_.push_back(std::move(ps));
    mu = std::move(step.next);
  }
}

int OccupationSampler::draw_action(int t, int k, int x, Rng& rng) const {
  const auto& pi = path_[t].pi;
  return sample_categorical(
      std::span<const double>(pi).subspan((k * nx_ + x) * nu_, nu_), rng);
}

int OccupationSampler::draw_next(int t, int k, int x, int u, Rng& rng) const {
  return sample_categorical(path_[t].tables.p(k, x, u), rng);
}

OccupancySample OccupationSampler::sample(Rng& rng) const {
  OccupancySample s;
  std::vector<int> x(nk_), u(nk_);
  const JointDist& mu0 = path_[0].mu;
  for (int k = 0; k < nk_; ++k) {
    std::vector<double> row(nx_);
    for (int i = 0; i < nx_; ++i) row[i] = mu0(i, k);
    const double mass = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(mass > 0.0)) row.assign(nx_, 1.0);
    x[k] = sample_categorical(row, rng);
    u[k] = draw_action(0, k, x[k], rng);
  }

  // Stop time: the flag is drawn before each system update, so
  // P(T = t) = (1 - gamma) gamma^t.
  int t = 0;
  for (;;) {
    if (uniform01(rng) < 1.0 - gamma_) break;
    if (t == cap_) {
      s.horizon_cap_hit = true;
      break;
    }
    for (int k = 0; k < nk_; ++k) x[k] = draw_next(t, k, x[k], u[k], rng);
    ++t;
    for (int k = 0; k < nk_; ++k) u[k] = draw_action(t, k, x[k], rng);
  }
  s.stop_time = t;
  s.x = x;
  s.mu = path_[t].mu;
  s.u = u;

  bool q_branch = true;
  if (options_.variant == AdvantageVariant::kCorrected) {
    q_branch = uniform01(rng) < 0.5;
    if (!q_branch) {
      for (int k = 0; k < nk_; ++k) u[k] = draw_action(t, k, x[k], rng);
    }
  }
  double sum = 0.0;
  const int start = t;
  for (;;) {
    const StepTables& tab = path_[t].tables;
    for (int k = 0; k < nk_; ++k) sum += weights_[k] * tab.r(k, x[k], u[k]);
    ++s.sum_length;
    if (uniform01(rng) < 1.0 - gamma_) break;
    if (t - start == cap_) {
      s.horizon_cap_hit = true;
      break;
    }
    for (int k = 0; k < nk_; ++k) x[k] = draw_next(t, k, x[k], u[k], rng);
    ++t;
    for (int k = 0; k < nk_; ++k) u[k] = draw_action(t, k, x[k], rng);
  }
  if (options_.variant == AdvantageVariant::kLiteral) {
    q_branch = uniform01(rng) >= 0.5;
  }
  s.q_branch = q_branch;
  s.advantage = q_branch ? 2.0 * sum : -2.0 * sum;
  return s;
}

OccupancySample sample_occupation(const EnvSpec& env, const PolicyParams& phi,
                                  const JointDist& mu0, Rng& rng,
                                  SamplerOptions options) {
  const SoftmaxPolicy policy(phi);
  return OccupationSampler(env, policy, mu0, options).sample(rng);
}

std::vector<double> inner_direction(const SoftmaxPolicy& policy,
                                    std::span<const double> w,
                                    const OccupancySample& sample,
                                    double gamma) {
  const std::vector<double> g =
      score_gradient(policy, sample.x, StateArg(sample.mu), sample.u);
  if (w.size() != g.size()) {
    throw Error(ErrorKind::kShapeError, "w has the wrong dimension");
  }
  double wg = 0.0;
  for (size_t i = 0; i < g.size(); ++i) wg += w[i] * g[i];
  const double coef = wg - sample.advantage / (1.0 - gamma);
  std::vector<double> h(g.size());
  for (size_t i = 0; i < g.size(); ++i) h[i] = coef * g[i];
  return h;
}

void NPGConfig::validate() const {
  if (!(eta >= 0.0) || !(alpha > 0.0)) {
    throw Error(ErrorKind::kConfigError, "need eta >= 0 and alpha > 0");
  }
  if (J < 1 || L < 1) throw Error(ErrorKind::kConfigError, "need J, L >= 1");
  if (threads < 1) throw Error(ErrorKind::kConfigError, "threads must be >= 1");
}

double NPGReport::mean_value() const {
  const auto& v = snapshot.values;
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

EnvSpec joint_view(const EnvSpec& env, const NPGConfig& config) {
  if (env.regime() != Regime::kClass) return env;
  if (config.pops.empty()) {
    throw Error(ErrorKind::kConfigError,
                "class environments need populations for NPG training");
  }
  return translate_class_to_joint(env, ClassWeights(config.pops));
}

}  // namespace

NPGReport npg_train(const EnvSpec& env_in, const NPGConfig& config,
                    const PolicyParams& phi0) {
  config.validate();
  const EnvSpec env = joint_view(env_in, config);
  const double gamma = env.gamma();
  const int d = phi0.d();
  std::vector<double> w0 = config.w0;
  if (w0.empty()) w0.assign(d, 0.0);
  if (static_cast<int>(w0.size()) != d) {
    throw Error(ErrorKind::kShapeError, "w0 does not match the policy dimension");
  }

  NPGReport report;
  PolicyParams phi = phi0;
  for (int j = 0; j < config.J; ++j) {
    const SoftmaxPolicy policy(phi);
    const OccupationSampler sampler(env, policy, config.mu0, config.sampler);
    const uint64_t outer = split_seed(config.seed, static_cast<uint64_t>(j));

    std::vector<OccupancySample> samples(config.L);
    std::vector<std::vector<double>> scores(config.L);
    parallel_for(config.L, config.threads, [&](int64_t l) {
      Rng rng = make_rng(outer, static_cast<uint64_t>(l));
      samples[l] = sampler.sample(rng);
      scores[l] = score_gradient(policy, samples[l].x,
                                 StateArg(samples[l].mu), samples[l].u);
    });

    std::vector<double> w = w0;
    std::vector<double> w_sum(d, 0.0);
    double max_g = 0.0;
    for (int l = 0; l < config.L; ++l) {
      const std::vector<double>& g = scores[l];
      double wg = 0.0;
      for (int i = 0; i < d; ++i) wg += w[i] * g[i];
      const double coef = wg - samples[l].advantage / (1.0 - gamma);
      for (int i = 0; i < d; ++i) w[i] -= config.alpha * coef * g[i];
      if (!(norm2(w) <= 1e6)) {
        throw Error(ErrorKind::kDivergedInnerLoop,
                    "inner loop diverged at j=" + std::to_string(j) +
                        ", l=" + std::to_string(l));
      }
      for (int i = 0; i < d; ++i) w_sum[i] += w[i];
      max_g = std::max(max_g, norm2(g));
      if (samples[l].horizon_cap_hit) ++report.horizon_cap_hits;
    }
    for (double& v : w_sum) v /= config.L;

    double loss = 0.0;
    for (int l = 0; l < config.L; ++l) {
      double wg = 0.0;
      for (int i = 0; i < d; ++i) wg += w_sum[i] * scores[l][i];
      const double r = samples[l].advantage - (1.0 - gamma) * wg;
      loss += r * r;
    }
    report.residual_loss.push_back(loss / config.L);
    report.w_norms.push_back(norm2(w_sum));
    report.max_score_norm.push_back(max_g);

    for (int i = 0; i < d; ++i) phi.phi[i] += config.eta * w_sum[i];
    report.snapshot.iterates.push_back(phi);
    report.snapshot.values.push_back(
        v_mf(env, SoftmaxPolicy(phi), config.mu0, config.value_tol).value);
  }
  return report;
}

FisherDiagnostics fisher_diagnostics(const PolicyParams& phi,
                                     const JointDist& mu0, const EnvSpec& env,
                                     int samples, uint64_t seed,
                                     SamplerOptions options) {
  const int d = phi.d();
  if (samples < 1) throw Error(ErrorKind::kConfigError, "samples must be >= 1");
  const SoftmaxPolicy policy(phi);
  const OccupationSampler sampler(env, policy, mu0, options);

  // A fixed small perturbation of Phi for the local Lipschitz estimate.
  Rng prng = make_rng(seed, 1u << 20);
  std::normal_distribution<double> normal(0.0, 1.0);
  PolicyParams moved = phi;
  std::vector<double> delta(d);
  for (double& v : delta) v = normal(prng);
  const double scale = 1e-4 / std::max(norm2(delta), 1e-300);
  for (int i = 0; i < d; ++i) {
    delta[i] *= scale;
    moved.phi[i] += delta[i];
  }
  const SoftmaxPolicy moved_policy(moved);
  const double delta_norm = norm2(delta);

  FisherDiagnostics out;
  out.samples = samples;
  Eigen::MatrixXd fisher = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < samples; ++i) {
    Rng rng = make_rng(seed, static_cast<uint64_t>(i));
    const OccupancySample s = sampler.sample(rng);
    const std::vector<double> g =
        score_gradient(policy, s.x, StateArg(s.mu), s.u);
    const std::vector<double> g2 =
        score_gradient(moved_policy, s.x, StateArg(s.mu), s.u);
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), d);
    fisher.noalias() += gv * gv.transpose();
    out.max_score_norm = std::max(out.max_score_norm, gv.norm());
    double diff = 0.0;
    for (int k = 0; k < d; ++k) diff += (g2[k] - g[k]) * (g2[k] - g[k]);
    out.score_lipschitz =
        std::max(out.score_lipschitz, std::sqrt(diff) / delta_norm);
  }
  fisher /= samples;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      fisher, Eigen::EigenvaluesOnly);
  // A Gram matrix is PSD; clip rounding noise below zero.
  out.min_eigenvalue = std::max(0.0, solver.eigenvalues()(0));
  return out;
}

}  // namespace mfc
