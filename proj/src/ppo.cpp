// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "codesign/error.hpp"
#include "codesign/parallel.hpp"

namespace codesign {

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo.gamma", "ppo.gamma must lie in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw ConfigError("ppo.gae_lambda", "ppo.gae_lambda must lie in [0, 1]");
  if (!(clip > 0.0)) throw ConfigError("ppo.clip", "ppo.clip must be positive");
  if (epochs < 1) throw ConfigError("ppo.epochs", "ppo.epochs must be >= 1");
  if (minibatches < 1) throw ConfigError("ppo.minibatches", "ppo.minibatches must be >= 1");
  if (!(value_coef >= 0.0)) throw ConfigError("ppo.value_coef", "ppo.value_coef must be >= 0");
  if (!(entropy_coef >= 0.0))
    throw ConfigError("ppo.entropy_coef", "ppo.entropy_coef must be >= 0");
  if (horizon < 1) throw ConfigError("ppo.horizon", "ppo.horizon must be >= 1");
  if (eval_window < 1) throw ConfigError("ppo.eval_window", "ppo.eval_window must be >= 1");
  if (!(reward_scale > 0.0) || !std::isfinite(reward_scale))
    throw ConfigError("ppo.reward_scale", "ppo.reward_scale must be positive");
}

std::vector<EnvSlot> make_env_slots(const ExpansionPlan& plan,
                                    std::span<const DesignVector> designs,
                                    const EnvFactory& factory, std::uint64_t seed,
                                    std::uint64_t phase) {
  if (static_cast<int>(designs.size()) != plan.n_pop)
    throw DimensionError("make_env_slots: plan expects " + std::to_string(plan.n_pop) +
                         " designs, got " + std::to_string(designs.size()));
  std::vector<EnvSlot> slots(static_cast<std::size_t>(plan.n_env));
  for (int k = 0; k < plan.n_env; ++k) {
    EnvSlot& s = slots[static_cast<std::size_t>(k)];
    s.design_index = plan.design_of(k);
    s.env = factory(designs[static_cast<std::size_t>(s.design_index)],
                    derive_seed(seed, "env", phase, static_cast<std::uint64_t>(k)));
  }
  return slots;
}

namespace {

Eigen::MatrixXd design_matrix(const std::vector<EnvSlot>& envs) {
  const Eigen::Index dim = envs.front().env->design().dim();
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(envs.size()));
  for (std::size_t k = 0; k < envs.size(); ++k) m.col(Eigen::Index(k)) = envs[k].env->design().factors;
  return m;
}

Eigen::MatrixXd proprio_matrix(const std::vector<EnvSlot>& envs, int proprio_dim) {
  Eigen::MatrixXd m(proprio_dim, static_cast<Eigen::Index>(envs.size()));
  for (std::size_t k = 0; k < envs.size(); ++k) m.col(Eigen::Index(k)) = envs[k].env->proprio();
  return m;
}

void check_envs(const std::vector<EnvSlot>& envs, const PolicyParams& params) {
  if (envs.empty()) throw ContractError("rollout: no environments");
  for (const EnvSlot& s : envs) {
    if (s.env->proprio_dim() != params.shape.proprio_dim ||
        s.env->action_dim() != params.shape.action_dim ||
        s.env->design().dim() != params.shape.design_dim)
      throw DimensionError("rollout: environment and policy dimensions differ");
  }
}

struct StepInfo {
  double reward = 0.0;
  bool done = false;
  bool failed = false;
};

// Steps every env with its column of `actions`, resetting finished episodes.
std::vector<StepInfo> step_all(std::vector<EnvSlot>& envs, const Eigen::MatrixXd& actions) {
  std::vector<StepInfo> info(envs.size());
  parallel_for(envs.size(), [&](std::size_t k) {
    EnvSlot& s = envs[k];
    const StepResult r = s.env->step(actions.col(Eigen::Index(k)));
    info[k] = {r.reward, r.done, r.failed};
    s.episode_return += r.reward;
    ++s.episode_length;
  });
  return info;
}

}  // namespace

RolloutBatch collect_rollouts(std::vector<EnvSlot>& envs, const PolicyParams& params,
                              int horizon, Rng& rng, double reward_scale) {
  if (horizon < 1) throw ContractError("collect_rollouts: horizon must be >= 1");
  check_envs(envs, params);
  const PolicyShape& shape = params.shape;
  RolloutBatch b;
  b.n_env = static_cast<int>(envs.size());
  b.horizon = horizon;
  const Eigen::Index n = b.samples();
  b.env_designs = design_matrix(envs);
  for (const EnvSlot& s : envs) b.design_index.push_back(s.design_index);
  b.proprio.resize(shape.proprio_dim, n);
  b.actions.resize(shape.action_dim, n);
  b.log_probs.resize(n);
  b.rewards.resize(n);
  b.values.resize(n);
  b.dones.resize(n);

  ActionDistribution dist;
  dist.log_std = params.log_std();
  for (int t = 0; t < horizon; ++t) {
    const Eigen::MatrixXd proprio = proprio_matrix(envs, shape.proprio_dim);
    const BatchForward f = forward_batch(params, b.env_designs, proprio);
    Eigen::MatrixXd actions(shape.action_dim, b.n_env);
    for (int k = 0; k < b.n_env; ++k) {
      dist.mean = f.mean.col(k);
      auto [a, logp] = sample_action(dist, rng);
      actions.col(k) = a;
      const Eigen::Index i = b.at(k, t);
      b.proprio.col(i) = proprio.col(k);
      b.actions.col(i) = a;
      b.log_probs[i] = logp;
      b.values[i] = f.value[k];
    }
    const std::vector<StepInfo> info = step_all(envs, actions);
    for (int k = 0; k < b.n_env; ++k) {
      const Eigen::Index i = b.at(k, t);
      const StepInfo& s = info[static_cast<std::size_t>(k)];
      b.rewards[i] = reward_scale * s.reward;
      b.dones[i] = s.done ? 1.0 : 0.0;
      if (s.done) {
        EnvSlot& slot = envs[static_cast<std::size_t>(k)];
        b.episodes.push_back(
            {k, slot.design_index, slot.episode_return, slot.episode_length, s.failed});
        slot.episode_return = 0.0;
        slot.episode_length = 0;
        slot.env->reset();
      }
    }
  }
  b.bootstrap =
      forward_batch(params, b.env_designs, proprio_matrix(envs, shape.proprio_dim))
          .value.transpose();
  return b;
}

Eigen::VectorXd gae_advantages(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                               const Eigen::VectorXd& dones, double bootstrap, double gamma,
                               double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw DimensionError("gae_advantages: rewards, values and dones differ in length");
  Eigen::VectorXd adv(n);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double live = 1.0 - dones[t];
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    adv[t] = next_adv;
    next_value = values[t];
  }
  return adv;
}

Eigen::VectorXd standardize(const Eigen::VectorXd& v) {
  if (v.size() == 0) return v;
  const double mean = v.mean();
  const Eigen::ArrayXd centered = v.array() - mean;
  const double std = std::sqrt(centered.square().mean());
  return (centered / (std + 1e-8)).matrix();
}

void compute_gae(RolloutBatch& batch, double gamma, double lambda) {
  const Eigen::Index n = batch.samples();
  if (batch.rewards.size() != n || batch.values.size() != n || batch.dones.size() != n ||
      batch.bootstrap.size() != batch.n_env)
    throw DimensionError("compute_gae: batch is incomplete");
  batch.raw_advantages.resize(n);
  for (int k = 0; k < batch.n_env; ++k) {
    const Eigen::Index start = batch.at(k, 0);
    batch.raw_advantages.segment(start, batch.horizon) = gae_advantages(
        batch.rewards.segment(start, batch.horizon), batch.values.segment(start, batch.horizon),
        batch.dones.segment(start, batch.horizon), batch.bootstrap[k], gamma, lambda);
  }
  batch.returns = batch.raw_advantages + batch.values;
  batch.advantages = standardize(batch.raw_advantages);
}

UpdateResult ppo_update(const PolicyParams& params, const AdamState& opt,
                        const RolloutBatch& batch, const PpoConfig& cfg, Rng& rng) {
  const Eigen::Index n = batch.samples();
  if (batch.advantages.size() != n || batch.returns.size() != n)
    throw ContractError("ppo_update: advantages have not been computed");
  const int chunks = static_cast<int>(std::min<Eigen::Index>(cfg.minibatches, n));

  UpdateResult out{params, opt, {}};
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::shuffle(order.begin(), order.end(), rng);
    for (int mb = 0; mb < chunks; ++mb) {
      const Eigen::Index lo = n * mb / chunks;
      const Eigen::Index hi = n * (mb + 1) / chunks;
      const Eigen::Index m = hi - lo;
      MiniBatch mini;
      mini.designs.resize(params.shape.design_dim, m);
      mini.proprio.resize(params.shape.proprio_dim, m);
      mini.actions.resize(params.shape.action_dim, m);
      mini.old_log_prob.resize(m);
      mini.advantages.resize(m);
      mini.returns.resize(m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index i = order[static_cast<std::size_t>(lo + j)];
        mini.designs.col(j) = batch.env_designs.col(i / batch.horizon);
        mini.proprio.col(j) = batch.proprio.col(i);
        mini.actions.col(j) = batch.actions.col(i);
        mini.old_log_prob[j] = batch.log_probs[i];
        mini.advantages[j] = batch.advantages[i];
        mini.returns[j] = batch.returns[i];
      }
      try {
        LossAndGrads lg = loss_and_grads(out.params, mini, cfg);
        auto [next, next_opt] = adam_step(out.params, lg.grads, out.opt);
        if (!next.data.allFinite()) throw NumericError("parameters became non-finite");
        out.params = std::move(next);
        out.opt = std::move(next_opt);
        out.stats.policy_loss += lg.loss.policy_loss;
        out.stats.value_loss += lg.loss.value_loss;
        out.stats.entropy += lg.loss.entropy;
        out.stats.clip_fraction += lg.loss.clip_fraction;
        out.stats.approx_kl += lg.loss.approx_kl;
        ++out.stats.minibatch_updates;
      } catch (const NumericError& e) {
        throw NumericError("ppo_update epoch " + std::to_string(epoch) + " minibatch " +
                           std::to_string(mb) + ": " + e.what());
      }
    }
  }
  if (out.stats.minibatch_updates > 0) {
    const double k = out.stats.minibatch_updates;
    out.stats.policy_loss /= k;
    out.stats.value_loss /= k;
    out.stats.entropy /= k;
    out.stats.clip_fraction /= k;
    out.stats.approx_kl /= k;
  }
  return out;
}

TrainResult train(const PolicyParams& params, const AdamState& opt, const ExpansionPlan& plan,
                  std::span<const DesignVector> designs, int n_iterations,
                  const PpoConfig& cfg, const EnvFactory& factory, std::uint64_t seed,
                  std::uint64_t phase) {
  cfg.validate();
  if (n_iterations < 0) throw ContractError("train: n_iterations must be >= 0");
  TrainResult out{params, opt, {}, {}, {}, 0};
  const auto n_pop = static_cast<std::size_t>(plan.n_pop);
  out.design_returns.assign(n_pop, std::numeric_limits<double>::quiet_NaN());
  out.design_episodes.assign(n_pop, 0);
  if (n_iterations == 0) return out;

  std::vector<EnvSlot> envs = make_env_slots(plan, designs, factory, seed, phase);
  std::vector<double> window_sum(n_pop, 0.0), all_sum(n_pop, 0.0);
  std::vector<int> window_count(n_pop, 0), all_count(n_pop, 0);
  const int window_start = n_iterations - cfg.eval_window;
  double last_mean = std::numeric_limits<double>::quiet_NaN();
  double last_std = std::numeric_limits<double>::quiet_NaN();

  for (int it = 0; it < n_iterations; ++it) {
    Rng action_rng = make_rng(seed, "action", phase, static_cast<std::uint64_t>(it));
    RolloutBatch batch = collect_rollouts(envs, out.params, cfg.horizon, action_rng, cfg.reward_scale);
    compute_gae(batch, cfg.gamma, cfg.gae_lambda);
    Rng shuffle_rng = make_rng(seed, "ppo-shuffle", phase, static_cast<std::uint64_t>(it));
    UpdateResult upd = ppo_update(out.params, out.opt, batch, cfg, shuffle_rng);
    out.params = std::move(upd.params);
    out.opt = std::move(upd.opt);

    IterationStats stats;
    stats.iteration = it;
    stats.update = upd.stats;
    stats.episodes = static_cast<int>(batch.episodes.size());
    if (!batch.episodes.empty()) {
      double sum = 0.0;
      for (const EpisodeRecord& e : batch.episodes) sum += e.episode_return;
      last_mean = sum / static_cast<double>(batch.episodes.size());
      double sq = 0.0;
      for (const EpisodeRecord& e : batch.episodes)
        sq += (e.episode_return - last_mean) * (e.episode_return - last_mean);
      last_std = std::sqrt(sq / static_cast<double>(batch.episodes.size()));
    }
    stats.mean_return = last_mean;
    stats.std_return = last_std;
    out.history.push_back(stats);

    for (const EpisodeRecord& e : batch.episodes) {
      const auto j = static_cast<std::size_t>(e.design_index);
      all_sum[j] += e.episode_return;
      ++all_count[j];
      if (it >= window_start) {
        window_sum[j] += e.episode_return;
        ++window_count[j];
      }
      ++out.total_episodes;
    }
  }

  for (std::size_t j = 0; j < n_pop; ++j) {
    if (window_count[j] > 0) {
      out.design_returns[j] = window_sum[j] / window_count[j];
      out.design_episodes[j] = window_count[j];
    } else if (all_count[j] > 0) {
      out.design_returns[j] = all_sum[j] / all_count[j];
      out.design_episodes[j] = all_count[j];
    }
  }
  return out;
}

std::vector<double> rollout_returns(const PolicyParams& params, const ExpansionPlan& plan,
                                    std::span<const DesignVector> designs,
                                    const EnvFactory& factory, std::uint64_t seed,
                                    std::uint64_t phase, bool deterministic) {
  std::vector<EnvSlot> envs = make_env_slots(plan, designs, factory, seed, phase);
  check_envs(envs, params);
  const PolicyShape& shape = params.shape;
  const Eigen::MatrixXd env_designs = design_matrix(envs);
  Rng rng = make_rng(seed, "action", phase, 0xe5a1ULL);
  std::vector<bool> finished(envs.size(), false);
  std::vector<double> returns(envs.size(), 0.0);
  std::size_t remaining = envs.size();

  ActionDistribution dist;
  dist.log_std = params.log_std();
  while (remaining > 0) {
    const BatchForward f =
        forward_batch(params, env_designs, proprio_matrix(envs, shape.proprio_dim));
    Eigen::MatrixXd actions = f.mean;
    if (!deterministic) {
      for (Eigen::Index k = 0; k < actions.cols(); ++k) {
        dist.mean = f.mean.col(k);
        actions.col(k) = sample_action(dist, rng).first;
      }
    }
    // Finished envs idle until the slowest episode ends.
    std::vector<StepInfo> info(envs.size());
    parallel_for(envs.size(), [&](std::size_t k) {
      if (finished[k]) return;
      const StepResult r = envs[k].env->step(actions.col(Eigen::Index(k)));
      info[k] = {r.reward, r.done, r.failed};
    });
    for (std::size_t k = 0; k < envs.size(); ++k) {
      if (finished[k]) continue;
      returns[k] += info[k].reward;
      if (info[k].done) {
        finished[k] = true;
        --remaining;
        envs[k].env->reset();
      }
    }
  }

  std::vector<double> per_design(static_cast<std::size_t>(plan.n_pop), 0.0);
  for (std::size_t k = 0; k < envs.size(); ++k)
    per_design[static_cast<std::size_t>(envs[k].design_index)] += returns[k];
  for (double& r : per_design) r /= plan.n_exp;
  return per_design;
}

}  // namespace codesign
