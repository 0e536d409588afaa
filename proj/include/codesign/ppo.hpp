// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rollout collection over design-expanded environments, GAE and clipped PPO.

#ifndef CODESIGN_PPO_HPP_
#define CODESIGN_PPO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/environment.hpp"
#include "codesign/policy.hpp"
#include "codesign/ppo_config.hpp"
#include "codesign/rng.hpp"

namespace codesign {

// One live environment plus the bookkeeping of its running episode.
struct EnvSlot {
  std::unique_ptr<Environment> env;
  int design_index = 0;
  double episode_return = 0.0;  // unscaled reward
  int episode_length = 0;
};

std::vector<EnvSlot> make_env_slots(const ExpansionPlan& plan,
                                    std::span<const DesignVector> designs,
                                    const EnvFactory& factory, std::uint64_t seed,
                                    std::uint64_t phase);

struct EpisodeRecord {
  int env = 0;
  int design_index = 0;
  double episode_return = 0.0;
  int length = 0;
  bool failed = false;
};

// Samples are env-major: column env * horizon + t.
struct RolloutBatch {
  int n_env = 0;
  int horizon = 0;
  std::vector<int> design_index;   // per env
  Eigen::MatrixXd env_designs;     // design_dim x n_env
  Eigen::MatrixXd proprio;         // proprio_dim x samples
  Eigen::MatrixXd actions;         // action_dim x samples
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;         // scaled learning reward
  Eigen::VectorXd values;
  Eigen::VectorXd dones;           // 1 where the step ended an episode
  Eigen::VectorXd bootstrap;       // value after the last step, per env
  Eigen::VectorXd raw_advantages;  // filled by compute_gae
  Eigen::VectorXd advantages;      // standardized
  Eigen::VectorXd returns;
  std::vector<EpisodeRecord> episodes;

  Eigen::Index samples() const { return Eigen::Index(n_env) * horizon; }
  Eigen::Index at(int env, int t) const { return Eigen::Index(env) * horizon + t; }
};

RolloutBatch collect_rollouts(std::vector<EnvSlot>& envs, const PolicyParams& params,
                              int horizon, Rng& rng, double reward_scale = 1.0);

// Backward GAE recursion over one trajectory. `bootstrap` is the value of the
// state following the last step.
Eigen::VectorXd gae_advantages(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                               const Eigen::VectorXd& dones, double bootstrap, double gamma,
                               double lambda);

// Zero mean, unit standard deviation (population std plus 1e-8).
Eigen::VectorXd standardize(const Eigen::VectorXd& v);

void compute_gae(RolloutBatch& batch, double gamma, double lambda);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatch_updates = 0;
};

struct UpdateResult {
  PolicyParams params;
  AdamState opt;
  UpdateStats stats;
};

UpdateResult ppo_update(const PolicyParams& params, const AdamState& opt,
                        const RolloutBatch& batch, const PpoConfig& cfg, Rng& rng);

struct IterationStats {
  int iteration = 0;
  double mean_return = 0.0;  // completed episodes, carried forward if none
  double std_return = 0.0;
  int episodes = 0;
  UpdateStats update;
};

struct TrainResult {
  PolicyParams params;
  AdamState opt;
  std::vector<IterationStats> history;
  // Mean unscaled episode return per design over the terminal window; NaN
  // when a design completed no episode at all.
  std::vector<double> design_returns;
  std::vector<int> design_episodes;
  int total_episodes = 0;
};

// Collect, estimate and update `n_iterations` times. Environment, action and
// shuffle streams derive from (seed, phase).
TrainResult train(const PolicyParams& params, const AdamState& opt, const ExpansionPlan& plan,
                  std::span<const DesignVector> designs, int n_iterations,
                  const PpoConfig& cfg, const EnvFactory& factory, std::uint64_t seed,
                  std::uint64_t phase = 0);

// One full episode per environment without learning. Returns the mean
// unscaled return per design.
std::vector<double> rollout_returns(const PolicyParams& params, const ExpansionPlan& plan,
                                    std::span<const DesignVector> designs,
                                    const EnvFactory& factory, std::uint64_t seed,
                                    std::uint64_t phase = 0, bool deterministic = false);

}  // namespace codesign

#endif  // CODESIGN_PPO_HPP_
