// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Design-aware actor-critic. The gear-ratio design is encoded into a small
// tanh latent, stacked under the proprioceptive observation and fed through
// a shared tanh trunk into a Gaussian actor head (state-independent log-std)
// and a scalar value head. All parameters live in one flat vector so Adam,
// finite differences and checkpoints treat them uniformly.

#ifndef CODESIGN_POLICY_HPP_
#define CODESIGN_POLICY_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "codesign/design_space.hpp"
#include "codesign/ppo_config.hpp"
#include "codesign/rng.hpp"

namespace codesign {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct PolicyShape {
  int design_dim = 2;
  int proprio_dim = 10;
  int latent_dim = 4;
  int hidden_dim = 64;
  int action_dim = 4;

  int obs_dim() const { return proprio_dim + latent_dim; }
  Eigen::Index param_count() const;
  bool operator==(const PolicyShape&) const = default;
};

// Offsets of each parameter block inside the flat vector, in checkpoint
// order. Matrices are stored column-major.
struct ParamLayout {
  Eigen::Index encoder_w, encoder_b;
  Eigen::Index trunk1_w, trunk1_b;
  Eigen::Index trunk2_w, trunk2_b;
  Eigen::Index actor_w, actor_b;
  Eigen::Index log_std;
  Eigen::Index critic_w, critic_b;
  Eigen::Index total;

  static ParamLayout of(const PolicyShape& shape);
};

struct PolicyParams {
  PolicyShape shape;
  Eigen::VectorXd data;
  std::uint64_t snapshot_id = 0;
  std::uint64_t seed = 0;

  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  MatrixMap encoder_w();
  VectorMap encoder_b();
  MatrixMap trunk1_w();
  VectorMap trunk1_b();
  MatrixMap trunk2_w();
  VectorMap trunk2_b();
  MatrixMap actor_w();
  VectorMap actor_b();
  VectorMap log_std();
  MatrixMap critic_w();
  VectorMap critic_b();

  ConstMatrixMap encoder_w() const;
  ConstVectorMap encoder_b() const;
  ConstMatrixMap trunk1_w() const;
  ConstVectorMap trunk1_b() const;
  ConstMatrixMap trunk2_w() const;
  ConstVectorMap trunk2_b() const;
  ConstMatrixMap actor_w() const;
  ConstVectorMap actor_b() const;
  ConstVectorMap log_std() const;
  ConstMatrixMap critic_w() const;
  ConstVectorMap critic_b() const;

  static PolicyParams zeros(const PolicyShape& shape);
};

// Orthogonal init (gain 1 for encoder, trunk and critic; 0.01 for the actor
// head), zero biases, log_std = -0.5.
PolicyParams policy_init(int obs_dim, int action_dim, int design_dim, Rng& rng,
                         int hidden_dim = 64, int latent_dim = 4);

struct ActionDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
};

struct PolicyOutput {
  ActionDistribution dist;
  double value = 0.0;
  Eigen::VectorXd observation;  // proprio stacked over the design latent
};

PolicyOutput policy_forward(const PolicyParams& params, const DesignVector& design,
                            const Eigen::VectorXd& proprio);

// Column-per-sample forward pass used for rollouts and training.
struct BatchForward {
  Eigen::MatrixXd latent;
  Eigen::MatrixXd obs;
  Eigen::MatrixXd hidden1;
  Eigen::MatrixXd hidden2;
  Eigen::MatrixXd mean;
  Eigen::RowVectorXd value;
};

BatchForward forward_batch(const PolicyParams& params, const Eigen::MatrixXd& designs,
                           const Eigen::MatrixXd& proprio);

std::pair<Eigen::VectorXd, double> sample_action(const ActionDistribution& dist, Rng& rng);
double log_prob(const ActionDistribution& dist, const Eigen::VectorXd& action);
double entropy(const Eigen::VectorXd& log_std);

struct MiniBatch {
  Eigen::MatrixXd designs;   // design_dim x B
  Eigen::MatrixXd proprio;   // proprio_dim x B
  Eigen::MatrixXd actions;   // action_dim x B
  Eigen::VectorXd old_log_prob;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return actions.cols(); }
};

struct LossTerms {
  double policy_loss = 0.0;  // negated clipped surrogate
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

struct LossAndGrads {
  LossTerms loss;
  PolicyParams grads;
};

LossAndGrads loss_and_grads(const PolicyParams& params, const MiniBatch& batch,
                            const PpoConfig& cfg);

// Loss only; shares the forward path with loss_and_grads.
LossTerms evaluate_loss(const PolicyParams& params, const MiniBatch& batch,
                        const PpoConfig& cfg);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState adam_init(const PolicyParams& params, double learning_rate);

std::pair<PolicyParams, AdamState> adam_step(const PolicyParams& params,
                                             const PolicyParams& grads,
                                             const AdamState& opt);

// Checkpoint: 56-byte header (magic "CDSGPOL\0", u32 version, u32 dims x5,
// u64 snapshot id, u64 seed, u64 parameter count) followed by the flat
// parameter block as little-endian IEEE-754 doubles.
std::string serialize_policy(const PolicyParams& params);
PolicyParams deserialize_policy(const std::string& bytes, const std::string& origin);
void save_policy(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_policy(const std::filesystem::path& path);

}  // namespace codesign

#endif  // CODESIGN_POLICY_HPP_
