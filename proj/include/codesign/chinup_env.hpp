// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Planar two-link chin-up model: a point-mass double pendulum hanging from a
// bar at the origin (y up). Joint 1 is the shoulder analog at the bar, joint 2
// the elbow analog; the head sits at the tip of link 2. Angles are measured
// from straight down. Both joints are PD position/velocity controlled with
// torque and velocity limits scaled by the gear-ratio design.

#ifndef CODESIGN_CHINUP_ENV_HPP_
#define CODESIGN_CHINUP_ENV_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/environment.hpp"
#include "codesign/reward.hpp"
#include "codesign/rng.hpp"

namespace codesign {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

struct EnvConfig {
  double m1 = 2.0;
  double m2 = 8.0;
  double l1 = 0.5;
  double l2 = 0.8;
  double gravity = 9.81;
  double dt_sim = 0.005;
  int decimation = 4;
  int episode_length = 250;  // control steps
  Eigen::Vector2d tau_default{12.0, 12.0};
  Eigen::Vector2d qdot_default{8.0, 8.0};
  double kp = 60.0;
  double kd = 3.0;
  Eigen::Vector2d goal{0.0, 0.10};
  Eigen::Vector2d q_min{-2.8, -2.8};
  Eigen::Vector2d q_max{2.8, 2.8};
  double reset_noise = 0.05;
  double cyl_gap = 0.65;
  double qdot_obs_scale = 0.125;
  std::vector<int> group_map{0, 1};

  double control_dt() const { return dt_sim * decimation; }
  ActuatorLimits default_limits() const {
    return {Eigen::VectorXd(tau_default), Eigen::VectorXd(qdot_default)};
  }
  void validate() const;
};

struct EnvState {
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Vector2d qdot = Eigen::Vector2d::Zero();
  Eigen::Vector4d prev_action = Eigen::Vector4d::Zero();
  Eigen::Vector2d prev_qdot = Eigen::Vector2d::Zero();
  int step_count = 0;
  bool done = false;
  bool diverged = false;
  ActuatorLimits limits;
  std::uint64_t rng_state = 0;  // seeds the next reset
};

// Policy input layout; 14 entries in the order declared.
struct Observation {
  static constexpr int kProprioDim = 10;
  static constexpr int kLatentDim = 4;
  static constexpr int kDim = kProprioDim + kLatentDim;

  Eigen::Vector2d goal_delta = Eigen::Vector2d::Zero();  // p_goal - p_head
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Vector2d qdot = Eigen::Vector2d::Zero();  // scaled by qdot_obs_scale
  Eigen::Vector4d prev_action = Eigen::Vector4d::Zero();
  Eigen::Vector4d design_latent = Eigen::Vector4d::Zero();

  Eigen::VectorXd proprio() const;
  Eigen::VectorXd to_vector() const;
  static Observation from_vector(const Eigen::VectorXd& v);
};

template <typename Scalar>
Vector2<Scalar> forward_kinematics(const Vector2<Scalar>& q, const EnvConfig& cfg) {
  using std::cos;
  using std::sin;
  const Scalar l1(cfg.l1), l2(cfg.l2);
  return {l1 * sin(q[0]) + l2 * sin(q[0] + q[1]),
          -l1 * cos(q[0]) - l2 * cos(q[0] + q[1])};
}

template <typename Scalar>
Vector2<Scalar> elbow_position(const Vector2<Scalar>& q, const EnvConfig& cfg) {
  using std::cos;
  using std::sin;
  return {Scalar(cfg.l1) * sin(q[0]), -Scalar(cfg.l1) * cos(q[0])};
}

template <typename Scalar>
Matrix2<Scalar> mass_matrix(const Vector2<Scalar>& q, const EnvConfig& cfg) {
  using std::cos;
  const Scalar m1(cfg.m1), m2(cfg.m2), l1(cfg.l1), l2(cfg.l2);
  const Scalar c2 = cos(q[1]);
  Matrix2<Scalar> m;
  m(0, 0) = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + Scalar(2) * m2 * l1 * l2 * c2;
  m(0, 1) = m2 * l2 * l2 + m2 * l1 * l2 * c2;
  m(1, 0) = m(0, 1);
  m(1, 1) = m2 * l2 * l2;
  return m;
}

// Coriolis/centrifugal plus gravity: C(q, qdot) + G(q).
template <typename Scalar>
Vector2<Scalar> bias_forces(const Vector2<Scalar>& q, const Vector2<Scalar>& qdot,
                            const EnvConfig& cfg) {
  using std::sin;
  const Scalar m1(cfg.m1), m2(cfg.m2), l1(cfg.l1), l2(cfg.l2), g(cfg.gravity);
  const Scalar h = m2 * l1 * l2 * sin(q[1]);
  const Scalar s1 = sin(q[0]);
  const Scalar s12 = sin(q[0] + q[1]);
  return {-h * (Scalar(2) * qdot[0] * qdot[1] + qdot[1] * qdot[1]) +
              (m1 + m2) * g * l1 * s1 + m2 * g * l2 * s12,
          h * qdot[0] * qdot[0] + m2 * g * l2 * s12};
}

// Kinetic plus potential energy, potential zero at the bar height.
template <typename Scalar>
Scalar total_energy(const Vector2<Scalar>& q, const Vector2<Scalar>& qdot,
                    const EnvConfig& cfg) {
  using std::cos;
  const Scalar m1(cfg.m1), m2(cfg.m2), l1(cfg.l1), l2(cfg.l2), g(cfg.gravity);
  const Scalar kinetic = Scalar(0.5) * qdot.dot(mass_matrix(q, cfg) * qdot);
  const Scalar potential =
      -(m1 + m2) * g * l1 * cos(q[0]) - m2 * g * l2 * cos(q[0] + q[1]);
  return kinetic + potential;
}

struct DynamicsOptions {
  bool enforce_limits = true;
  bool freeze_elbow = false;  // constrain q2 = qdot2 = 0
};

struct DynamicsResult {
  EnvState state;
  // Integrated values before the velocity and joint-stop clamps.
  Eigen::Vector2d q_unclamped = Eigen::Vector2d::Zero();
  Eigen::Vector2d qdot_unclamped = Eigen::Vector2d::Zero();
};

// Draws the initial pose from the stream `rng_state`; the advanced stream is
// kept in the returned state so consecutive resets differ.
EnvState env_reset(const EnvConfig& config, const DesignVector& design,
                   std::uint64_t rng_state);

DynamicsResult dynamics_step(const EnvState& state, const Eigen::Vector2d& tau,
                             const EnvConfig& config, const DynamicsOptions& options = {});

// PD demand before saturation.
Eigen::Vector2d pd_demand(const EnvState& state, const Eigen::Vector4d& action,
                          const EnvConfig& config);
Eigen::Vector2d pd_torque(const EnvState& state, const Eigen::Vector4d& action,
                          const ActuatorLimits& limits, const EnvConfig& config);

struct StepOutcome {
  EnvState state;
  RewardBreakdown breakdown;
  bool done = false;
  double reward = 0.0;
  Eigen::Vector2d tau = Eigen::Vector2d::Zero();  // applied on the last substep
};

StepOutcome env_step(const EnvState& state, const Eigen::Vector4d& action,
                     const DesignVector& design, const EnvConfig& config,
                     const RewardConfig& reward_cfg);

Eigen::VectorXd chinup_proprio(const EnvState& state, const EnvConfig& config);

class ChinupEnv final : public Environment {
 public:
  ChinupEnv(EnvConfig config, RewardConfig reward, DesignVector design,
            std::uint64_t seed);

  int proprio_dim() const override { return Observation::kProprioDim; }
  int action_dim() const override { return 4; }
  const DesignVector& design() const override { return design_; }
  void reset() override;
  Eigen::VectorXd proprio() const override;
  StepResult step(const Eigen::VectorXd& action) override;

  const EnvState& state() const { return state_; }
  const StepOutcome& last_outcome() const { return last_; }

 private:
  EnvConfig config_;
  RewardConfig reward_;
  DesignVector design_;
  EnvState state_;
  StepOutcome last_;
};

EnvFactory chinup_factory(const EnvConfig& config, const RewardConfig& reward);

}  // namespace codesign

#endif  // CODESIGN_CHINUP_ENV_HPP_
