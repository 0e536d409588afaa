// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/chinup_env.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "codesign/error.hpp"

namespace codesign {

void EnvConfig::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(key, std::string(key) + " must be a positive finite number");
  };
  positive(m1, "env.m1");
  positive(m2, "env.m2");
  positive(l1, "env.l1");
  positive(l2, "env.l2");
  positive(gravity, "env.gravity");
  positive(dt_sim, "env.dt_sim");
  positive(kp, "env.kp");
  positive(kd, "env.kd");
  if (decimation < 1) throw ConfigError("env.decimation", "env.decimation must be >= 1");
  if (episode_length < 1)
    throw ConfigError("env.episode_length", "env.episode_length must be >= 1");
  if (!((tau_default.array() > 0.0).all()))
    throw ConfigError("env.tau_default", "env.tau_default entries must be positive");
  if (!((qdot_default.array() > 0.0).all()))
    throw ConfigError("env.qdot_default", "env.qdot_default entries must be positive");
  if (!((q_min.array() < q_max.array()).all()))
    throw ConfigError("env.q_max", "env.q_min must be below env.q_max");
  if (reset_noise < 0.0)
    throw ConfigError("env.reset_noise", "env.reset_noise must be non-negative");
  if (group_map.size() != 2)
    throw ConfigError("env.group_map", "env.group_map needs one entry per joint (2)");
}

Eigen::VectorXd Observation::proprio() const {
  Eigen::VectorXd v(kProprioDim);
  v << goal_delta, q, qdot, prev_action;
  return v;
}

Eigen::VectorXd Observation::to_vector() const {
  Eigen::VectorXd v(kDim);
  v << goal_delta, q, qdot, prev_action, design_latent;
  return v;
}

Observation Observation::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kDim && v.size() != kProprioDim)
    throw DimensionError("Observation: expected 10 or 14 entries, got " +
                         std::to_string(v.size()));
  Observation o;
  o.goal_delta = v.segment<2>(0);
  o.q = v.segment<2>(2);
  o.qdot = v.segment<2>(4);
  o.prev_action = v.segment<4>(6);
  if (v.size() == kDim) o.design_latent = v.segment<4>(10);
  return o;
}

EnvState env_reset(const EnvConfig& config, const DesignVector& design,
                   std::uint64_t rng_state) {
  Rng rng(rng_state);
  std::uniform_real_distribution<double> noise(-config.reset_noise, config.reset_noise);
  EnvState s;
  if (config.reset_noise > 0.0) {
    s.q[0] = noise(rng);
    s.q[1] = noise(rng);
  }
  s.limits = scale_limits(design, config.default_limits(), config.group_map);
  s.rng_state = detail::splitmix64(rng_state);
  return s;
}

DynamicsResult dynamics_step(const EnvState& state, const Eigen::Vector2d& tau,
                             const EnvConfig& config, const DynamicsOptions& options) {
  DynamicsResult out{state, {}, {}};
  EnvState& s = out.state;
  const double dt = config.dt_sim;

  Eigen::Vector2d qdd;
  if (options.freeze_elbow) {
    const Eigen::Vector2d q{state.q[0], 0.0};
    const Eigen::Vector2d qd{state.qdot[0], 0.0};
    qdd[0] = (tau[0] - bias_forces(q, qd, config)[0]) / mass_matrix(q, config)(0, 0);
    qdd[1] = 0.0;
    s.q[1] = 0.0;
    s.qdot[1] = 0.0;
  } else {
    qdd = mass_matrix(state.q, config)
              .ldlt()
              .solve(tau - bias_forces(state.q, state.qdot, config));
  }

  s.qdot += dt * qdd;
  out.qdot_unclamped = s.qdot;
  if (options.enforce_limits)
    s.qdot = s.qdot.cwiseMax(-s.limits.qdot_max).cwiseMin(s.limits.qdot_max);
  s.q += dt * s.qdot;
  out.q_unclamped = s.q;
  if (options.enforce_limits) {
    for (int i = 0; i < 2; ++i) {
      if (s.q[i] < config.q_min[i] || s.q[i] > config.q_max[i]) {
        s.q[i] = std::clamp(s.q[i], config.q_min[i], config.q_max[i]);
        s.qdot[i] = 0.0;
      }
    }
  }
  if (!s.q.allFinite() || !s.qdot.allFinite())
    throw EnvironmentDivergedError("chin-up dynamics produced a non-finite state at step " +
                                   std::to_string(state.step_count));
  return out;
}

Eigen::Vector2d pd_demand(const EnvState& state, const Eigen::Vector4d& action,
                          const EnvConfig& config) {
  return config.kp * (action.head<2>() - state.q) +
         config.kd * (action.tail<2>() - state.qdot);
}

Eigen::Vector2d pd_torque(const EnvState& state, const Eigen::Vector4d& action,
                          const ActuatorLimits& limits, const EnvConfig& config) {
  const Eigen::Vector2d tau_max = limits.tau_max.head<2>();
  return pd_demand(state, action, config).cwiseMax(-tau_max).cwiseMin(tau_max);
}

StepOutcome env_step(const EnvState& state, const Eigen::Vector4d& action,
                     const DesignVector& design, const EnvConfig& config,
                     const RewardConfig& reward_cfg) {
  if (state.done || state.step_count >= config.episode_length)
    throw ContractError("env_step: episode already finished; reset first");
  if (!action.allFinite()) throw ContractError("env_step: action is not finite");
  (void)design;  // limits were bound at reset

  StepOutcome out;
  EnvState s = state;
  Eigen::Vector2d demand = Eigen::Vector2d::Zero();
  Eigen::Vector2d q_probe = s.q;
  Eigen::Vector2d qdot_probe = s.qdot;
  bool diverged = false;
  for (int k = 0; k < config.decimation; ++k) {
    demand = pd_demand(s, action, config);
    out.tau = pd_torque(s, action, s.limits, config);
    try {
      DynamicsResult r = dynamics_step(s, out.tau, config);
      s = std::move(r.state);
      q_probe = r.q_unclamped;
      qdot_probe = r.qdot_unclamped;
    } catch (const EnvironmentDivergedError&) {
      diverged = true;
      break;
    }
  }

  s.prev_qdot = state.qdot;
  s.prev_action = action;
  s.step_count = state.step_count + 1;
  s.diverged = diverged;
  s.done = diverged || s.step_count >= config.episode_length;

  if (!diverged) {
    RewardInputs in;
    in.pos_head = forward_kinematics(s.q, config);
    in.pos_goal = config.goal;
    in.cyl_gap = config.cyl_gap;
    const Eigen::Vector2d base = elbow_position(s.q, config);
    in.base_ok = base.x() < 0.0 || base.y() < 0.0;
    in.tau = out.tau;
    in.tau_requested = demand;
    in.qdot = qdot_probe;
    in.prev_qdot = state.qdot;
    in.dt = config.control_dt();
    in.action = action;
    in.prev_action = state.prev_action;
    in.q = q_probe;
    in.q_min = config.q_min;
    in.q_max = config.q_max;
    in.qdot_max = s.limits.qdot_max;
    in.tau_max = s.limits.tau_max;
    out.breakdown = reward_terms(in, reward_cfg);
    out.reward = out.breakdown.total;
  }
  out.done = s.done;
  out.state = std::move(s);
  return out;
}

Eigen::VectorXd chinup_proprio(const EnvState& state, const EnvConfig& config) {
  Observation o;
  o.goal_delta = config.goal - forward_kinematics(state.q, config);
  o.q = state.q;
  o.qdot = config.qdot_obs_scale * state.qdot;
  o.prev_action = state.prev_action;
  return o.proprio();
}

ChinupEnv::ChinupEnv(EnvConfig config, RewardConfig reward, DesignVector design,
                     std::uint64_t seed)
    : config_(std::move(config)), reward_(reward), design_(std::move(design)) {
  state_ = env_reset(config_, design_, seed);
}

void ChinupEnv::reset() { state_ = env_reset(config_, design_, state_.rng_state); }

Eigen::VectorXd ChinupEnv::proprio() const { return chinup_proprio(state_, config_); }

StepResult ChinupEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 4) throw DimensionError("ChinupEnv::step: action must have 4 entries");
  last_ = env_step(state_, Eigen::Vector4d(action), design_, config_, reward_);
  state_ = last_.state;
  return {last_.reward, last_.done, last_.state.diverged};
}

EnvFactory chinup_factory(const EnvConfig& config, const RewardConfig& reward) {
  return [config, reward](const DesignVector& design, std::uint64_t seed) {
    return std::make_unique<ChinupEnv>(config, reward, design, seed);
  };
}

}  // namespace codesign
