// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/hold_env.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "codesign/error.hpp"
#include "codesign/rng.hpp"

namespace codesign {

HoldPositionEnv::HoldPositionEnv(HoldEnvConfig config, DesignVector design, std::uint64_t seed)
    : config_(config), design_(std::move(design)), rng_state_(seed) {
  if (design_.dim() != 1) throw DimensionError("HoldPositionEnv: design must have one factor");
  if (!(design_[0] > 0.0)) throw ContractError("HoldPositionEnv: design factor must be positive");
  reset();
}

void HoldPositionEnv::reset() {
  Rng rng(rng_state_);
  rng_state_ = detail::splitmix64(rng_state_);
  q_ = std::uniform_real_distribution<double>(-config_.start_range, config_.start_range)(rng);
  prev_action_ = 0.0;
  steps_ = 0;
}

Eigen::VectorXd HoldPositionEnv::proprio() const { return Eigen::Vector2d(q_, prev_action_); }

StepResult HoldPositionEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 1) throw DimensionError("HoldPositionEnv::step: action must have 1 entry");
  if (steps_ >= config_.episode_length)
    throw ContractError("HoldPositionEnv::step: episode already finished; reset first");
  const double v_max = config_.v_default / design_[0];
  const double v = std::clamp(action[0], -v_max, v_max);
  q_ += config_.dt * v;
  prev_action_ = action[0];
  ++steps_;
  const double z = q_ / config_.width;
  return {std::exp(-z * z), steps_ >= config_.episode_length, false};
}

EnvFactory hold_factory(const HoldEnvConfig& config) {
  return [config](const DesignVector& design, std::uint64_t seed) {
    return std::make_unique<HoldPositionEnv>(config, design, seed);
  };
}

}  // namespace codesign
