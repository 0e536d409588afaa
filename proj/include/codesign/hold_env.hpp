// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// One-joint "hold position" task used to check that the learner learns. The
// joint starts at a random angle and is driven by a velocity command whose
// limit shrinks with the single design factor. Reward exp(-(q/width)^2) per
// step peaks at q = 0.

#ifndef CODESIGN_HOLD_ENV_HPP_
#define CODESIGN_HOLD_ENV_HPP_

#include <cstdint>

#include "codesign/environment.hpp"

namespace codesign {

struct HoldEnvConfig {
  double dt = 0.1;
  int episode_length = 50;
  double start_range = 2.0;   // q0 ~ U[-range, range]
  double v_default = 2.0;     // velocity limit at factor 1
  double width = 0.15;
};

class HoldPositionEnv final : public Environment {
 public:
  HoldPositionEnv(HoldEnvConfig config, DesignVector design, std::uint64_t seed);

  int proprio_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  const DesignVector& design() const override { return design_; }
  void reset() override;
  Eigen::VectorXd proprio() const override;
  StepResult step(const Eigen::VectorXd& action) override;

  double position() const { return q_; }

 private:
  HoldEnvConfig config_;
  DesignVector design_;
  std::uint64_t rng_state_;
  double q_ = 0.0;
  double prev_action_ = 0.0;
  int steps_ = 0;
};

EnvFactory hold_factory(const HoldEnvConfig& config = {});

}  // namespace codesign

#endif  // CODESIGN_HOLD_ENV_HPP_
