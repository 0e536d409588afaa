// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CODESIGN_PPO_CONFIG_HPP_
#define CODESIGN_PPO_CONFIG_HPP_

namespace codesign {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int minibatches = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.005;
  int horizon = 64;       // control steps per env per update
  int eval_window = 10;   // trailing iterations scored per design
  double reward_scale = 1.0;  // applied to learning targets only

  void validate() const;
};

}  // namespace codesign

#endif  // CODESIGN_PPO_CONFIG_HPP_
