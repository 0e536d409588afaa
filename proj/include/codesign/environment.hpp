// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CODESIGN_ENVIRONMENT_HPP_
#define CODESIGN_ENVIRONMENT_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>

#include "codesign/design_space.hpp"

namespace codesign {

struct StepResult {
  double reward = 0.0;
  bool done = false;
  bool failed = false;  // diverged; the episode ends early
};

// An episodic control task bound to one design. Instances own their random
// stream and are stepped by one thread at a time.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int proprio_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual const DesignVector& design() const = 0;

  virtual void reset() = 0;
  // Observation without the design latent.
  virtual Eigen::VectorXd proprio() const = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
};

using EnvFactory =
    std::function<std::unique_ptr<Environment>(const DesignVector&, std::uint64_t seed)>;

}  // namespace codesign

#endif  // CODESIGN_ENVIRONMENT_HPP_
