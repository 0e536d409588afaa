// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-term chin-up reward. Every term is reported as a raw magnitude and
// composed with its signed weight: R = sum_i w_i * r_i over active terms.

#ifndef CODESIGN_REWARD_HPP_
#define CODESIGN_REWARD_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "codesign/design_space.hpp"

namespace codesign {

enum class Term : int {
  kChinup = 0,
  kHollowCylinder,
  kBasePosition,
  kJointRegularization,
  kOrientation,
  kTorque,
  kJointAcceleration,
  kActionRate,
  kJointPositionLimit,
  kJointVelocityLimit,
  kJointTorqueLimit,
};

inline constexpr std::size_t kTermCount = 11;

inline constexpr std::array<std::string_view, kTermCount> kTermNames = {
    "chinup",          "hollow_cylinder",      "base_position",
    "joint_regularization", "orientation",     "torque",
    "joint_acceleration",   "action_rate",     "joint_position_limit",
    "joint_velocity_limit", "joint_torque_limit"};

inline constexpr std::size_t index(Term t) { return static_cast<std::size_t>(t); }

template <typename Scalar>
struct RewardConfigT {
  std::array<Scalar, kTermCount> weights = {30.0, -2.0, -2.0, -5.0, -5.0, -1e-5,
                                            -1e-5, -1e-3, -2.0, -2.0, -2.0};
  // No floating base in the planar model, so orientation is off by default.
  std::array<bool, kTermCount> active = {true, true, true, true, false, true,
                                         true, true, true, true, true};
  Scalar cyl_window_low = Scalar(0.5);
  Scalar cyl_window_high = Scalar(0.8);
  Scalar cyl_out_value = Scalar(10);
  Scalar base_out_value = Scalar(20);

  Scalar weight(Term t) const { return weights[index(t)]; }
  bool is_active(Term t) const { return active[index(t)]; }
};

template <typename Scalar>
struct RewardInputsT {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  Vec2 pos_head = Vec2::Zero();
  Vec2 pos_goal = Vec2::Zero();
  Scalar cyl_gap = Scalar(0.65);  // y_cyl_L - y_cyl_R surrogate
  bool base_ok = true;
  std::vector<std::pair<int, int>> sym_pairs;
  Vec2 g_proj_xy = Vec2::Zero();
  VectorX<Scalar> tau;
  // Torque probed by the torque-limit term; falls back to `tau` when empty.
  VectorX<Scalar> tau_requested;
  VectorX<Scalar> qdot;
  VectorX<Scalar> prev_qdot;
  Scalar dt = Scalar(0.02);
  VectorX<Scalar> action;
  VectorX<Scalar> prev_action;
  VectorX<Scalar> q;
  VectorX<Scalar> q_min;
  VectorX<Scalar> q_max;
  VectorX<Scalar> qdot_max;
  VectorX<Scalar> tau_max;
};

template <typename Scalar>
struct RewardBreakdownT {
  std::array<Scalar, kTermCount> terms{};
  Scalar total = Scalar(0);

  Scalar& operator[](Term t) { return terms[index(t)]; }
  Scalar operator[](Term t) const { return terms[index(t)]; }
};

using RewardConfig = RewardConfigT<double>;
using RewardInputs = RewardInputsT<double>;
using RewardBreakdown = RewardBreakdownT<double>;

template <typename Scalar>
Scalar total_reward(const RewardBreakdownT<Scalar>& breakdown,
                    const RewardConfigT<Scalar>& cfg) {
  Scalar total = Scalar(0);
  for (std::size_t i = 0; i < kTermCount; ++i)
    if (cfg.active[i]) total += cfg.weights[i] * breakdown.terms[i];
  return total;
}

template <typename Scalar>
RewardBreakdownT<Scalar> reward_terms(const RewardInputsT<Scalar>& in,
                                      const RewardConfigT<Scalar>& cfg) {
  using std::abs;
  using std::exp;
  RewardBreakdownT<Scalar> out;
  auto clip01 = [](Scalar x) { return std::clamp(x, Scalar(0), Scalar(1)); };

  if (cfg.is_active(Term::kChinup))
    out[Term::kChinup] = exp(-(in.pos_head - in.pos_goal).squaredNorm());

  if (cfg.is_active(Term::kHollowCylinder)) {
    const bool inside = cfg.cyl_window_low < in.cyl_gap && in.cyl_gap < cfg.cyl_window_high;
    out[Term::kHollowCylinder] = inside ? Scalar(0) : cfg.cyl_out_value;
  }

  if (cfg.is_active(Term::kBasePosition))
    out[Term::kBasePosition] = in.base_ok ? Scalar(0) : cfg.base_out_value;

  if (cfg.is_active(Term::kJointRegularization)) {
    Scalar sum = Scalar(0);
    for (const auto& [i, j] : in.sym_pairs) {
      const Scalar diff = in.q[i] - in.q[j];
      sum += exp(-diff * diff);
    }
    out[Term::kJointRegularization] = sum;
  }

  if (cfg.is_active(Term::kOrientation))
    out[Term::kOrientation] = in.g_proj_xy.squaredNorm();

  if (cfg.is_active(Term::kTorque)) out[Term::kTorque] = in.tau.squaredNorm();

  if (cfg.is_active(Term::kJointAcceleration))
    out[Term::kJointAcceleration] = ((in.qdot - in.prev_qdot) / in.dt).squaredNorm();

  if (cfg.is_active(Term::kActionRate))
    out[Term::kActionRate] = (in.action - in.prev_action).squaredNorm();

  if (cfg.is_active(Term::kJointPositionLimit)) {
    Scalar sum = Scalar(0);
    for (Eigen::Index i = 0; i < in.q.size(); ++i)
      sum += std::max(Scalar(0), in.q_min[i] - in.q[i]) +
             std::max(Scalar(0), in.q[i] - in.q_max[i]);
    out[Term::kJointPositionLimit] = sum;
  }

  if (cfg.is_active(Term::kJointVelocityLimit)) {
    Scalar sum = Scalar(0);
    for (Eigen::Index i = 0; i < in.qdot.size(); ++i)
      sum += clip01(abs(in.qdot[i]) - in.qdot_max[i]);
    out[Term::kJointVelocityLimit] = sum;
  }

  if (cfg.is_active(Term::kJointTorqueLimit)) {
    const VectorX<Scalar>& probe = in.tau_requested.size() > 0 ? in.tau_requested : in.tau;
    Scalar sum = Scalar(0);
    for (Eigen::Index i = 0; i < probe.size(); ++i)
      sum += clip01(abs(probe[i]) - in.tau_max[i]);
    out[Term::kJointTorqueLimit] = sum;
  }

  out.total = total_reward(out, cfg);
  return out;
}

}  // namespace codesign

#endif  // CODESIGN_REWARD_HPP_
