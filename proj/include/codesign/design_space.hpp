// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gear-ratio design space: design vectors, the actuator limit scaling laws,
// block expansion of a population onto parallel environments, and 2-D grid
// slices for fitness heatmaps.

#ifndef CODESIGN_DESIGN_SPACE_HPP_
#define CODESIGN_DESIGN_SPACE_HPP_

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "codesign/error.hpp"

namespace codesign {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// One gear-ratio factor per joint group (shoulder, elbow, ... ).
template <typename Scalar>
struct DesignVectorT {
  VectorX<Scalar> factors;

  Eigen::Index dim() const { return factors.size(); }
  Scalar operator[](Eigen::Index i) const { return factors[i]; }
  bool operator==(const DesignVectorT& other) const {
    return factors.size() == other.factors.size() && factors == other.factors;
  }
};

template <typename Scalar>
struct DesignSpaceT {
  int dim = 2;
  Scalar lower_bound = Scalar(0.5);
  Scalar upper_bound = Scalar(4.0);

  void validate() const {
    if (dim <= 0) throw ConfigError("design.dim", "design.dim must be positive");
    if (!(lower_bound > Scalar(0)))
      throw ConfigError("design.lower_bound", "design.lower_bound must be > 0");
    if (!(lower_bound < upper_bound))
      throw ConfigError("design.upper_bound",
                        "design.upper_bound must exceed design.lower_bound");
  }
};

template <typename Scalar>
struct ActuatorLimitsT {
  VectorX<Scalar> tau_max;   // N·m
  VectorX<Scalar> qdot_max;  // rad/s
};

using DesignVector = DesignVectorT<double>;
using DesignSpace = DesignSpaceT<double>;
using ActuatorLimits = ActuatorLimitsT<double>;

// Torque limits grow and velocity limits shrink with the gear-ratio factor
// of the joint's group: tau_max = tau_default * d, qdot_max = qdot_default / d.
// group_map[i] is the design coordinate driving joint i.
template <typename Scalar>
ActuatorLimitsT<Scalar> scale_limits(const DesignVectorT<Scalar>& d,
                                     const ActuatorLimitsT<Scalar>& defaults,
                                     std::span<const int> group_map) {
  const Eigen::Index joints = defaults.tau_max.size();
  if (defaults.qdot_max.size() != joints)
    throw DimensionError("scale_limits: tau and qdot defaults differ in size");
  if (static_cast<Eigen::Index>(group_map.size()) != joints)
    throw DimensionError("scale_limits: group_map must cover every joint");
  ActuatorLimitsT<Scalar> out{VectorX<Scalar>(joints), VectorX<Scalar>(joints)};
  for (Eigen::Index i = 0; i < joints; ++i) {
    const int g = group_map[static_cast<std::size_t>(i)];
    if (g < 0 || g >= d.dim())
      throw DimensionError("scale_limits: joint " + std::to_string(i) +
                           " maps to group " + std::to_string(g) +
                           " outside design of dim " + std::to_string(d.dim()));
    out.tau_max[i] = defaults.tau_max[i] * d[g];
    out.qdot_max[i] = defaults.qdot_max[i] / d[g];
  }
  return out;
}

template <typename Scalar>
DesignVectorT<Scalar> clamp_to_bounds(const DesignVectorT<Scalar>& d,
                                      const DesignSpaceT<Scalar>& space) {
  if (d.dim() != space.dim)
    throw DimensionError("clamp_to_bounds: design has dim " +
                         std::to_string(d.dim()) + ", space has " +
                         std::to_string(space.dim));
  return {d.factors.cwiseMax(space.lower_bound).cwiseMin(space.upper_bound)};
}

// Environment k (0-based) runs design assignment[k]; equivalently, with
// 1-based indices, environment k runs design ceil(k / n_exp).
struct ExpansionPlan {
  int n_pop = 0;
  int n_env = 0;
  int n_exp = 0;
  std::vector<int> assignment;

  int design_of(int env) const { return assignment.at(static_cast<std::size_t>(env)); }
};

ExpansionPlan expand_designs(int n_pop, int n_env);

template <typename Scalar>
ExpansionPlan expand_designs(std::span<const DesignVectorT<Scalar>> population,
                             int n_env) {
  if (population.empty())
    throw ContractError("expand_designs: population is empty");
  return expand_designs(static_cast<int>(population.size()), n_env);
}

inline ExpansionPlan expand_designs(int n_pop, int n_env) {
  if (n_pop <= 0 || n_env <= 0)
    throw ConfigError("n_pop", "expand_designs: n_pop and n_env must be positive");
  if (n_env % n_pop != 0)
    throw ConfigError("n_env", "n_env (" + std::to_string(n_env) +
                                   ") is not divisible by n_pop (" +
                                   std::to_string(n_pop) + ")");
  ExpansionPlan plan;
  plan.n_pop = n_pop;
  plan.n_env = n_env;
  plan.n_exp = n_env / n_pop;
  plan.assignment.resize(static_cast<std::size_t>(n_env));
  for (int k = 0; k < n_env; ++k)
    plan.assignment[static_cast<std::size_t>(k)] = k / plan.n_exp;
  return plan;
}

// resolution^2 designs over [lower, upper]^2 on (axis_a, axis_b), row-major
// with axis_a as the row index; other coordinates copied from `fixed`.
template <typename Scalar>
std::vector<DesignVectorT<Scalar>> grid_slice(const DesignSpaceT<Scalar>& space,
                                              int axis_a, int axis_b,
                                              int resolution,
                                              const DesignVectorT<Scalar>& fixed) {
  if (axis_a < 0 || axis_a >= space.dim || axis_b < 0 || axis_b >= space.dim)
    throw DimensionError("grid_slice: axis out of range for dim " +
                         std::to_string(space.dim));
  if (axis_a == axis_b) throw ContractError("grid_slice: axes must differ");
  if (resolution < 2) throw ContractError("grid_slice: resolution must be >= 2");
  if (fixed.dim() != space.dim)
    throw DimensionError("grid_slice: fixed design has wrong dimension");
  const VectorX<Scalar> ticks =
      VectorX<Scalar>::LinSpaced(resolution, space.lower_bound, space.upper_bound);
  std::vector<DesignVectorT<Scalar>> out;
  out.reserve(static_cast<std::size_t>(resolution * resolution));
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      DesignVectorT<Scalar> d = fixed;
      d.factors[axis_a] = ticks[r];
      d.factors[axis_b] = ticks[c];
      out.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace codesign

#endif  // CODESIGN_DESIGN_SPACE_HPP_
