// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// (mu/mu_w, lambda) CMA-ES with an ask/tell interface. Standard formulation:
// log-rank recombination weights, cumulative step-size adaptation and a
// rank-one plus rank-mu covariance update. Minimizes fitness.

#ifndef CODESIGN_CMA_ES_HPP_
#define CODESIGN_CMA_ES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/error.hpp"
#include "codesign/rng.hpp"

namespace codesign {

template <typename Scalar>
struct CmaEsConfigT {
  int dim = 2;
  Scalar initial_mean = Scalar(0.2);
  Scalar initial_sigma = Scalar(0.3);
  int population_size = 50;  // lambda
  int parent_count = 10;     // mu
  int max_iterations = 50;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct StrategyConstantsT {
  Scalar mu_eff{};
  Scalar c_sigma{};
  Scalar d_sigma{};
  Scalar c_c{};
  Scalar c_1{};
  Scalar c_mu{};
  Scalar chi_n{};  // E||N(0, I)||
};

template <typename Scalar>
struct CmaEsStateT {
  VectorX<Scalar> mean;
  Scalar sigma{};
  MatrixX<Scalar> cov;
  VectorX<Scalar> path_sigma;
  VectorX<Scalar> path_c;
  VectorX<Scalar> weights;  // length mu, decreasing, sums to one
  int lambda = 0;
  int generation = 0;
  StrategyConstantsT<Scalar> constants;

  int dim() const { return static_cast<int>(mean.size()); }
  int mu() const { return static_cast<int>(weights.size()); }
};

template <typename Scalar>
struct EvaluatedCandidateT {
  DesignVectorT<Scalar> design;  // clamped into the design space
  VectorX<Scalar> raw_sample;    // drives the distribution update
  Scalar fitness = std::numeric_limits<Scalar>::quiet_NaN();
};

using CmaEsConfig = CmaEsConfigT<double>;
using CmaEsState = CmaEsStateT<double>;
using EvaluatedCandidate = EvaluatedCandidateT<double>;

template <typename Scalar>
void update_constants(CmaEsStateT<Scalar>& state);

// Replaces the recombination weights (and everything derived from mu_eff).
template <typename Scalar>
void set_weights(CmaEsStateT<Scalar>& state, const VectorX<Scalar>& weights) {
  if (weights.size() < 1 || weights.size() > state.lambda)
    throw ConfigError("cma.parent_count", "weights must have 1..lambda entries");
  if ((weights.array() <= Scalar(0)).any())
    throw ConfigError("cma.parent_count", "weights must be positive");
  state.weights = weights / weights.sum();
  update_constants(state);
}

// Recomputes the strategy constants from already normalized weights.
template <typename Scalar>
void update_constants(CmaEsStateT<Scalar>& state) {
  const Scalar n = Scalar(state.dim());
  auto& k = state.constants;
  k.mu_eff = Scalar(1) / state.weights.squaredNorm();
  k.c_sigma = (k.mu_eff + Scalar(2)) / (n + k.mu_eff + Scalar(5));
  k.d_sigma = Scalar(1) +
              Scalar(2) * std::max(Scalar(0), std::sqrt((k.mu_eff - Scalar(1)) /
                                                        (n + Scalar(1))) -
                                                  Scalar(1)) +
              k.c_sigma;
  k.c_c = (Scalar(4) + k.mu_eff / n) / (n + Scalar(4) + Scalar(2) * k.mu_eff / n);
  k.c_1 = Scalar(2) / ((n + Scalar(1.3)) * (n + Scalar(1.3)) + k.mu_eff);
  k.c_mu = std::min(Scalar(1) - k.c_1,
                    Scalar(2) * (k.mu_eff - Scalar(2) + Scalar(1) / k.mu_eff) /
                        ((n + Scalar(2)) * (n + Scalar(2)) + k.mu_eff));
  k.chi_n = std::sqrt(n) * (Scalar(1) - Scalar(1) / (Scalar(4) * n) +
                            Scalar(1) / (Scalar(21) * n * n));
}

template <typename Scalar>
CmaEsStateT<Scalar> cma_init(const CmaEsConfigT<Scalar>& config) {
  if (config.dim <= 0) throw ConfigError("design.dim", "cma: dim must be positive");
  if (config.population_size < 1)
    throw ConfigError("n_pop", "cma: population size must be positive");
  if (config.parent_count < 1 || config.parent_count > config.population_size)
    throw ConfigError("cma.parent_count",
                      "cma: parent_count must lie in [1, population size]");
  if (!(config.initial_sigma > Scalar(0)))
    throw ConfigError("cma.initial_sigma", "cma: initial_sigma must be positive");

  const int n = config.dim;
  CmaEsStateT<Scalar> state;
  state.mean = VectorX<Scalar>::Constant(n, config.initial_mean);
  state.sigma = config.initial_sigma;
  state.cov = MatrixX<Scalar>::Identity(n, n);
  state.path_sigma = VectorX<Scalar>::Zero(n);
  state.path_c = VectorX<Scalar>::Zero(n);
  state.lambda = config.population_size;

  const int mu = config.parent_count;
  VectorX<Scalar> w(mu);
  for (int i = 0; i < mu; ++i)
    w[i] = std::log(Scalar(mu) + Scalar(0.5)) - std::log(Scalar(i + 1));
  set_weights(state, w);
  return state;
}

namespace detail {

// Eigenbasis B and axis lengths D (sqrt of eigenvalues) of the covariance.
template <typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> covariance_factors(
    const CmaEsStateT<Scalar>& state) {
  const MatrixX<Scalar> sym = Scalar(0.5) * (state.cov + state.cov.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success)
    throw OptimizerDegenerateError(state.generation,
                                   "covariance eigendecomposition failed");
  const VectorX<Scalar>& ev = solver.eigenvalues();
  if (!ev.allFinite() || (ev.array() <= Scalar(0)).any())
    throw OptimizerDegenerateError(state.generation,
                                   "covariance is not positive definite");
  return {solver.eigenvectors(), ev.cwiseSqrt()};
}

}  // namespace detail

// lambda candidates x_k = mean + sigma * C^{1/2} z_k, clamped into `space`.
template <typename Scalar>
std::vector<EvaluatedCandidateT<Scalar>> cma_ask(const CmaEsStateT<Scalar>& state,
                                                 const DesignSpaceT<Scalar>& space,
                                                 Rng& rng) {
  if (space.dim != state.dim())
    throw DimensionError("cma_ask: design space and optimizer dims differ");
  const auto [basis, axes] = detail::covariance_factors(state);
  const MatrixX<Scalar> sqrt_cov = basis * axes.asDiagonal() * basis.transpose();

  std::vector<EvaluatedCandidateT<Scalar>> out;
  out.reserve(static_cast<std::size_t>(state.lambda));
  VectorX<Scalar> z(state.dim());
  for (int k = 0; k < state.lambda; ++k) {
    for (int i = 0; i < state.dim(); ++i) z[i] = Scalar(standard_normal(rng));
    EvaluatedCandidateT<Scalar> c;
    c.raw_sample = state.mean + state.sigma * (sqrt_cov * z);
    c.design = clamp_to_bounds(DesignVectorT<Scalar>{c.raw_sample}, space);
    out.push_back(std::move(c));
  }
  return out;
}

template <typename Scalar>
CmaEsStateT<Scalar> cma_tell(const CmaEsStateT<Scalar>& state,
                             std::span<const EvaluatedCandidateT<Scalar>> evaluated) {
  if (static_cast<int>(evaluated.size()) != state.lambda)
    throw ContractError("cma_tell: expected " + std::to_string(state.lambda) +
                        " candidates, got " + std::to_string(evaluated.size()));
  for (const auto& c : evaluated) {
    if (!std::isfinite(static_cast<double>(c.fitness)))
      throw ContractError("cma_tell: candidate fitness is not finite");
    if (c.raw_sample.size() != state.dim())
      throw DimensionError("cma_tell: raw sample has wrong dimension");
  }

  std::vector<std::size_t> order(evaluated.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return evaluated[a].fitness < evaluated[b].fitness;
  });

  const auto [basis, axes] = detail::covariance_factors(state);
  const auto& k = state.constants;
  const int n = state.dim();
  const int mu = state.mu();

  CmaEsStateT<Scalar> next = state;
  next.generation = state.generation + 1;

  MatrixX<Scalar> steps(n, mu);  // y_i = (x_i:lambda - m) / sigma
  for (int i = 0; i < mu; ++i)
    steps.col(i) = (evaluated[order[static_cast<std::size_t>(i)]].raw_sample - state.mean) /
                   state.sigma;
  const VectorX<Scalar> mean_step = steps * state.weights;
  next.mean = state.mean + state.sigma * mean_step;

  const VectorX<Scalar> whitened =
      basis * (basis.transpose() * mean_step).cwiseQuotient(axes);
  next.path_sigma = (Scalar(1) - k.c_sigma) * state.path_sigma +
                    std::sqrt(k.c_sigma * (Scalar(2) - k.c_sigma) * k.mu_eff) * whitened;

  const Scalar ps_norm = next.path_sigma.norm();
  const Scalar correction = std::sqrt(
      Scalar(1) - std::pow(Scalar(1) - k.c_sigma, Scalar(2 * next.generation)));
  const bool h_sigma =
      ps_norm / correction < (Scalar(1.4) + Scalar(2) / Scalar(n + 1)) * k.chi_n;

  next.path_c = (Scalar(1) - k.c_c) * state.path_c;
  if (h_sigma)
    next.path_c += std::sqrt(k.c_c * (Scalar(2) - k.c_c) * k.mu_eff) * mean_step;

  const Scalar delta_h = h_sigma ? Scalar(0) : k.c_c * (Scalar(2) - k.c_c);
  const MatrixX<Scalar> rank_mu = steps * state.weights.asDiagonal() * steps.transpose();
  next.cov = (Scalar(1) + k.c_1 * delta_h - k.c_1 - k.c_mu * state.weights.sum()) * state.cov +
             k.c_1 * next.path_c * next.path_c.transpose() + k.c_mu * rank_mu;
  next.cov = (Scalar(0.5) * (next.cov + next.cov.transpose())).eval();

  next.sigma = state.sigma * std::exp((k.c_sigma / k.d_sigma) * (ps_norm / k.chi_n - Scalar(1)));
  if (!next.mean.allFinite() || !std::isfinite(static_cast<double>(next.sigma)) ||
      !(next.sigma > Scalar(0)))
    throw OptimizerDegenerateError(next.generation, "non-finite distribution update");
  // Surface loss of positive definiteness at the generation that caused it.
  detail::covariance_factors(next);
  return next;
}

// Minimum-fitness candidate ever told; ties go to the earliest occurrence.
template <typename Scalar>
std::pair<DesignVectorT<Scalar>, Scalar> cma_best(
    std::span<const EvaluatedCandidateT<Scalar>> history) {
  if (history.empty()) throw ContractError("cma_best: history is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i)
    if (history[i].fitness < history[best].fitness) best = i;
  return {history[best].design, history[best].fitness};
}

}  // namespace codesign

#endif  // CODESIGN_CMA_ES_HPP_
