// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evolutionary co-design loop: CMA-ES proposes gear-ratio populations, a
// shared design-conditioned policy is fine-tuned on each population, and the
// per-design returns become the fitness handed back to CMA-ES.

#ifndef CODESIGN_CODESIGN_HPP_
#define CODESIGN_CODESIGN_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codesign/chinup_env.hpp"
#include "codesign/cma_es.hpp"
#include "codesign/design_space.hpp"
#include "codesign/policy.hpp"
#include "codesign/ppo.hpp"
#include "codesign/reward.hpp"

namespace codesign {

enum class Mode { kEaCorl, kPtFt };

std::string mode_name(Mode mode);        // "EA_CORL" / "PT_FT"
std::string mode_flag(Mode mode);        // "ea-corl" / "pt-ft"
Mode parse_mode(const std::string& text);  // accepts either spelling

struct CodesignConfig {
  Mode mode = Mode::kEaCorl;
  std::string evaluator = "chinup";  // or "synthetic"
  std::uint64_t seed = 0;
  int n_env = 4000;
  int n_pop = 50;
  int n_evol = 50;
  int base_train_iters = 5000;
  int adapt_train_iters = 2500;
  double base_learning_rate = 3e-4;
  double adapt_learning_rate = 1e-5;
  DesignSpace design;
  double cma_initial_mean = 0.2;
  double cma_initial_sigma = 0.3;
  int cma_parent_count = 0;  // 0: min(10, n_pop / 2)
  PpoConfig ppo{.reward_scale = 0.02};  // chin-up returns are O(1e3)
  EnvConfig env;
  RewardConfig reward;

  int parent_count() const;
  CmaEsConfig cma_config() const;
  void validate() const;
};

struct DesignFitness {
  DesignVector design;
  double j_pop = 0.0;        // -mean_return; +inf when evaluation failed
  double mean_return = 0.0;
  int episodes = 0;
};

struct FitnessRecord {
  int iteration = 0;  // 1-based
  std::vector<DesignFitness> designs;
  int population_best_index = 0;
  double population_best = 0.0;
  double global_best = 0.0;
  DesignVector best_design;
  std::uint64_t source_snapshot = 0;   // policy fine-tuned this iteration
  std::uint64_t adapted_snapshot = 0;  // policy it produced
  std::uint64_t best_snapshot = 0;     // running best policy after the iteration
  bool improved = false;
  bool failed = false;
  std::string error;
  double sigma = 0.0;                 // CMA-ES step size the population was drawn with
  Eigen::VectorXd cma_mean;
  std::vector<IterationStats> curve;  // not persisted
};

// Everything needed to continue a run after iteration history.size().
struct CodesignProgress {
  CmaEsState cma;
  PolicyParams base_policy;
  PolicyParams best_policy;
  std::vector<FitnessRecord> history;
};

struct CodesignResult {
  DesignVector best_design;
  double best_fitness = 0.0;
  PolicyParams best_policy;
  PolicyParams base_policy;
  std::vector<FitnessRecord> history;
  double wall_seconds = 0.0;
  bool completed = false;
};

struct PopulationOutcome {
  PolicyParams policy;
  std::vector<double> mean_returns;  // per design, NaN if no episode finished
  std::vector<int> episodes;
  std::vector<IterationStats> curve;
};

// Produces the fitness signal for one population.
class PopulationEvaluator {
 public:
  virtual ~PopulationEvaluator() = default;
  virtual PolicyParams initial_policy() = 0;
  virtual PopulationOutcome evaluate(const PolicyParams& source,
                                     std::span<const DesignVector> designs, int train_iters,
                                     double learning_rate, std::uint64_t phase) = 0;
};

// Fine-tunes with PPO on environments built by `factory`.
class RlEvaluator final : public PopulationEvaluator {
 public:
  RlEvaluator(const CodesignConfig& cfg, EnvFactory factory, PolicyShape shape);
  PolicyParams initial_policy() override;
  PopulationOutcome evaluate(const PolicyParams& source, std::span<const DesignVector> designs,
                             int train_iters, double learning_rate,
                             std::uint64_t phase) override;

 private:
  CodesignConfig cfg_;
  EnvFactory factory_;
  PolicyShape shape_;
};

// Chin-up environments with the config's env and reward settings.
std::unique_ptr<RlEvaluator> make_chinup_evaluator(const CodesignConfig& cfg);

// Evaluator named by cfg.evaluator.
std::unique_ptr<PopulationEvaluator> make_evaluator(const CodesignConfig& cfg);

// Bypasses learning: mean return = -|d - optimum|^2. The policy passes
// through unchanged.
class SyntheticEvaluator final : public PopulationEvaluator {
 public:
  explicit SyntheticEvaluator(double optimum = 1.5) : optimum_(optimum) {}
  PolicyParams initial_policy() override;
  PopulationOutcome evaluate(const PolicyParams& source, std::span<const DesignVector> designs,
                             int train_iters, double learning_rate,
                             std::uint64_t phase) override;

 private:
  double optimum_;
};

// Called after each completed iteration; return false to stop early.
using IterationCallback = std::function<bool(const CodesignProgress&)>;

// Runs iterations history.size()+1 .. n_evol, continuing `resume` if given.
CodesignResult run_codesign(const CodesignConfig& cfg, PopulationEvaluator& evaluator,
                            std::optional<CodesignProgress> resume = std::nullopt,
                            const IterationCallback& on_iteration = {});

CodesignResult run_ea_corl(const CodesignConfig& cfg, PopulationEvaluator& evaluator);
CodesignResult run_pt_ft(const CodesignConfig& cfg, PopulationEvaluator& evaluator);

// Fitness surrogate handed to CMA-ES for designs whose evaluation failed.
inline constexpr double kFailedFitnessSurrogate = 1e30;

struct HeatmapCell {
  int row = 0;
  int col = 0;
  DesignVector design;
  double j_pop = 0.0;
};

// Rollout-only fitness over a resolution x resolution slice through `fixed`;
// every cell gets n_env / n_pop stochastic episodes.
std::vector<HeatmapCell> heatmap_sweep(const CodesignConfig& cfg, const PolicyParams& policy,
                                       int axis_a, int axis_b, int resolution,
                                       const DesignVector& fixed);

// Unordered axis pairs (a < b) of a design dimension.
std::vector<std::pair<int, int>> axis_pairs(int dim);

}  // namespace codesign

#endif  // CODESIGN_CODESIGN_HPP_
