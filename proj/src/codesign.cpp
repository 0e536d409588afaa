// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/codesign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "codesign/error.hpp"

namespace codesign {

std::string mode_name(Mode mode) { return mode == Mode::kEaCorl ? "EA_CORL" : "PT_FT"; }
std::string mode_flag(Mode mode) { return mode == Mode::kEaCorl ? "ea-corl" : "pt-ft"; }

Mode parse_mode(const std::string& text) {
  if (text == "ea-corl" || text == "EA_CORL") return Mode::kEaCorl;
  if (text == "pt-ft" || text == "PT_FT") return Mode::kPtFt;
  throw ConfigError("mode", "mode must be ea-corl or pt-ft, got '" + text + "'");
}

int CodesignConfig::parent_count() const {
  return cma_parent_count > 0 ? cma_parent_count : std::max(1, std::min(10, n_pop / 2));
}

CmaEsConfig CodesignConfig::cma_config() const {
  CmaEsConfig c;
  c.dim = design.dim;
  c.initial_mean = cma_initial_mean;
  c.initial_sigma = cma_initial_sigma;
  c.population_size = n_pop;
  c.parent_count = parent_count();
  c.max_iterations = n_evol;
  c.seed = seed;
  return c;
}

void CodesignConfig::validate() const {
  if (evaluator != "chinup" && evaluator != "synthetic")
    throw ConfigError("evaluator", "evaluator must be chinup or synthetic, got '" + evaluator + "'");
  design.validate();
  env.validate();
  ppo.validate();
  if (n_pop < 2) throw ConfigError("n_pop", "n_pop must be >= 2");
  if (n_env < 1) throw ConfigError("n_env", "n_env must be >= 1");
  if (n_env % n_pop != 0)
    throw ConfigError("n_env", "n_env (" + std::to_string(n_env) +
                                   ") is not divisible by n_pop (" + std::to_string(n_pop) + ")");
  if (n_evol < 1) throw ConfigError("n_evol", "n_evol must be >= 1");
  if (base_train_iters < 0)
    throw ConfigError("base_train_iters", "base_train_iters must be >= 0");
  if (adapt_train_iters < 0)
    throw ConfigError("adapt_train_iters", "adapt_train_iters must be >= 0");
  const long min_iters =
      (env.episode_length + ppo.horizon - 1) / ppo.horizon;  // one full episode per env
  if (base_train_iters > 0 && base_train_iters < min_iters)
    throw ConfigError("base_train_iters", "base_train_iters must cover one episode (>= " +
                                              std::to_string(min_iters) + ")");
  if (adapt_train_iters > 0 && adapt_train_iters < min_iters)
    throw ConfigError("adapt_train_iters", "adapt_train_iters must cover one episode (>= " +
                                               std::to_string(min_iters) + ")");
  if (!(base_learning_rate >= 0.0) || !std::isfinite(base_learning_rate))
    throw ConfigError("ppo.base_learning_rate", "ppo.base_learning_rate must be >= 0");
  if (!(adapt_learning_rate >= 0.0) || !std::isfinite(adapt_learning_rate))
    throw ConfigError("ppo.adapt_learning_rate", "ppo.adapt_learning_rate must be >= 0");
  const int groups = *std::max_element(env.group_map.begin(), env.group_map.end()) + 1;
  if (*std::min_element(env.group_map.begin(), env.group_map.end()) < 0 ||
      (evaluator == "chinup" && groups != design.dim))
    throw ConfigError("design.dim", "design.dim (" + std::to_string(design.dim) +
                                        ") must equal the number of joint groups in "
                                        "env.group_map (" + std::to_string(groups) + ")");
  if (!std::isfinite(cma_initial_mean))
    throw ConfigError("cma.initial_mean", "cma.initial_mean must be finite");
  if (!(cma_initial_sigma > 0.0))
    throw ConfigError("cma.initial_sigma", "cma.initial_sigma must be positive");
  if (cma_parent_count < 0 || cma_parent_count > n_pop)
    throw ConfigError("cma.parent_count", "cma.parent_count must lie in [0, n_pop]");
}

RlEvaluator::RlEvaluator(const CodesignConfig& cfg, EnvFactory factory, PolicyShape shape)
    : cfg_(cfg), factory_(std::move(factory)), shape_(shape) {}

PolicyParams RlEvaluator::initial_policy() {
  Rng rng = make_rng(cfg_.seed, "policy-init");
  PolicyParams p = policy_init(shape_.obs_dim(), shape_.action_dim, shape_.design_dim, rng,
                               shape_.hidden_dim, shape_.latent_dim);
  p.seed = cfg_.seed;
  return p;
}

PopulationOutcome RlEvaluator::evaluate(const PolicyParams& source,
                                        std::span<const DesignVector> designs,
                                        int train_iters, double learning_rate,
                                        std::uint64_t phase) {
  const ExpansionPlan plan = expand_designs(designs, cfg_.n_env);
  TrainResult r = train(source, adam_init(source, learning_rate), plan, designs, train_iters,
                        cfg_.ppo, factory_, cfg_.seed, phase);
  return {std::move(r.params), std::move(r.design_returns), std::move(r.design_episodes),
          std::move(r.history)};
}

std::unique_ptr<RlEvaluator> make_chinup_evaluator(const CodesignConfig& cfg) {
  PolicyShape shape;
  shape.design_dim = cfg.design.dim;
  shape.proprio_dim = Observation::kProprioDim;
  shape.latent_dim = Observation::kLatentDim;
  shape.action_dim = 4;
  return std::make_unique<RlEvaluator>(cfg, chinup_factory(cfg.env, cfg.reward), shape);
}

std::unique_ptr<PopulationEvaluator> make_evaluator(const CodesignConfig& cfg) {
  if (cfg.evaluator == "synthetic") return std::make_unique<SyntheticEvaluator>();
  return make_chinup_evaluator(cfg);
}

PolicyParams SyntheticEvaluator::initial_policy() {
  PolicyShape shape;
  shape.hidden_dim = 1;
  return PolicyParams::zeros(shape);
}

PopulationOutcome SyntheticEvaluator::evaluate(const PolicyParams& source,
                                               std::span<const DesignVector> designs, int,
                                               double, std::uint64_t) {
  PopulationOutcome out{source, {}, {}, {}};
  for (const DesignVector& d : designs) {
    out.mean_returns.push_back(-(d.factors.array() - optimum_).square().sum());
    out.episodes.push_back(1);
  }
  return out;
}

CodesignResult run_codesign(const CodesignConfig& cfg, PopulationEvaluator& evaluator,
                            std::optional<CodesignProgress> resume,
                            const IterationCallback& on_iteration) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  CodesignProgress p;
  if (resume) {
    p = std::move(*resume);
  } else {
    p.cma = cma_init(cfg.cma_config());
  }

  for (int i = static_cast<int>(p.history.size()) + 1; i <= cfg.n_evol; ++i) {
    const bool first = i == 1;
    Rng rng = make_rng(cfg.seed, "cma", static_cast<std::uint64_t>(i));
    std::vector<EvaluatedCandidate> candidates = cma_ask(p.cma, cfg.design, rng);
    std::vector<DesignVector> designs;
    designs.reserve(candidates.size());
    for (const EvaluatedCandidate& c : candidates) designs.push_back(c.design);

    FitnessRecord rec;
    rec.iteration = i;
    rec.sigma = p.cma.sigma;
    rec.cma_mean = p.cma.mean;

    PolicyParams source = first ? evaluator.initial_policy()
                                : (cfg.mode == Mode::kEaCorl ? p.best_policy : p.base_policy);
    rec.source_snapshot = source.snapshot_id;
    PopulationOutcome outcome;
    try {
      outcome = evaluator.evaluate(source, designs,
                                   first ? cfg.base_train_iters : cfg.adapt_train_iters,
                                   first ? cfg.base_learning_rate : cfg.adapt_learning_rate,
                                   static_cast<std::uint64_t>(i));
      outcome.policy.snapshot_id = static_cast<std::uint64_t>(i);
      outcome.policy.seed = cfg.seed;
    } catch (const NumericError& e) {
      rec.failed = true;
      rec.error = e.what();
    } catch (const EnvironmentDivergedError& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    rec.adapted_snapshot = rec.failed ? source.snapshot_id : static_cast<std::uint64_t>(i);
    rec.curve = outcome.curve;

    for (std::size_t j = 0; j < designs.size(); ++j) {
      DesignFitness f;
      f.design = designs[j];
      const double r = rec.failed ? std::numeric_limits<double>::quiet_NaN()
                                  : outcome.mean_returns.at(j);
      if (std::isfinite(r)) {
        f.mean_return = r;
        f.j_pop = -r;
        f.episodes = outcome.episodes.at(j);
      } else {
        f.mean_return = std::numeric_limits<double>::quiet_NaN();
        f.j_pop = std::numeric_limits<double>::infinity();
      }
      rec.designs.push_back(std::move(f));
    }
    for (std::size_t j = 1; j < rec.designs.size(); ++j)
      if (rec.designs[j].j_pop < rec.designs[static_cast<std::size_t>(rec.population_best_index)].j_pop)
        rec.population_best_index = static_cast<int>(j);
    const DesignFitness& pop_best = rec.designs[static_cast<std::size_t>(rec.population_best_index)];
    rec.population_best = pop_best.j_pop;

    if (first) {
      p.base_policy = rec.failed ? source : outcome.policy;
      p.best_policy = p.base_policy;
      rec.improved = true;
      rec.global_best = pop_best.j_pop;
      rec.best_design = pop_best.design;
    } else {
      const FitnessRecord& prev = p.history.back();
      rec.improved = pop_best.j_pop < prev.global_best;
      if (rec.improved) {
        rec.global_best = pop_best.j_pop;
        rec.best_design = pop_best.design;
        if (cfg.mode == Mode::kEaCorl) p.best_policy = outcome.policy;
      } else {
        rec.global_best = prev.global_best;
        rec.best_design = prev.best_design;
      }
    }
    rec.best_snapshot = p.best_policy.snapshot_id;

    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const double jp = rec.designs[j].j_pop;
      candidates[j].fitness = std::isfinite(jp) ? jp : kFailedFitnessSurrogate;
    }
    p.cma = cma_tell(p.cma, std::span<const EvaluatedCandidate>(candidates));
    p.history.push_back(std::move(rec));
    if (on_iteration && !on_iteration(p)) break;
  }

  CodesignResult result;
  if (!p.history.empty()) {
    result.best_design = p.history.back().best_design;
    result.best_fitness = p.history.back().global_best;
  }
  result.best_policy = p.best_policy;
  result.base_policy = p.base_policy;
  result.history = std::move(p.history);
  result.completed = static_cast<int>(result.history.size()) == cfg.n_evol;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CodesignResult run_ea_corl(const CodesignConfig& cfg, PopulationEvaluator& evaluator) {
  if (cfg.mode != Mode::kEaCorl) throw ContractError("run_ea_corl: config mode is PT_FT");
  return run_codesign(cfg, evaluator);
}

CodesignResult run_pt_ft(const CodesignConfig& cfg, PopulationEvaluator& evaluator) {
  if (cfg.mode != Mode::kPtFt) throw ContractError("run_pt_ft: config mode is EA_CORL");
  return run_codesign(cfg, evaluator);
}

std::vector<HeatmapCell> heatmap_sweep(const CodesignConfig& cfg, const PolicyParams& policy,
                                       int axis_a, int axis_b, int resolution,
                                       const DesignVector& fixed) {
  const std::vector<DesignVector> grid =
      grid_slice(cfg.design, axis_a, axis_b, resolution, fixed);
  const int cells = static_cast<int>(grid.size());
  std::vector<HeatmapCell> out;
  out.reserve(grid.size());
  if (cfg.evaluator == "synthetic") {
    SyntheticEvaluator synthetic;
    const PopulationOutcome o = synthetic.evaluate(policy, grid, 0, 0.0, 0);
    for (int k = 0; k < cells; ++k)
      out.push_back({k / resolution, k % resolution, grid[static_cast<std::size_t>(k)],
                     -o.mean_returns[static_cast<std::size_t>(k)]});
    return out;
  }
  const int n_exp = cfg.n_env / cfg.n_pop;
  const ExpansionPlan plan = expand_designs(cells, cells * n_exp);
  const std::uint64_t phase = 0x4000'0000ULL + static_cast<std::uint64_t>(axis_a * 64 + axis_b);
  const std::vector<double> returns = rollout_returns(
      policy, plan, grid, chinup_factory(cfg.env, cfg.reward), cfg.seed, phase);
  for (int k = 0; k < cells; ++k)
    out.push_back({k / resolution, k % resolution, grid[static_cast<std::size_t>(k)],
                   -returns[static_cast<std::size_t>(k)]});
  return out;
}

std::vector<std::pair<int, int>> axis_pairs(int dim) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) out.emplace_back(a, b);
  return out;
}

}  // namespace codesign
