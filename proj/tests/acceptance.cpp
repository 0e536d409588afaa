// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "codesign/binary_io.hpp"
#include "codesign/chinup_env.hpp"
#include "codesign/cma_es.hpp"
#include "codesign/codesign.hpp"
#include "codesign/config.hpp"
#include "codesign/design_space.hpp"
#include "codesign/hold_env.hpp"
#include "codesign/policy.hpp"
#include "codesign/ppo.hpp"
#include "codesign/reward.hpp"
#include "codesign/run.hpp"
#include "reference_cmaes.hpp"

using namespace codesign;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Fails the criterion when it overran its time budget.
Outcome within(Outcome o, double seconds, double budget) {
  if (seconds >= budget) {
    o.pass = false;
    o.detail += "; over time budget " + fmt(budget) + " s";
  }
  return o;
}

// ---- 1 ---------------------------------------------------------------------

Outcome scaling_law() {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> factor(0.5, 4.0), limit(0.01, 500.0);
  std::uniform_int_distribution<int> dims(1, 6);
  int mismatches = 0;
  double worst_product = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int groups = dims(rng), joints = dims(rng);
    DesignVector d{Eigen::VectorXd(groups)};
    for (int g = 0; g < groups; ++g) d.factors[g] = factor(rng);
    ActuatorLimits defaults{Eigen::VectorXd(joints), Eigen::VectorXd(joints)};
    std::vector<int> map(static_cast<std::size_t>(joints));
    for (int j = 0; j < joints; ++j) {
      defaults.tau_max[j] = limit(rng);
      defaults.qdot_max[j] = limit(rng);
      map[static_cast<std::size_t>(j)] = std::uniform_int_distribution<int>(0, groups - 1)(rng);
    }
    const ActuatorLimits out = scale_limits(d, defaults, map);
    for (int j = 0; j < joints; ++j) {
      const double f = d.factors[map[static_cast<std::size_t>(j)]];
      if (out.tau_max[j] != defaults.tau_max[j] * f) ++mismatches;
      if (out.qdot_max[j] != defaults.qdot_max[j] / f) ++mismatches;
      const double ref = defaults.tau_max[j] * defaults.qdot_max[j];
      worst_product =
          std::max(worst_product, std::abs(out.tau_max[j] * out.qdot_max[j] - ref) / ref);
    }
  }
  const double eps = std::numeric_limits<double>::epsilon();
  return {mismatches == 0 && worst_product <= 4 * eps,
          std::to_string(mismatches) + " mismatches, worst power-product error " +
              fmt(worst_product / eps) + " eps"};
}

// ---- 2 ---------------------------------------------------------------------

Outcome expansion() {
  auto brute_ok = [](int n_pop, int n_env) {
    const ExpansionPlan plan = expand_designs(n_pop, n_env);
    const int n_exp = n_env / n_pop;
    for (int k = 1; k <= n_env; ++k) {
      const int j = (k + n_exp - 1) / n_exp;  // ceil(k / n_exp), 1-based
      if (plan.design_of(k - 1) != j - 1) return false;
    }
    return true;
  };
  bool ok = brute_ok(50, 4000);
  const int paper_exp = expand_designs(50, 4000).n_exp;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pop(1, 100), mult(1, 200);
  for (int i = 0; i < 20; ++i) {
    const int n_pop = pop(rng);
    ok = ok && brute_ok(n_pop, n_pop * mult(rng));
  }
  return {ok && paper_exp == 80, "n_exp=" + std::to_string(paper_exp) +
                                     (ok ? ", all 21 plans match" : ", enumeration mismatch")};
}

// ---- 3 ---------------------------------------------------------------------

struct CmaRun {
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd mean;
  reference::Vec ref_mean;
};

CmaRun cma_run(const std::function<double(const Eigen::VectorXd&)>& f, int generations) {
  CmaEsConfig cfg;  // dim 2, mean 0.2, sigma 0.3, lambda 50, mu 10
  CmaEsState s = cma_init(cfg);
  reference::Cmaes ref(reference::Vec(2, cfg.initial_mean), cfg.initial_sigma,
                       cfg.population_size, cfg.parent_count);
  DesignSpace open;
  open.lower_bound = -1e300;
  open.upper_bound = 1e300;
  CmaRun out;
  for (int g = 0; g < generations; ++g) {
    Rng a = make_rng(7, "cma", g), b = make_rng(7, "cma", g);
    auto pop = cma_ask(s, open, a);
    for (auto& c : pop) {
      c.fitness = f(c.raw_sample);
      out.best = std::min(out.best, c.fitness);
    }
    s = cma_tell(s, std::span<const EvaluatedCandidate>(pop));
    const auto rpop = ref.ask(b);
    reference::Vec fit;
    for (const auto& x : rpop) fit.push_back(f(Eigen::Map<const Eigen::VectorXd>(x.data(), 2)));
    ref.tell(rpop, fit);
  }
  out.mean = s.mean;
  out.ref_mean = ref.mean();
  return out;
}

Outcome cma_oracle() {
  const CmaRun sphere = cma_run([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, 200);
  const CmaRun rosen = cma_run(
      [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
      },
      500);
  auto gap = [](const CmaRun& r) {
    return std::max(std::abs(r.mean[0] - r.ref_mean[0]), std::abs(r.mean[1] - r.ref_mean[1]));
  };
  const bool ok = sphere.best < 1e-9 && rosen.best < 1e-6 && gap(sphere) < 1e-3 &&
                  gap(rosen) < 1e-3;
  return {ok, "sphere best " + fmt(sphere.best) + ", rosenbrock best " + fmt(rosen.best) +
                  ", mean gap to reference " + fmt(gap(sphere)) + " / " + fmt(gap(rosen))};
}

// ---- 4 ---------------------------------------------------------------------

Outcome reward_table() {
  RewardInputs in;
  const Eigen::VectorXd z2 = Eigen::VectorXd::Zero(2);
  in.tau = in.qdot = in.prev_qdot = in.q = z2;
  in.action = in.prev_action = Eigen::VectorXd::Zero(4);
  in.q_min = Eigen::VectorXd::Constant(2, -2.8);
  in.q_max = Eigen::VectorXd::Constant(2, 2.8);
  in.qdot_max = Eigen::VectorXd::Constant(2, 8.0);
  in.tau_max = Eigen::VectorXd::Constant(2, 12.0);
  const RewardConfig all;
  RewardConfig everything = all;
  everything.active.fill(true);
  std::vector<std::string> failed;
  auto expect = [&](const char* what, double got, double want, double tol = 0.0) {
    if (!(std::abs(got - want) <= tol)) failed.push_back(what);
  };
  auto terms = [&](const RewardInputs& x) { return reward_terms(x, everything); };

  RewardInputs a = in;
  a.pos_head = a.pos_goal = Eigen::Vector2d(0.1, 0.2);
  expect("chinup at goal", terms(a)[Term::kChinup], 1.0);
  a.pos_head = Eigen::Vector2d(0.0, -1.3);
  a.pos_goal = Eigen::Vector2d(0.0, 0.1);
  expect("chinup at rest", terms(a)[Term::kChinup], std::exp(-1.96), 1e-15);
  a.cyl_gap = 0.65;
  expect("cylinder in window", terms(a)[Term::kHollowCylinder], 0.0);
  a.cyl_gap = 0.9;
  expect("cylinder out of window", terms(a)[Term::kHollowCylinder], 10.0);
  a.base_ok = false;
  expect("base position", terms(a)[Term::kBasePosition], 20.0);
  a.sym_pairs = {{0, 1}};
  expect("joint regularization", terms(a)[Term::kJointRegularization], 1.0);
  a.g_proj_xy = Eigen::Vector2d(0.6, 0.8);
  expect("orientation", terms(a)[Term::kOrientation], 1.0, 1e-15);
  a.tau = Eigen::Vector2d(3.0, 4.0);
  expect("torque", terms(a)[Term::kTorque], 25.0);
  a.qdot = Eigen::Vector2d(9.0, -8.4);
  expect("velocity limit clip", terms(a)[Term::kJointVelocityLimit], 1.4, 1e-12);
  a.prev_qdot = Eigen::Vector2d(9.0, -8.0);
  a.dt = 0.02;
  expect("joint acceleration", terms(a)[Term::kJointAcceleration], 400.0, 1e-9);
  a.action = Eigen::Vector4d(1, 0, 0, 2);
  expect("action rate", terms(a)[Term::kActionRate], 5.0);
  a.q = Eigen::Vector2d(3.0, -3.3);
  expect("position limit", terms(a)[Term::kJointPositionLimit], 0.7, 1e-12);
  a.tau_requested = Eigen::Vector2d(40.0, -12.25);
  expect("torque limit clip", terms(a)[Term::kJointTorqueLimit], 1.25);

  RewardConfig chin_torque;
  chin_torque.active.fill(false);
  chin_torque.active[index(Term::kChinup)] = chin_torque.active[index(Term::kTorque)] = true;
  RewardInputs b = in;
  b.tau = Eigen::Vector2d(3.0, 4.0);
  expect("weighted total", reward_terms(b, chin_torque).total, 29.99975, 1e-12);

  // Weighted sum with every default weight on a dense breakdown.
  const RewardBreakdown dense = terms(a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kTermCount; ++i) sum += everything.weights[i] * dense.terms[i];
  expect("weighted sum over all terms", dense.total, sum, 1e-12);
  expect("empty breakdown", total_reward(RewardBreakdown{}, all), 0.0);

  std::string detail = "16 closed-form checks";
  for (const auto& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

// ---- 5 ---------------------------------------------------------------------

Outcome gradient_check() {
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  double worst = 0.0;
  Eigen::Index params = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed);
    PolicyParams p = policy_init(6, 3, 2, rng, 8, 4);
    std::normal_distribution<double> n(0.0, 0.3);
    for (Eigen::Index i = 0; i < p.data.size(); ++i) p.data[i] += n(rng);
    params = p.data.size();

    MiniBatch b;
    b.designs.resize(2, 10);
    b.proprio.resize(2, 10);
    b.actions.resize(3, 10);
    b.old_log_prob.resize(10);
    b.advantages.resize(10);
    b.returns.resize(10);
    std::uniform_real_distribution<double> u(0.5, 4.0), shift(-0.4, 0.4);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      b.designs.col(k) = Eigen::Vector2d(u(rng), u(rng));
      b.proprio.col(k) = Eigen::Vector2d(unit(rng), unit(rng));
      const auto out = policy_forward(p, DesignVector{b.designs.col(k)}, b.proprio.col(k));
      auto [a, lp] = sample_action(out.dist, rng);
      b.actions.col(k) = a;
      b.old_log_prob[k] = lp + shift(rng);
      b.advantages[k] = unit(rng);
      b.returns[k] = unit(rng);
    }
    const LossAndGrads lg = loss_and_grads(p, b, cfg);
    for (Eigen::Index i = 0; i < p.data.size(); ++i) {
      const double h = 1e-6;
      PolicyParams plus = p, minus = p;
      plus.data[i] += h;
      minus.data[i] -= h;
      const double fd =
          (evaluate_loss(plus, b, cfg).total - evaluate_loss(minus, b, cfg).total) / (2 * h);
      const double g = lg.grads.data[i];
      const double scale = std::max({std::abs(g), std::abs(fd), 1e-6});
      worst = std::max(worst, std::abs(g - fd) / scale);
    }
  }
  return {worst < 1e-4, std::to_string(params) + " parameters x 3 batches, worst relative error " +
                            fmt(worst)};
}

// ---- 6 ---------------------------------------------------------------------

Outcome gae_oracle() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution ends(0.1);
  const double gamma = 0.99, lambda = 0.95;
  double worst = 0.0;
  for (int batch = 0; batch < 100; ++batch) {
    Eigen::VectorXd r(20), v(20), d(20);
    for (int t = 0; t < 20; ++t) {
      r[t] = n(rng);
      v[t] = n(rng);
      d[t] = ends(rng) ? 1.0 : 0.0;
    }
    const double boot = n(rng);
    const Eigen::VectorXd a = gae_advantages(r, v, d, boot, gamma, lambda);
    for (int t = 0; t < 20; ++t) {
      // Sum of discounted TD residuals up to the end of the episode.
      double sum = 0.0, w = 1.0;
      for (int k = t; k < 20; ++k) {
        const double next = k + 1 < 20 ? v[k + 1] : boot;
        sum += w * (r[k] + (d[k] > 0.5 ? 0.0 : gamma * next) - v[k]);
        if (d[k] > 0.5) break;
        w *= gamma * lambda;
      }
      worst = std::max(worst, std::abs(a[t] - sum));
    }
  }
  return {worst < 1e-10, "100 batches, worst abs error " + fmt(worst)};
}

// ---- 7 ---------------------------------------------------------------------

Outcome physics() {
  EnvConfig c;
  c.reset_noise = 0.0;
  const DesignVector unit{Eigen::Vector2d(1.0, 1.0)};

  EnvConfig fine = c;
  fine.dt_sim = 1e-4;
  EnvState s = env_reset(fine, unit, 0);
  s.q = Eigen::Vector2d(0.3, 0.0);
  const double e0 = total_energy(s.q, s.qdot, fine);
  double drift = 0.0;
  for (int i = 0; i < 100000; ++i) {
    s = dynamics_step(s, Eigen::Vector2d::Zero(), fine, {.enforce_limits = false}).state;
    drift = std::max(drift, std::abs(total_energy(s.q, s.qdot, fine) - e0) / std::abs(e0));
  }

  EnvState rest = env_reset(c, unit, 0);
  for (int i = 0; i < 2000; ++i) rest = dynamics_step(rest, Eigen::Vector2d::Zero(), c).state;
  const bool stationary = rest.q.isZero(0.0) && rest.qdot.isZero(0.0);

  int not_pd = 0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const Eigen::Vector2d q(-std::numbers::pi + 2 * std::numbers::pi * i / 49.0,
                              -std::numbers::pi + 2 * std::numbers::pi * j / 49.0);
      const Eigen::Matrix2d m = mass_matrix(q, c);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
      if (m(0, 1) != m(1, 0) || es.eigenvalues().minCoeff() <= 0.0) ++not_pd;
    }
  return {drift < 0.01 && stationary && not_pd == 0,
          "energy drift " + fmt(100 * drift) + "% over 10 s, rest " +
              (stationary ? "stationary" : "moved") + ", " + std::to_string(not_pd) +
              " non-PD grid points"};
}

// ---- 8 ---------------------------------------------------------------------

Outcome ppo_learnability() {
  PpoConfig cfg;
  const std::vector<DesignVector> designs{DesignVector{Eigen::VectorXd::Constant(1, 1.0)}};
  const auto span = std::span<const DesignVector>(designs);
  const ExpansionPlan train_plan = expand_designs(1, 16);
  const ExpansionPlan eval_plan = expand_designs(1, 256);
  int passed = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng = make_rng(seed, "policy-init");
    const PolicyParams init = policy_init(2 + 4, 1, 1, rng);
    const double baseline = rollout_returns(init, eval_plan, span, hold_factory(), seed, 99)[0];
    const TrainResult r =
        train(init, adam_init(init, 3e-4), train_plan, span, 300, cfg, hold_factory(), seed);
    const double trained = rollout_returns(r.params, eval_plan, span, hold_factory(), seed, 99)[0];
    const bool ok = trained >= 5.0 * baseline;
    passed += ok;
    detail += (seed > 1 ? "; " : "") + std::string("seed ") + std::to_string(seed) + ": " +
              fmt(trained) + " vs random " + fmt(baseline) + " (" + fmt(trained / baseline, 3) +
              "x)";
  }
  return {passed == 3, detail};
}

// ---- 9, 10, 12 -------------------------------------------------------------

struct DeskRuns {
  fs::path root;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<fs::path> ea, pt;
  fs::path rerun, resumed;
  std::vector<double> ea_seconds, pt_seconds;
  std::string error;
  bool ready = false;
};

CodesignConfig desk_config(Mode mode, std::uint64_t seed) {
  CodesignConfig c = parse_config(fs::path(CODESIGN_SOURCE_DIR) / "configs" / "desk.yaml");
  c.mode = mode;
  c.seed = seed;
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

DeskRuns& desk_runs() {
  static DeskRuns runs = [] {
    DeskRuns r;
    r.root = fs::temp_directory_path() / "codesign_acceptance";
    fs::remove_all(r.root);
    std::ostringstream log;
    auto run = [&](Mode mode, std::uint64_t seed, const std::string& name,
                   const RunOptions& opt = {}) {
      const fs::path dir = r.root / name;
      const int code = cmd_run(desk_config(mode, seed), dir, log, opt);
      const int want = opt.stop_after ? kExitInterrupted : kExitOk;
      if (code != want)
        throw std::runtime_error(name + " exited with " + std::to_string(code) + ": " + log.str());
      return dir;
    };
    try {
      for (std::uint64_t seed : r.seeds) {
        auto t = std::chrono::steady_clock::now();
        r.ea.push_back(run(Mode::kEaCorl, seed, "ea_" + std::to_string(seed)));
        r.ea_seconds.push_back(seconds_since(t));
        t = std::chrono::steady_clock::now();
        r.pt.push_back(run(Mode::kPtFt, seed, "pt_" + std::to_string(seed)));
        r.pt_seconds.push_back(seconds_since(t));
      }
      r.rerun = run(Mode::kEaCorl, 1, "ea_1_rerun");
      r.resumed = run(Mode::kEaCorl, 1, "ea_1_resumed", {.stop_after = 3});
      if (cmd_resume(r.resumed, log) != kExitOk)
        throw std::runtime_error("resume failed: " + log.str());
      r.ready = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  }();
  return runs;
}

std::string check_invariants(const fs::path& dir, Mode mode) {
  const LoadedRun run = load_run(dir);
  const auto& h = run.progress.history;
  if (static_cast<int>(h.size()) != run.config.n_evol) return "incomplete history";
  for (std::size_t i = 0; i < h.size(); ++i) {
    const FitnessRecord& r = h[i];
    for (const DesignFitness& d : r.designs)
      if (!(d.j_pop == -d.mean_return)) return "J_pop != -mean_return at iteration " + std::to_string(i + 1);
    if (i == 0) continue;
    const FitnessRecord& prev = h[i - 1];
    if (r.global_best > prev.global_best) return "J* increased at iteration " + std::to_string(i + 1);
    const bool changed = r.best_snapshot != prev.best_snapshot;
    if (mode == Mode::kEaCorl && changed != r.improved)
      return "snapshot change does not track improvement at iteration " + std::to_string(i + 1);
    if (mode == Mode::kPtFt && changed)
      return "PT-FT snapshot changed at iteration " + std::to_string(i + 1);
  }
  // The CSV view agrees with the checkpointed history.
  const CsvTable evo = read_csv(dir / "evolution.csv");
  for (std::size_t row = 0; row < evo.rows.size(); ++row)
    if (!(evo.number(row, "j_pop") == -evo.number(row, "mean_return")))
      return "evolution.csv row " + std::to_string(row + 1) + " breaks J_pop = -mean_return";
  return {};
}

Outcome structural_invariants() {
  DeskRuns& r = desk_runs();
  if (!r.ready) return {false, "desk runs failed: " + r.error};
  std::string problems;
  int improving = 0;
  for (std::size_t i = 0; i < r.seeds.size(); ++i) {
    const std::string ea = check_invariants(r.ea[i], Mode::kEaCorl);
    const std::string pt = check_invariants(r.pt[i], Mode::kPtFt);
    if (!ea.empty()) problems += "; EA seed " + std::to_string(r.seeds[i]) + ": " + ea;
    if (!pt.empty()) problems += "; PT seed " + std::to_string(r.seeds[i]) + ": " + pt;
    for (const auto& rec : load_run(r.ea[i]).progress.history) improving += rec.improved;
  }
  const double slowest = std::max(*std::max_element(r.ea_seconds.begin(), r.ea_seconds.end()),
                                  *std::max_element(r.pt_seconds.begin(), r.pt_seconds.end()));
  Outcome o{problems.empty(), "6 runs, " + std::to_string(improving) +
                                  " improving EA iterations, slowest run " + fmt(slowest, 3) +
                                  " s" + problems};
  return within(o, slowest, 3600.0);
}

Outcome directional_claim() {
  DeskRuns& r = desk_runs();
  if (!r.ready) return {false, "desk runs failed: " + r.error};
  double ea = 0.0, pt = 0.0;
  std::string per_seed;
  for (std::size_t i = 0; i < r.seeds.size(); ++i) {
    const double e = load_run(r.ea[i]).progress.history.back().global_best;
    const double p = load_run(r.pt[i]).progress.history.back().global_best;
    ea += e / double(r.seeds.size());
    pt += p / double(r.seeds.size());
    per_seed += "; seed " + std::to_string(r.seeds[i]) + ": " + fmt(e, 5) + " vs " + fmt(p, 5);
  }
  double total = 0.0;
  for (double s : r.ea_seconds) total += s;
  for (double s : r.pt_seconds) total += s;
  Outcome o{ea <= pt, "mean final J* EA-CoRL " + fmt(ea, 5) + ", PT-FT " + fmt(pt, 5) +
                          ", gap " + fmt(pt - ea, 4) + per_seed};
  return within(o, total, 3 * 3600.0);
}

Outcome reproducibility() {
  DeskRuns& r = desk_runs();
  if (!r.ready) return {false, "desk runs failed: " + r.error};
  const std::string base = read_file(r.ea[0] / "evolution.csv");
  const bool same_seed = base == read_file(r.rerun / "evolution.csv");
  const bool resume = base == read_file(r.resumed / "evolution.csv") &&
                      read_file(r.ea[0] / "policies/best.ckpt") ==
                          read_file(r.resumed / "policies/best.ckpt");
  return {same_seed && resume, std::string("same-seed evolution.csv ") +
                                   (same_seed ? "identical" : "differs") +
                                   ", interrupt-at-3 + resume " + (resume ? "identical" : "differs")};
}

// ---- 11 --------------------------------------------------------------------

Outcome synthetic_oracle() {
  CodesignConfig cfg;  // n_pop 50, full-scale CMA settings
  cfg.evaluator = "synthetic";
  cfg.n_evol = 30;
  cfg.seed = 11;
  SyntheticEvaluator ev(1.5);
  const CodesignResult r = run_ea_corl(cfg, ev);
  const Eigen::VectorXd optimum = Eigen::VectorXd::Constant(cfg.design.dim, 1.5);
  int first = 0;
  for (const FitnessRecord& rec : r.history)
    if (first == 0 && (rec.best_design.factors - optimum).norm() < 0.05) first = rec.iteration;
  const double dist = (r.best_design.factors - optimum).norm();
  return {dist < 0.05 && first > 0 && first <= 30,
          "|d* - 1.5| = " + fmt(dist) + ", first within 0.05 at iteration " +
              std::to_string(first)};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds; 0 when the criterion checks its own runtime
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "scaling-law exactness", 1.0, scaling_law},
      {2, "expansion exactness", 1.0, expansion},
      {3, "CMA-ES oracle equivalence", 30.0, cma_oracle},
      {4, "reward-table unit suite", 1.0, reward_table},
      {5, "gradient correctness", 10.0, gradient_check},
      {6, "GAE oracle", 5.0, gae_oracle},
      {7, "physics sanity", 30.0, physics},
      {8, "PPO learnability", 600.0, ppo_learnability},
      {9, "co-design structural invariants", 0.0, structural_invariants},
      {10, "EA-CoRL vs PT-FT final fitness", 0.0, directional_claim},
      {11, "synthetic-fitness co-design oracle", 10.0, synthetic_oracle},
      {12, "reproducibility and resume", 0.0, reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t);
    if (c.budget > 0.0) o = within(o, secs, c.budget);
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name
              << "): " << o.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / "codesign_acceptance");
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
