// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <ostream>

#include "json.hpp"

#include "codesign/binary_io.hpp"
#include "codesign/checkpoint.hpp"
#include "codesign/config.hpp"
#include "codesign/error.hpp"

namespace codesign {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const char* const kStateFiles[] = {"config.snapshot", "state.json", "cma_state",
                                   "policies/base.ckpt", "policies/best.ckpt"};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(format_real(v[i]));
  return a;
}

Eigen::VectorXd vec_from(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[Eigen::Index(i)] = parse_real(a[i].get<std::string>());
  return v;
}

double real_from(const Json& j) { return parse_real(j.get<std::string>()); }

void write_manifest(const fs::path& dir, const RunManifest& m) {
  Json j;
  j["run_id"] = m.run_id;
  j["config_hash"] = m.config_hash;
  j["created"] = m.created;
  j["status"] = m.status;
  j["seed"] = m.seed;
  j["mode"] = m.mode;
  j["completed_iterations"] = m.completed_iterations;
  j["n_evol"] = m.n_evol;
  Json sums = Json::object();
  for (const auto& [file, sum] : m.checksums) sums[file] = sum;
  j["checksums"] = sums;
  if (!m.error.empty()) j["error"] = m.error;
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

std::string learning_curve_name(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%03d.csv", iteration);
  return buf;
}

void write_checkpoint(const fs::path& dir, const CodesignProgress& p, RunManifest& m) {
  save_cma_state(dir / "cma_state", p.cma);
  save_policy(dir / "policies/base.ckpt", p.base_policy);
  save_policy(dir / "policies/best.ckpt", p.best_policy);
  write_file_atomic(dir / "state.json", history_to_json(p.history));
  write_csv(dir / "evolution.csv", evolution_table(p.history));
  write_csv(dir / "cma_log.csv", cma_log_table(p.history));
  m.checksums.clear();
  for (const char* f : kStateFiles) m.checksums.emplace_back(f, sha256_hex(read_file(dir / f)));
  m.completed_iterations = static_cast<int>(p.history.size());
  write_manifest(dir, m);
}

void log_iteration(std::ostream& log, const FitnessRecord& r, int n_evol) {
  log << "iteration " << r.iteration << "/" << n_evol << ": population best "
      << format_real(r.population_best) << ", global best " << format_real(r.global_best)
      << ", d* = [";
  for (Eigen::Index i = 0; i < r.best_design.dim(); ++i)
    log << (i ? ", " : "") << format_real(r.best_design[i]);
  log << "]" << (r.failed ? " (evaluation failed: " + r.error + ")" : "") << "\n";
}

// Drives run_codesign with per-iteration checkpoints; returns the exit code.
int drive(const fs::path& dir, const CodesignConfig& cfg, RunManifest& m,
          std::optional<CodesignProgress> resume, std::ostream& log,
          const RunOptions& options) {
  try {
    std::unique_ptr<PopulationEvaluator> evaluator = make_evaluator(cfg);
    auto on_iteration = [&](const CodesignProgress& p) {
      const FitnessRecord& r = p.history.back();
      if (!r.curve.empty())
        write_csv(dir / "learning" / learning_curve_name(r.iteration),
                  learning_curve_table(r.curve));
      m.status = static_cast<int>(p.history.size()) >= cfg.n_evol ? "completed" : "running";
      write_checkpoint(dir, p, m);
      log_iteration(log, r, cfg.n_evol);
      return !(options.stop_after && static_cast<int>(p.history.size()) >= *options.stop_after);
    };
    const CodesignResult result = run_codesign(cfg, *evaluator, std::move(resume), on_iteration);
    if (result.completed) {
      log << "completed: J* = " << format_real(result.best_fitness) << "\n";
      return kExitOk;
    }
    m.status = "interrupted";
    write_manifest(dir, m);
    log << "interrupted after iteration " << m.completed_iterations << "; resume with `resume "
        << dir.string() << "`\n";
    return kExitInterrupted;
  } catch (const Error& e) {
    m.status = "failed";
    m.error = e.what();
    write_manifest(dir, m);
    log << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace

CsvTable evolution_table(const std::vector<FitnessRecord>& history) {
  CsvTable t;
  const Eigen::Index dim = history.empty() ? 0 : history.front().designs.front().design.dim();
  t.header = {"iteration", "design"};
  for (Eigen::Index i = 0; i < dim; ++i) t.header.push_back("d_" + std::to_string(i));
  for (const char* h : {"j_pop", "mean_return", "episodes", "population_best", "global_best"})
    t.header.push_back(h);
  for (Eigen::Index i = 0; i < dim; ++i) t.header.push_back("best_d_" + std::to_string(i));
  for (const char* h : {"source_snapshot", "adapted_snapshot", "best_snapshot", "improved", "failed"})
    t.header.push_back(h);
  for (const FitnessRecord& r : history) {
    for (std::size_t j = 0; j < r.designs.size(); ++j) {
      const DesignFitness& f = r.designs[j];
      std::vector<std::string> row = {std::to_string(r.iteration), std::to_string(j)};
      for (Eigen::Index i = 0; i < dim; ++i) row.push_back(format_real(f.design[i]));
      row.push_back(format_real(f.j_pop));
      row.push_back(format_real(f.mean_return));
      row.push_back(std::to_string(f.episodes));
      row.push_back(format_real(r.population_best));
      row.push_back(format_real(r.global_best));
      for (Eigen::Index i = 0; i < dim; ++i) row.push_back(format_real(r.best_design[i]));
      row.push_back(std::to_string(r.source_snapshot));
      row.push_back(std::to_string(r.adapted_snapshot));
      row.push_back(std::to_string(r.best_snapshot));
      row.push_back(r.improved ? "1" : "0");
      row.push_back(r.failed ? "1" : "0");
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable cma_log_table(const std::vector<FitnessRecord>& history) {
  CsvTable t;
  const Eigen::Index dim = history.empty() ? 0 : history.front().cma_mean.size();
  t.header = {"iteration", "sigma"};
  for (Eigen::Index i = 0; i < dim; ++i) t.header.push_back("mean_" + std::to_string(i));
  for (const FitnessRecord& r : history) {
    std::vector<std::string> row = {std::to_string(r.iteration), format_real(r.sigma)};
    for (Eigen::Index i = 0; i < dim; ++i) row.push_back(format_real(r.cma_mean[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable learning_curve_table(const std::vector<IterationStats>& curve) {
  CsvTable t;
  t.header = {"iteration",  "mean_return", "std_return",   "policy_loss",
              "value_loss", "entropy",     "clip_fraction"};
  for (const IterationStats& s : curve)
    t.rows.push_back({std::to_string(s.iteration), format_real(s.mean_return),
                      format_real(s.std_return), format_real(s.update.policy_loss),
                      format_real(s.update.value_loss), format_real(s.update.entropy),
                      format_real(s.update.clip_fraction)});
  return t;
}

CsvTable heatmap_table(const std::vector<HeatmapCell>& cells) {
  CsvTable t;
  const Eigen::Index dim = cells.empty() ? 0 : cells.front().design.dim();
  t.header = {"row", "col"};
  for (Eigen::Index i = 0; i < dim; ++i) t.header.push_back("d_" + std::to_string(i));
  t.header.push_back("j_pop");
  for (const HeatmapCell& c : cells) {
    std::vector<std::string> row = {std::to_string(c.row), std::to_string(c.col)};
    for (Eigen::Index i = 0; i < dim; ++i) row.push_back(format_real(c.design[i]));
    row.push_back(format_real(c.j_pop));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string history_to_json(const std::vector<FitnessRecord>& history) {
  Json records = Json::array();
  for (const FitnessRecord& r : history) {
    Json designs = Json::array();
    for (const DesignFitness& f : r.designs)
      designs.push_back({{"design", vec_json(f.design.factors)},
                         {"j_pop", format_real(f.j_pop)},
                         {"mean_return", format_real(f.mean_return)},
                         {"episodes", f.episodes}});
    records.push_back({{"iteration", r.iteration},
                       {"designs", designs},
                       {"population_best_index", r.population_best_index},
                       {"population_best", format_real(r.population_best)},
                       {"global_best", format_real(r.global_best)},
                       {"best_design", vec_json(r.best_design.factors)},
                       {"source_snapshot", r.source_snapshot},
                       {"adapted_snapshot", r.adapted_snapshot},
                       {"best_snapshot", r.best_snapshot},
                       {"improved", r.improved},
                       {"failed", r.failed},
                       {"error", r.error},
                       {"sigma", format_real(r.sigma)},
                       {"cma_mean", vec_json(r.cma_mean)}});
  }
  Json root;
  root["version"] = 1;
  root["records"] = records;
  return root.dump(1) + "\n";
}

std::vector<FitnessRecord> history_from_json(const std::string& text, const std::string& origin) {
  std::vector<FitnessRecord> out;
  try {
    const Json root = Json::parse(text);
    if (root.at("version").get<int>() != 1)
      throw IntegrityError(origin, "unsupported state version");
    for (const Json& j : root.at("records")) {
      FitnessRecord r;
      r.iteration = j.at("iteration").get<int>();
      for (const Json& d : j.at("designs")) {
        DesignFitness f;
        f.design.factors = vec_from(d.at("design"));
        f.j_pop = real_from(d.at("j_pop"));
        f.mean_return = real_from(d.at("mean_return"));
        f.episodes = d.at("episodes").get<int>();
        r.designs.push_back(std::move(f));
      }
      r.population_best_index = j.at("population_best_index").get<int>();
      r.population_best = real_from(j.at("population_best"));
      r.global_best = real_from(j.at("global_best"));
      r.best_design.factors = vec_from(j.at("best_design"));
      r.source_snapshot = j.at("source_snapshot").get<std::uint64_t>();
      r.adapted_snapshot = j.at("adapted_snapshot").get<std::uint64_t>();
      r.best_snapshot = j.at("best_snapshot").get<std::uint64_t>();
      r.improved = j.at("improved").get<bool>();
      r.failed = j.at("failed").get<bool>();
      r.error = j.at("error").get<std::string>();
      r.sigma = real_from(j.at("sigma"));
      r.cma_mean = vec_from(j.at("cma_mean"));
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(origin, std::string("malformed state: ") + e.what());
  } catch (const ContractError& e) {
    throw IntegrityError(origin, std::string("malformed state: ") + e.what());
  }
  return out;
}

RunManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw IntegrityError(path.string(), "run manifest is missing");
  RunManifest m;
  try {
    const Json j = Json::parse(read_file(path));
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.created = j.at("created").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.mode = j.at("mode").get<std::string>();
    m.completed_iterations = j.at("completed_iterations").get<int>();
    m.n_evol = j.at("n_evol").get<int>();
    for (const auto& [file, sum] : j.at("checksums").items())
      m.checksums.emplace_back(file, sum.get<std::string>());
    if (j.contains("error")) m.error = j.at("error").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(path.string(), std::string("malformed manifest: ") + e.what());
  }
  return m;
}

LoadedRun load_run(const fs::path& dir) {
  LoadedRun run;
  run.manifest = read_manifest(dir);
  const fs::path snapshot = dir / "config.snapshot";
  if (!fs::exists(snapshot)) throw IntegrityError(snapshot.string(), "file is missing");
  try {
    run.config = parse_config(snapshot);
  } catch (const ConfigError& e) {
    throw IntegrityError(snapshot.string(), std::string("unreadable config: ") + e.what());
  }
  if (config_hash(run.config) != run.manifest.config_hash)
    throw IntegrityError(snapshot.string(), "config hash " + config_hash(run.config) +
                                                " does not match the manifest (" +
                                                run.manifest.config_hash + ")");
  if (run.manifest.completed_iterations == 0) return run;

  for (const auto& [file, sum] : run.manifest.checksums) {
    const fs::path path = dir / file;
    if (!fs::exists(path)) throw IntegrityError(path.string(), "checkpoint file is missing");
    if (sha256_hex(read_file(path)) != sum)
      throw IntegrityError(path.string(), "checksum mismatch");
  }
  CodesignProgress& p = run.progress;
  const fs::path state = dir / "state.json";
  p.history = history_from_json(read_file(state), state.string());
  if (static_cast<int>(p.history.size()) != run.manifest.completed_iterations)
    throw IntegrityError(state.string(), "record count disagrees with the manifest");

  // Rebuild from the config so the derived constants are bit-identical.
  const CmaEsState saved = load_cma_state(dir / "cma_state");
  p.cma = cma_init(run.config.cma_config());
  if (saved.dim() != p.cma.dim() || saved.lambda != p.cma.lambda ||
      saved.mu() != p.cma.mu() || !saved.weights.isApprox(p.cma.weights, 1e-12))
    throw IntegrityError((dir / "cma_state").string(), "optimizer state does not match config");
  p.cma.mean = saved.mean;
  p.cma.sigma = saved.sigma;
  p.cma.cov = saved.cov;
  p.cma.path_sigma = saved.path_sigma;
  p.cma.path_c = saved.path_c;
  p.cma.generation = saved.generation;
  p.base_policy = load_policy(dir / "policies/base.ckpt");
  p.best_policy = load_policy(dir / "policies/best.ckpt");
  return run;
}

int cmd_run(const CodesignConfig& cfg, const fs::path& out, std::ostream& log,
            const RunOptions& options) {
  if (fs::exists(out / "manifest.json")) {
    log << "error: " << out.string() << " already holds a run; use resume or a new --out\n";
    return kExitUsage;
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    log << "config error (" << e.key() << "): " << e.what() << "\n";
    return kExitUsage;
  }
  fs::create_directories(out / "policies");
  const std::string snapshot = config_snapshot(cfg);
  write_file_atomic(out / "config.snapshot", snapshot);

  RunManifest m;
  m.config_hash = git_blob_hash(snapshot);
  m.created = utc_timestamp();
  m.run_id = m.config_hash.substr(0, 12) + "-" + m.created;
  m.status = "running";
  m.seed = cfg.seed;
  m.mode = mode_name(cfg.mode);
  m.n_evol = cfg.n_evol;
  write_manifest(out, m);
  log << "run " << m.run_id << " (" << m.mode << ", seed " << cfg.seed << ") -> "
      << out.string() << "\n";
  return drive(out, cfg, m, std::nullopt, log, options);
}

int cmd_resume(const fs::path& dir, std::ostream& log, const RunOptions& options) {
  LoadedRun run;
  try {
    run = load_run(dir);
  } catch (const IntegrityError& e) {
    log << "integrity error: " << e.what() << "\n";
    return kExitFailed;
  }
  if (run.manifest.status == "completed") {
    log << "run " << run.manifest.run_id << " is already complete\n";
    return kExitOk;
  }
  log << "resuming run " << run.manifest.run_id << " after iteration "
      << run.manifest.completed_iterations << "\n";
  run.manifest.status = "running";
  run.manifest.error.clear();
  std::optional<CodesignProgress> progress;
  if (run.manifest.completed_iterations > 0) progress = std::move(run.progress);
  return drive(dir, run.config, run.manifest, std::move(progress), log, options);
}

int cmd_sweep(const fs::path& dir, const std::vector<std::pair<int, int>>& axes, int resolution,
              std::ostream& log) {
  try {
    const LoadedRun run = load_run(dir);
    if (run.progress.history.empty() || !fs::exists(dir / "policies/best.ckpt")) {
      log << "error: " << (dir / "policies/best.ckpt").string()
          << " is missing; the run has no best policy yet\n";
      return kExitFailed;
    }
    const DesignVector& fixed = run.progress.history.back().best_design;
    const auto pairs = axes.empty() ? axis_pairs(run.config.design.dim) : axes;
    for (const auto& [a, b] : pairs) {
      const auto cells =
          heatmap_sweep(run.config, run.progress.best_policy, a, b, resolution, fixed);
      const fs::path out = dir / ("heatmap_" + std::to_string(a) + "_" + std::to_string(b) + ".csv");
      write_csv(out, heatmap_table(cells));
      log << "wrote " << out.string() << " (" << cells.size() << " cells)\n";
    }
    return kExitOk;
  } catch (const IntegrityError& e) {
    log << "integrity error: " << e.what() << "\n";
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
  }
  return kExitFailed;
}

int cmd_evaluate(const fs::path& dir, const DesignVector& design, const std::string& which_policy,
                 const fs::path& out_csv, std::ostream& log) {
  try {
    const LoadedRun run = load_run(dir);
    if (run.progress.history.empty()) {
      log << "error: run has no checkpointed policy yet\n";
      return kExitFailed;
    }
    if (which_policy != "best" && which_policy != "base") {
      log << "error: --policy must be best or base\n";
      return kExitUsage;
    }
    const PolicyParams& policy =
        which_policy == "best" ? run.progress.best_policy : run.progress.base_policy;
    if (design.dim() != run.config.design.dim || run.config.evaluator != "chinup") {
      log << "error: design must have " << run.config.design.dim
          << " factors and the run must use the chin-up evaluator\n";
      return kExitUsage;
    }
    ChinupEnv env(run.config.env, run.config.reward, design,
                  derive_seed(run.config.seed, "env", 0x6576ULL, 0));
    CsvTable t;
    t.header = {"t", "q_0", "q_1", "qdot_0", "qdot_1", "head_x", "head_y", "tau_0", "tau_1"};
    for (std::string_view name : kTermNames) t.header.emplace_back(name);
    t.header.push_back("reward");
    double total = 0.0;
    for (int step = 0;; ++step) {
      const PolicyOutput out = policy_forward(policy, design, env.proprio());
      const StepResult r = env.step(out.dist.mean);
      total += r.reward;
      const EnvState& s = env.state();
      const StepOutcome& o = env.last_outcome();
      const Eigen::Vector2d head = forward_kinematics(s.q, run.config.env);
      std::vector<std::string> row = {std::to_string(step),     format_real(s.q[0]),
                                      format_real(s.q[1]),      format_real(s.qdot[0]),
                                      format_real(s.qdot[1]),   format_real(head.x()),
                                      format_real(head.y()),    format_real(o.tau[0]),
                                      format_real(o.tau[1])};
      for (double term : o.breakdown.terms) row.push_back(format_real(term));
      row.push_back(format_real(r.reward));
      t.rows.push_back(std::move(row));
      if (r.done) break;
    }
    write_csv(out_csv, t);
    log << "episode return " << format_real(total) << " (J = " << format_real(-total)
        << "); trajectory written to " << out_csv.string() << "\n";
    return kExitOk;
  } catch (const IntegrityError& e) {
    log << "integrity error: " << e.what() << "\n";
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
  }
  return kExitFailed;
}

}  // namespace codesign
