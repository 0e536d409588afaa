// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run directories: every outer iteration checkpoints the optimizer, the
// base and best policies and the fitness history, so a run can be resumed
// and finish byte-identical to an uninterrupted one.
//
//   config.snapshot      resolved configuration (hashed into the manifest)
//   manifest.json        run id, config hash, status, checksums
//   state.json           fitness history
//   cma_state            optimizer state (binary)
//   policies/base.ckpt   pre-trained base policy
//   policies/best.ckpt   running best policy
//   evolution.csv        one row per evaluated design
//   cma_log.csv          optimizer mean and step size per iteration
//   learning/iter_NNN.csv  PPO learning curve of each outer iteration
//   heatmap_<a>_<b>.csv  written by sweep

#ifndef CODESIGN_RUN_HPP_
#define CODESIGN_RUN_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "codesign/codesign.hpp"
#include "codesign/csv.hpp"

namespace codesign {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInterrupted = 3;

struct RunManifest {
  std::string run_id;
  std::string config_hash;
  std::string created;
  std::string status;  // running | interrupted | completed | failed
  std::uint64_t seed = 0;
  std::string mode;
  int completed_iterations = 0;
  int n_evol = 0;
  std::vector<std::pair<std::string, std::string>> checksums;  // file, sha256
  std::string error;
};

RunManifest read_manifest(const std::filesystem::path& dir);

struct RunOptions {
  // Stop (status "interrupted") once this many iterations exist in total.
  std::optional<int> stop_after;
};

CsvTable evolution_table(const std::vector<FitnessRecord>& history);
CsvTable cma_log_table(const std::vector<FitnessRecord>& history);
CsvTable learning_curve_table(const std::vector<IterationStats>& curve);
CsvTable heatmap_table(const std::vector<HeatmapCell>& cells);

std::string history_to_json(const std::vector<FitnessRecord>& history);
std::vector<FitnessRecord> history_from_json(const std::string& text, const std::string& origin);

// Loads and verifies a run directory's checkpoint.
struct LoadedRun {
  CodesignConfig config;
  RunManifest manifest;
  CodesignProgress progress;
};
LoadedRun load_run(const std::filesystem::path& dir);

int cmd_run(const CodesignConfig& cfg, const std::filesystem::path& out, std::ostream& log,
            const RunOptions& options = {});
int cmd_resume(const std::filesystem::path& dir, std::ostream& log,
               const RunOptions& options = {});
// Empty `axes` sweeps every axis pair.
int cmd_sweep(const std::filesystem::path& dir, const std::vector<std::pair<int, int>>& axes,
              int resolution, std::ostream& log);
// Deterministic rollout of a checkpointed policy on one design; writes a
// per-step trajectory with the reward breakdown.
int cmd_evaluate(const std::filesystem::path& dir, const DesignVector& design,
                 const std::string& which_policy, const std::filesystem::path& out_csv,
                 std::ostream& log);

}  // namespace codesign

#endif  // CODESIGN_RUN_HPP_
