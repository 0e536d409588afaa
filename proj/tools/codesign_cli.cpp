// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// codesign run|resume|sweep|evaluate

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "codesign/config.hpp"
#include "codesign/error.hpp"
#include "codesign/run.hpp"

namespace {

std::vector<double> split_reals(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(codesign::parse_real(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace codesign;
  CLI::App app{"Evolutionary gear-ratio and policy co-design"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::string out_dir = "run";
  std::vector<std::string> sets;
  std::optional<int> stop_after;
  auto* run = app.add_subcommand("run", "start a co-design run");
  run->add_option("--config", config_path, "YAML config (built-in defaults if omitted)")
      ->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "ea-corl or pt-ft")->check(CLI::IsMember({"ea-corl", "pt-ft"}));
  run->add_option("--seed", seed, "root random seed");
  run->add_option("--out", out_dir, "run directory")->capture_default_str();
  run->add_option("--iterations", iterations, "outer iterations (n_evol)");
  run->add_option("--set", sets, "key=value override (repeatable)");
  run->add_option("--stop-after", stop_after, "checkpoint and stop after N iterations");

  std::string run_dir;
  auto* resume = app.add_subcommand("resume", "continue an interrupted run");
  resume->add_option("dir", run_dir, "run directory")->required();
  resume->add_option("--stop-after", stop_after, "checkpoint and stop after N iterations");

  int resolution = 10;
  std::vector<std::string> axes;
  auto* sweep = app.add_subcommand("sweep", "fitness heatmaps around the best design");
  sweep->add_option("dir", run_dir, "run directory")->required();
  sweep->add_option("--resolution", resolution, "grid points per axis")->capture_default_str();
  sweep->add_option("--axes", axes, "axis pair a,b (repeatable; default all pairs)");

  std::string design_text;
  std::string which = "best";
  std::string trajectory = "trajectory.csv";
  auto* evaluate = app.add_subcommand("evaluate", "roll out a checkpointed policy on one design");
  evaluate->add_option("dir", run_dir, "run directory")->required();
  evaluate->add_option("--design", design_text, "comma-separated gear-ratio factors")->required();
  evaluate->add_option("--policy", which, "best or base")->capture_default_str();
  evaluate->add_option("--out", trajectory, "trajectory CSV")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  RunOptions options;
  options.stop_after = stop_after;
  try {
    if (*run) {
      std::vector<std::string> overrides = sets;
      if (!mode.empty()) overrides.push_back("mode=" + mode);
      if (seed) overrides.push_back("seed=" + std::to_string(*seed));
      if (iterations) overrides.push_back("n_evol=" + std::to_string(*iterations));
      const CodesignConfig cfg = config_path.empty() ? parse_config_text("", overrides)
                                                     : parse_config(config_path, overrides);
      return cmd_run(cfg, out_dir, std::cout, options);
    }
    if (*resume) return cmd_resume(run_dir, std::cout, options);
    if (*sweep) {
      std::vector<std::pair<int, int>> pairs;
      for (const std::string& a : axes) {
        const auto v = split_reals(a);
        if (v.size() != 2) throw ConfigError("--axes", "--axes expects a,b");
        pairs.emplace_back(static_cast<int>(v[0]), static_cast<int>(v[1]));
      }
      return cmd_sweep(run_dir, pairs, resolution, std::cout);
    }
    if (*evaluate) {
      const auto v = split_reals(design_text);
      DesignVector d{Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))};
      return cmd_evaluate(run_dir, d, which, trajectory, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error (" << e.key() << "): " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
