// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "codesign/checkpoint.hpp"
#include "codesign/csv.hpp"
#include "codesign/error.hpp"

namespace codesign {
namespace {

using Setter = std::function<void(CodesignConfig&, const YAML::Node&, const std::string&)>;
using Getter = std::function<std::string(const CodesignConfig&)>;

struct Entry {
  std::string key;
  Setter set;
  Getter get;
};

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const char* what) {
  if (!node.IsScalar()) throw ConfigError(key, key + " expects " + what);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, key + " expects " + what + ", got '" + node.Scalar() + "'");
  }
}

template <typename T>
std::vector<T> sequence(const YAML::Node& node, const std::string& key, const char* what,
                        std::size_t size) {
  if (!node.IsSequence() || node.size() != size)
    throw ConfigError(key, key + " expects a list of " + std::to_string(size) + " " + what);
  std::vector<T> out;
  for (const auto& item : node) out.push_back(scalar<T>(item, key, what));
  return out;
}

std::string fmt(double v) { return format_real(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const Eigen::Vector2d& v) { return "[" + fmt(v[0]) + ", " + fmt(v[1]) + "]"; }
std::string fmt(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

template <typename Field>
Entry real_entry(std::string key, Field field) {
  return {key,
          [field](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
            field(c) = scalar<double>(n, k, "a number");
          },
          [field](const CodesignConfig& c) { return fmt(field(const_cast<CodesignConfig&>(c))); }};
}

template <typename Field>
Entry int_entry(std::string key, Field field) {
  return {key,
          [field](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
            field(c) = scalar<int>(n, k, "an integer");
          },
          [field](const CodesignConfig& c) { return fmt(field(const_cast<CodesignConfig&>(c))); }};
}

template <typename Field>
Entry vec2_entry(std::string key, Field field) {
  return {key,
          [field](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
            const auto v = sequence<double>(n, k, "numbers", 2);
            field(c) = Eigen::Vector2d(v[0], v[1]);
          },
          [field](const CodesignConfig& c) { return fmt(field(const_cast<CodesignConfig&>(c))); }};
}

#define CFG_FIELD(expr) [](CodesignConfig& c) -> auto& { return expr; }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back({"mode",
                 [](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
                   c.mode = parse_mode(scalar<std::string>(n, k, "ea-corl or pt-ft"));
                 },
                 [](const CodesignConfig& c) { return mode_flag(c.mode); }});
    e.push_back({"evaluator",
                 [](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
                   c.evaluator = scalar<std::string>(n, k, "chinup or synthetic");
                 },
                 [](const CodesignConfig& c) { return c.evaluator; }});
    e.push_back({"seed",
                 [](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
                   c.seed = scalar<std::uint64_t>(n, k, "a non-negative integer");
                 },
                 [](const CodesignConfig& c) { return std::to_string(c.seed); }});
    e.push_back(int_entry("n_env", CFG_FIELD(c.n_env)));
    e.push_back(int_entry("n_pop", CFG_FIELD(c.n_pop)));
    e.push_back(int_entry("n_evol", CFG_FIELD(c.n_evol)));
    e.push_back(int_entry("base_train_iters", CFG_FIELD(c.base_train_iters)));
    e.push_back(int_entry("adapt_train_iters", CFG_FIELD(c.adapt_train_iters)));

    e.push_back(int_entry("design.dim", CFG_FIELD(c.design.dim)));
    e.push_back(real_entry("design.lower_bound", CFG_FIELD(c.design.lower_bound)));
    e.push_back(real_entry("design.upper_bound", CFG_FIELD(c.design.upper_bound)));

    e.push_back(real_entry("cma.initial_mean", CFG_FIELD(c.cma_initial_mean)));
    e.push_back(real_entry("cma.initial_sigma", CFG_FIELD(c.cma_initial_sigma)));
    e.push_back(int_entry("cma.parent_count", CFG_FIELD(c.cma_parent_count)));

    e.push_back(real_entry("ppo.gamma", CFG_FIELD(c.ppo.gamma)));
    e.push_back(real_entry("ppo.gae_lambda", CFG_FIELD(c.ppo.gae_lambda)));
    e.push_back(real_entry("ppo.clip", CFG_FIELD(c.ppo.clip)));
    e.push_back(int_entry("ppo.epochs", CFG_FIELD(c.ppo.epochs)));
    e.push_back(int_entry("ppo.minibatches", CFG_FIELD(c.ppo.minibatches)));
    e.push_back(real_entry("ppo.value_coef", CFG_FIELD(c.ppo.value_coef)));
    e.push_back(real_entry("ppo.entropy_coef", CFG_FIELD(c.ppo.entropy_coef)));
    e.push_back(real_entry("ppo.base_learning_rate", CFG_FIELD(c.base_learning_rate)));
    e.push_back(real_entry("ppo.adapt_learning_rate", CFG_FIELD(c.adapt_learning_rate)));
    e.push_back(int_entry("ppo.horizon", CFG_FIELD(c.ppo.horizon)));
    e.push_back(int_entry("ppo.eval_window", CFG_FIELD(c.ppo.eval_window)));
    e.push_back(real_entry("ppo.reward_scale", CFG_FIELD(c.ppo.reward_scale)));

    e.push_back(real_entry("env.m1", CFG_FIELD(c.env.m1)));
    e.push_back(real_entry("env.m2", CFG_FIELD(c.env.m2)));
    e.push_back(real_entry("env.l1", CFG_FIELD(c.env.l1)));
    e.push_back(real_entry("env.l2", CFG_FIELD(c.env.l2)));
    e.push_back(real_entry("env.gravity", CFG_FIELD(c.env.gravity)));
    e.push_back(real_entry("env.dt_sim", CFG_FIELD(c.env.dt_sim)));
    e.push_back(int_entry("env.decimation", CFG_FIELD(c.env.decimation)));
    e.push_back(int_entry("env.episode_length", CFG_FIELD(c.env.episode_length)));
    e.push_back(vec2_entry("env.tau_default", CFG_FIELD(c.env.tau_default)));
    e.push_back(vec2_entry("env.qdot_default", CFG_FIELD(c.env.qdot_default)));
    e.push_back(real_entry("env.kp", CFG_FIELD(c.env.kp)));
    e.push_back(real_entry("env.kd", CFG_FIELD(c.env.kd)));
    e.push_back(vec2_entry("env.goal", CFG_FIELD(c.env.goal)));
    e.push_back(vec2_entry("env.q_min", CFG_FIELD(c.env.q_min)));
    e.push_back(vec2_entry("env.q_max", CFG_FIELD(c.env.q_max)));
    e.push_back(real_entry("env.reset_noise", CFG_FIELD(c.env.reset_noise)));
    e.push_back(real_entry("env.cyl_gap", CFG_FIELD(c.env.cyl_gap)));
    e.push_back(real_entry("env.qdot_obs_scale", CFG_FIELD(c.env.qdot_obs_scale)));
    e.push_back({"env.group_map",
                 [](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
                   c.env.group_map = sequence<int>(n, k, "integers", 2);
                 },
                 [](const CodesignConfig& c) { return fmt(c.env.group_map); }});

    e.push_back(real_entry("reward.cyl_window_low", CFG_FIELD(c.reward.cyl_window_low)));
    e.push_back(real_entry("reward.cyl_window_high", CFG_FIELD(c.reward.cyl_window_high)));
    e.push_back(real_entry("reward.cyl_out_value", CFG_FIELD(c.reward.cyl_out_value)));
    e.push_back(real_entry("reward.base_out_value", CFG_FIELD(c.reward.base_out_value)));
    for (std::size_t t = 0; t < kTermCount; ++t) {
      const std::string name(kTermNames[t]);
      e.push_back({"reward.weights." + name,
                   [t](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
                     c.reward.weights[t] = scalar<double>(n, k, "a number");
                   },
                   [t](const CodesignConfig& c) { return fmt(c.reward.weights[t]); }});
    }
    for (std::size_t t = 0; t < kTermCount; ++t) {
      const std::string name(kTermNames[t]);
      e.push_back({"reward.active." + name,
                   [t](CodesignConfig& c, const YAML::Node& n, const std::string& k) {
                     c.reward.active[t] = scalar<bool>(n, k, "true or false");
                   },
                   [t](const CodesignConfig& c) { return fmt(bool(c.reward.active[t])); }});
    }
    return e;
  }();
  return entries;
}

#undef CFG_FIELD

const Entry& lookup(const std::string& key) {
  static const std::map<std::string, const Entry*> index = [] {
    std::map<std::string, const Entry*> m;
    for (const Entry& e : registry()) m[e.key] = &e;
    return m;
  }();
  const auto it = index.find(key);
  if (it == index.end()) throw ConfigError(key, "unknown configuration key '" + key + "'");
  return *it->second;
}

void flatten(const YAML::Node& node, const std::string& prefix,
             std::vector<std::pair<std::string, YAML::Node>>& out) {
  for (const auto& kv : node) {
    const std::string key = prefix.empty() ? kv.first.Scalar() : prefix + "." + kv.first.Scalar();
    if (kv.second.IsMap())
      flatten(kv.second, key, out);
    else
      out.emplace_back(key, kv.second);
  }
}

YAML::Node load_yaml(std::string_view text, const std::string& origin) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("config", origin + ": malformed YAML: " + e.what());
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : registry()) keys.push_back(e.key);
  return keys;
}

void apply_override(CodesignConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(assignment, "override '" + assignment + "' must have the form key=value");
  const std::string key = assignment.substr(0, eq);
  const Entry& entry = lookup(key);
  entry.set(cfg, load_yaml(assignment.substr(eq + 1), "override " + key), key);
}

CodesignConfig parse_config_text(std::string_view yaml, const std::vector<std::string>& overrides,
                                 const std::string& origin) {
  CodesignConfig cfg;
  const YAML::Node root = load_yaml(yaml, origin);
  if (root.IsDefined() && !root.IsNull()) {
    if (!root.IsMap())
      throw ConfigError("config", origin + ": top level must be a mapping of keys");
    std::vector<std::pair<std::string, YAML::Node>> flat;
    flatten(root, "", flat);
    for (const auto& [key, node] : flat) lookup(key).set(cfg, node, key);
  }
  for (const std::string& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

CodesignConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "config file not found: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), overrides, path.string());
}

std::string config_snapshot(const CodesignConfig& cfg) {
  std::string out;
  for (const Entry& e : registry()) out += e.key + ": " + e.get(cfg) + "\n";
  return out;
}

std::string config_hash(const CodesignConfig& cfg) { return git_blob_hash(config_snapshot(cfg)); }

}  // namespace codesign
