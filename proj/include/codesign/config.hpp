// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// YAML run configuration. Nested maps flatten to dotted keys
// ("cma.initial_sigma", "reward.weights.chinup"); every key is listed by
// config_keys(). Resolution order: built-in defaults, then the file, then
// key=value overrides. Unknown keys are rejected.

#ifndef CODESIGN_CONFIG_HPP_
#define CODESIGN_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "codesign/codesign.hpp"

namespace codesign {

std::vector<std::string> config_keys();

CodesignConfig parse_config_text(std::string_view yaml,
                                 const std::vector<std::string>& overrides = {},
                                 const std::string& origin = "<config>");
CodesignConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

// Applies one "key=value" override; the value is read as YAML.
void apply_override(CodesignConfig& cfg, const std::string& assignment);

// Canonical flat form, one "key: value" line per key in config_keys() order.
// Parsing it back yields the same configuration.
std::string config_snapshot(const CodesignConfig& cfg);
std::string config_hash(const CodesignConfig& cfg);

}  // namespace codesign

#endif  // CODESIGN_CONFIG_HPP_
