// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CODESIGN_ERROR_HPP_
#define CODESIGN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace codesign {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix sizes disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value. `key()` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or infinity appeared in a learning computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class OptimizerDegenerateError : public Error {
 public:
  OptimizerDegenerateError(int generation, const std::string& message)
      : Error("generation " + std::to_string(generation) + ": " + message),
        generation_(generation) {}
  int generation() const { return generation_; }

 private:
  int generation_;
};

class EnvironmentDivergedError : public Error {
 public:
  using Error::Error;
};

// A checkpoint file is missing, truncated or fails its checksum.
class IntegrityError : public Error {
 public:
  IntegrityError(std::string file, const std::string& message)
      : Error(file + ": " + message), file_(std::move(file)) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

}  // namespace codesign

#endif  // CODESIGN_ERROR_HPP_
