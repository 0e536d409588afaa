// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0
//
// CMA-ES state checkpoints and content hashes.

#ifndef CODESIGN_CHECKPOINT_HPP_
#define CODESIGN_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "codesign/cma_es.hpp"

namespace codesign {

// Layout: magic "CDSGCMA\0", u32 version, u32 dim, u32 lambda, u32 mu,
// i64 generation, f64 sigma, then mean, covariance (column-major), sigma
// path, covariance path and weights as little-endian doubles. Strategy
// constants are recomputed from the weights on load.
std::string serialize_cma_state(const CmaEsState& state);
CmaEsState deserialize_cma_state(std::string_view bytes, const std::string& origin);
void save_cma_state(const std::filesystem::path& path, const CmaEsState& state);
CmaEsState load_cma_state(const std::filesystem::path& path);

// Hash git assigns to a blob with these contents ("blob <n>\0" + bytes).
std::string git_blob_hash(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

}  // namespace codesign

#endif  // CODESIGN_CHECKPOINT_HPP_
