// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#include "codesign/checkpoint.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "codesign/binary_io.hpp"
#include "codesign/error.hpp"

namespace codesign {
namespace {

constexpr char kCmaMagic[8] = {'C', 'D', 'S', 'G', 'C', 'M', 'A', '\0'};
constexpr std::uint32_t kCmaVersion = 1;

std::string digest_hex(const EVP_MD* md, std::string_view prefix, std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1)
    throw Error("digest computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[out[i] >> 4]);
    hex.push_back(kHex[out[i] & 0xf]);
  }
  return hex;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError(path.string(), "cannot open file");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string serialize_cma_state(const CmaEsState& s) {
  const auto n = static_cast<std::uint32_t>(s.dim());
  ByteWriter w;
  w.raw(std::string_view(kCmaMagic, sizeof(kCmaMagic)));
  w.u32(kCmaVersion);
  w.u32(n);
  w.u32(static_cast<std::uint32_t>(s.lambda));
  w.u32(static_cast<std::uint32_t>(s.mu()));
  w.i64(s.generation);
  w.f64(s.sigma);
  w.vec(s.mean);
  w.vec(Eigen::Map<const Eigen::VectorXd>(s.cov.data(), s.cov.size()));
  w.vec(s.path_sigma);
  w.vec(s.path_c);
  w.vec(s.weights);
  return w.bytes();
}

CmaEsState deserialize_cma_state(std::string_view bytes, const std::string& origin) {
  ByteReader r(bytes, origin);
  if (r.raw(sizeof(kCmaMagic)) != std::string_view(kCmaMagic, sizeof(kCmaMagic)))
    throw IntegrityError(origin, "not a CMA-ES checkpoint (bad magic)");
  if (r.u32() != kCmaVersion) throw IntegrityError(origin, "unsupported CMA-ES state version");
  const auto n = static_cast<Eigen::Index>(r.u32());
  CmaEsState s;
  s.lambda = static_cast<int>(r.u32());
  const auto mu = static_cast<Eigen::Index>(r.u32());
  if (n < 1 || s.lambda < 2 || mu < 1 || mu > s.lambda || n > 4096)
    throw IntegrityError(origin, "implausible CMA-ES dimensions");
  s.generation = static_cast<int>(r.i64());
  s.sigma = r.f64();
  s.mean = r.vec(n);
  s.cov = r.vec(n * n).reshaped(n, n);
  s.path_sigma = r.vec(n);
  s.path_c = r.vec(n);
  const Eigen::VectorXd weights = r.vec(mu);
  r.expect_end();
  try {
    if (weights.size() < 1 || weights.size() > s.lambda || (weights.array() <= 0.0).any())
      throw ContractError("weights must have 1..lambda positive entries");
    s.weights = weights;
    update_constants(s);
  } catch (const Error& e) {
    throw IntegrityError(origin, std::string("invalid recombination weights: ") + e.what());
  }
  return s;
}

void save_cma_state(const std::filesystem::path& path, const CmaEsState& state) {
  write_file_atomic(path, serialize_cma_state(state));
}

CmaEsState load_cma_state(const std::filesystem::path& path) {
  return deserialize_cma_state(read_file(path), path.string());
}

std::string git_blob_hash(std::string_view bytes) {
  std::string header = "blob " + std::to_string(bytes.size());
  header.push_back('\0');
  return digest_hex(EVP_sha1(), header, bytes);
}

std::string sha256_hex(std::string_view bytes) { return digest_hex(EVP_sha256(), {}, bytes); }

}  // namespace codesign
