// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures: randomized parameters and synthetic corpora.

#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "charrnn/data.hpp"
#include "charrnn/model.hpp"

namespace charrnn::testing {

/// Initialized parameters with every tensor perturbed, so biases, peepholes
/// and h0/c0 are nonzero.
template <std::floating_point Real>
Parameters<Real> random_parameters(const ModelConfig& cfg, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  Parameters<Real> p = init_parameters<Real>(cfg, rng);
  for (auto& t : p.tensors())
    for (Real& v : t.values) v += static_cast<Real>(scale * rng.normal());
  return p;
}

inline std::vector<TokenId> random_tokens(std::size_t n, std::size_t vocab, Rng& rng) {
  std::vector<TokenId> out(n);
  for (auto& t : out) t = static_cast<TokenId>(rng.uniform_index(vocab));
  return out;
}

inline Corpus repeated_corpus(const std::vector<TokenId>& cycle, std::size_t length) {
  Corpus c;
  for (std::size_t i = 0; i < length; ++i) c.tokens.push_back(cycle[i % cycle.size()]);
  return c;
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("charrnn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

inline std::string repeat(const std::string& phrase, std::size_t times) {
  std::string out;
  out.reserve(phrase.size() * times);
  for (std::size_t i = 0; i < times; ++i) out += phrase;
  return out;
}

}  // namespace charrnn::testing
