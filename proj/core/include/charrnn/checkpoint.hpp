// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Checkpoint file layout (all integers and reals little-endian):
//
//   char[8]  magic "CHRNNCKP"
//   u32      format version (1)
//   u32      precision: bytes per real, 4 or 8
//   u64      vocab_size, num_layers, hidden_size, dense_size
//   f64      leakiness
//   u32      scheme (1..4)
//   u64      k1, k2
//   u64      vocabulary length, then u32 code point per symbol
//   u64      default sampling seed length, then u32 token id per token
//   u64      total parameter count
//   real[]   parameter tensors in Parameters::tensors() order
//
// Loading rejects trailing bytes, so a round trip is bit-exact.

#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "charrnn/data.hpp"
#include "charrnn/model.hpp"
#include "charrnn/schemes.hpp"

namespace charrnn {

inline constexpr char kCheckpointMagic[8] = {'C', 'H', 'R', 'N', 'N', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using AnyParameters = std::variant<Parameters<float>, Parameters<double>>;

struct Checkpoint {
  ModelConfig model;
  SchemeId scheme = SchemeId::kScheme1;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  Vocabulary vocabulary;
  std::vector<TokenId> default_seed;
  AnyParameters params;

  std::size_t precision_bits() const { return params.index() == 0 ? 32 : 64; }
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws IoError on a bad magic, version, truncation or inconsistent sizes.
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace charrnn
