// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Run configuration files.
//
// Grammar, one entry per line:
//   line    := blank | comment | entry
//   comment := optional spaces, '#', anything
//   entry   := key '=' value      (spaces around key and value are trimmed)
// Keys are case-sensitive; unknown or repeated keys are rejected.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "charrnn/bench.hpp"
#include "charrnn/eval.hpp"
#include "charrnn/optim.hpp"
#include "charrnn/schemes.hpp"

namespace charrnn::cli {

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "run";

  TrainConfig train;
  AdamConfig adam;
  // vocab_size is filled from the dataset at load time.
  ModelConfig model;

  std::uint64_t rotation_seed = 0;
  std::size_t test_length = kDefaultTestLength;
  std::size_t eval_points = kDefaultEvalPoints;
  int precision = 32;

  std::string sampling = "auto";  // auto | windowed | progressive
  DrawMode mode = DrawMode::kMultinomial;

  BenchOptions bench;
  std::vector<Architecture> bench_architectures = {{1, 128}};

  std::size_t gradcheck_trials = 20;
  double gradcheck_epsilon = 1e-5;
  double gradcheck_tolerance = 1e-4;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Applies one `key=value` assignment. Throws ConfigError for unknown keys
/// or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(const std::string& text);
/// Reads and parses a config file, then applies `overrides` in order.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Canonical key=value rendering of every setting; parse_config accepts it.
std::string to_config_text(const RunConfig& cfg);

std::vector<Architecture> parse_architectures(const std::string& text);

}  // namespace charrnn::cli
