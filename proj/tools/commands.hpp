// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Subcommand implementations behind the charrnn binary. Each returns a
// process exit status and never throws.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace charrnn::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitIoError = 2,
  kExitNumericalError = 3,
  kExitGradcheckFailed = 4,
};

/// Environment variable that, when set, prefixes relative output_dir values.
inline constexpr const char* kOutputRootEnv = "CHARRNN_OUTPUT_ROOT";

// Fixed run-directory file names.
inline constexpr const char* kSnapshotFile = "config.snapshot";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kLogFile = "log.txt";
inline constexpr const char* kBenchFile = "bench.csv";

struct ConfigArgs {
  std::filesystem::path config;
  std::vector<std::string> overrides;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
};

struct SampleArgs {
  std::filesystem::path checkpoint;
  std::size_t n = 200;
  std::string mode = "multinomial";
  std::optional<std::string> seed_text;
  std::optional<std::string> sampling;  // windowed | progressive; default per scheme
  std::uint64_t rng_seed = 0;
};

/// Resolves output_dir against CHARRNN_OUTPUT_ROOT when it is relative.
std::filesystem::path resolve_output_dir(const std::filesystem::path& output_dir);

int cmd_train(const ConfigArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const ConfigArgs& args, std::ostream& out, std::ostream& err);
/// The config is optional here; defaults describe the tiny random suite.
int cmd_gradcheck(const ConfigArgs& args, std::ostream& out, std::ostream& err);

}  // namespace charrnn::cli
