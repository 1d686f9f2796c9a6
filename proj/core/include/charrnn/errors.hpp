// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace charrnn {

/// Invalid configuration values or combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, unwritable or malformed files (corpora, checkpoints).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite loss during training.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t batch_index)
      : std::runtime_error(what), batch_index_(batch_index) {}
  std::size_t batch_index() const { return batch_index_; }

 private:
  std::size_t batch_index_;
};

}  // namespace charrnn
