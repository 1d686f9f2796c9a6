// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Corpus loading, vocabulary, train/test split and equidistant-offset batching.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "charrnn/model.hpp"

namespace charrnn {

inline constexpr std::size_t kDefaultTestLength = 11100;
inline constexpr std::size_t kDefaultLanes = 64;

/// Strict UTF-8 decoding; throws IoError on malformed input.
std::u32string utf8_decode(std::string_view bytes);
std::string utf8_encode(std::u32string_view text);
/// Printable rendering of one code point for diagnostics, e.g. "'x' (U+0078)".
std::string describe_char(char32_t ch);

/// Distinct code points in ascending order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<char32_t> symbols);
  static Vocabulary from_text(std::u32string_view text);

  std::size_t size() const { return symbols_.size(); }
  const std::vector<char32_t>& symbols() const { return symbols_; }
  char32_t symbol(TokenId id) const;
  std::optional<TokenId> find(char32_t ch) const;
  /// Throws IoError naming the first character outside the vocabulary.
  std::vector<TokenId> encode(std::u32string_view text) const;
  std::u32string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<char32_t> symbols_;
  std::unordered_map<char32_t, TokenId> index_;
};

struct Corpus {
  std::vector<TokenId> tokens;
  std::string source;

  std::size_t size() const { return tokens.size(); }
};

struct LoadedCorpus {
  Vocabulary vocabulary;
  Corpus corpus;
};

/// Reads a UTF-8 file and builds its vocabulary. Throws IoError when the file
/// is unreadable, empty or not valid UTF-8.
LoadedCorpus load_corpus(const std::filesystem::path& path);
/// Reads a UTF-8 file and encodes it with an existing vocabulary.
Corpus load_corpus_with(const std::filesystem::path& path, const Vocabulary& vocabulary);

struct Split {
  Corpus train;
  Corpus test;
};

/// Rotates left by `rotation`, then the last `test_len` tokens become the
/// test set. Throws std::invalid_argument when test_len >= corpus length.
Split split_dataset(const Corpus& corpus, std::size_t rotation,
                    std::size_t test_len = kDefaultTestLength);

/// floor(j * train_len / lanes) + i * k1, modulo train_len, for each lane j.
std::vector<std::size_t> batch_offsets(std::size_t batch_index, std::size_t k1,
                                       std::size_t train_len, std::size_t lanes = kDefaultLanes);

struct Batch {
  std::vector<std::vector<TokenId>> inputs;   // [lane][k2]
  std::vector<std::vector<TokenId>> targets;  // inputs shifted by one

  std::size_t lanes() const { return inputs.size(); }
  std::size_t length() const { return inputs.empty() ? 0 : inputs.front().size(); }
};

/// Each lane reads k2 + 1 consecutive tokens from its offset, wrapping.
Batch make_batch(const Corpus& train, std::span<const std::size_t> offsets, std::size_t k2);

/// Left rotation by `amount` modulo the corpus length.
Corpus circular_shift(const Corpus& corpus, std::size_t amount);

/// Walks the train set batch by batch. An epoch ends once the lane windows
/// have advanced by one inter-lane stride (i * k1 >= floor(train_len / lanes));
/// the train set is then shifted by a random amount and i restarts at zero.
class BatchStream {
 public:
  BatchStream(Corpus train, std::size_t k1, std::size_t k2, std::size_t lanes, Rng rng);

  /// True when the next batch is the first of an epoch.
  bool at_epoch_start() const { return index_ == 0; }
  Batch next();

  std::size_t epoch() const { return epoch_; }
  std::size_t index_in_epoch() const { return index_; }
  std::size_t batches_per_epoch() const { return batches_per_epoch_; }
  const Corpus& train() const { return train_; }

 private:
  Corpus train_;
  std::size_t k1_;
  std::size_t k2_;
  std::size_t lanes_;
  Rng rng_;
  std::size_t index_ = 0;
  std::size_t epoch_ = 0;
  std::size_t batches_per_epoch_;
};

}  // namespace charrnn
