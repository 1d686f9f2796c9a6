// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

#include "charrnn/errors.hpp"

namespace charrnn {

std::u32string utf8_decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  auto fail = [&](const char* why) -> void {
    throw IoError("invalid UTF-8 at byte offset " + std::to_string(i) + ": " + why);
  };
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      fail("bad lead byte");
      return out;
    }
    if (i + len > bytes.size()) fail("truncated sequence");
    for (std::size_t k = 1; k < len; ++k) {
      const auto bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) fail("bad continuation byte");
      cp = (cp << 6) | (bk & 0x3F);
    }
    static constexpr char32_t kMinForLength[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[len]) fail("overlong encoding");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("not a Unicode scalar value");
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::string describe_char(char32_t ch) {
  char code[16];
  std::snprintf(code, sizeof(code), "U+%04X", static_cast<unsigned>(ch));
  if (ch >= 0x20 && ch != 0x7F) return "'" + utf8_encode(std::u32string(1, ch)) + "' (" + code + ")";
  return code;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<char32_t> symbols) : symbols_(std::move(symbols)) {
  if (!std::is_sorted(symbols_.begin(), symbols_.end()) ||
      std::adjacent_find(symbols_.begin(), symbols_.end()) != symbols_.end())
    throw std::invalid_argument("Vocabulary: symbols must be sorted and unique");
  for (std::size_t i = 0; i < symbols_.size(); ++i) index_.emplace(symbols_[i], static_cast<TokenId>(i));
}

Vocabulary Vocabulary::from_text(std::u32string_view text) {
  std::set<char32_t> distinct(text.begin(), text.end());
  return Vocabulary(std::vector<char32_t>(distinct.begin(), distinct.end()));
}

char32_t Vocabulary::symbol(TokenId id) const {
  if (id >= symbols_.size())
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of " +
                            std::to_string(symbols_.size()));
  return symbols_[id];
}

std::optional<TokenId> Vocabulary::find(char32_t ch) const {
  const auto it = index_.find(ch);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::encode(std::u32string_view text) const {
  std::vector<TokenId> ids;
  ids.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto id = find(text[i]);
    if (!id)
      throw IoError("character " + describe_char(text[i]) + " at position " + std::to_string(i) +
                    " is not in the vocabulary");
    ids.push_back(*id);
  }
  return ids;
}

std::u32string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::u32string out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(symbol(id));
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

std::u32string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  if (bytes.empty()) throw IoError(path.string() + " is empty");
  try {
    return utf8_decode(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

LoadedCorpus load_corpus(const std::filesystem::path& path) {
  const std::u32string text = read_text(path);
  LoadedCorpus out;
  out.vocabulary = Vocabulary::from_text(text);
  out.corpus.tokens = out.vocabulary.encode(text);
  out.corpus.source = path.string();
  return out;
}

Corpus load_corpus_with(const std::filesystem::path& path, const Vocabulary& vocabulary) {
  const std::u32string text = read_text(path);
  try {
    return {vocabulary.encode(text), path.string()};
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Split split_dataset(const Corpus& corpus, std::size_t rotation, std::size_t test_len) {
  if (test_len >= corpus.size())
    throw std::invalid_argument("split_dataset: test length " + std::to_string(test_len) +
                                " must be smaller than the corpus (" +
                                std::to_string(corpus.size()) + " tokens)");
  const Corpus rotated = circular_shift(corpus, rotation);
  const auto cut = rotated.tokens.begin() + static_cast<std::ptrdiff_t>(rotated.size() - test_len);
  Split split;
  split.train = {std::vector<TokenId>(rotated.tokens.begin(), cut), corpus.source + ":train"};
  split.test = {std::vector<TokenId>(cut, rotated.tokens.end()), corpus.source + ":test"};
  return split;
}

std::vector<std::size_t> batch_offsets(std::size_t batch_index, std::size_t k1,
                                       std::size_t train_len, std::size_t lanes) {
  if (lanes == 0) throw std::invalid_argument("batch_offsets: lanes must be >= 1");
  if (train_len == 0) throw std::invalid_argument("batch_offsets: empty train set");
  std::vector<std::size_t> offsets(lanes);
  const std::size_t advance = (batch_index % train_len) * (k1 % train_len) % train_len;
  for (std::size_t j = 0; j < lanes; ++j) {
    // j * train_len fits comfortably in 64 bits for any realistic corpus.
    const std::size_t base = j * train_len / lanes;
    offsets[j] = (base + advance) % train_len;
  }
  return offsets;
}

Batch make_batch(const Corpus& train, std::span<const std::size_t> offsets, std::size_t k2) {
  if (k2 == 0) throw std::invalid_argument("make_batch: k2 must be >= 1");
  if (train.size() == 0) throw std::invalid_argument("make_batch: empty train set");
  const std::size_t n = train.size();
  Batch batch;
  batch.inputs.resize(offsets.size());
  batch.targets.resize(offsets.size());
  for (std::size_t lane = 0; lane < offsets.size(); ++lane) {
    auto& in = batch.inputs[lane];
    auto& out = batch.targets[lane];
    in.resize(k2);
    out.resize(k2);
    for (std::size_t t = 0; t < k2; ++t) {
      in[t] = train.tokens[(offsets[lane] + t) % n];
      out[t] = train.tokens[(offsets[lane] + t + 1) % n];
    }
  }
  return batch;
}

Corpus circular_shift(const Corpus& corpus, std::size_t amount) {
  Corpus out = corpus;
  if (corpus.size() == 0) return out;
  std::rotate(out.tokens.begin(),
              out.tokens.begin() + static_cast<std::ptrdiff_t>(amount % corpus.size()),
              out.tokens.end());
  return out;
}

// ---------------------------------------------------------------------------
// BatchStream

BatchStream::BatchStream(Corpus train, std::size_t k1, std::size_t k2, std::size_t lanes, Rng rng)
    : train_(std::move(train)), k1_(k1), k2_(k2), lanes_(lanes), rng_(rng) {
  if (train_.size() == 0) throw std::invalid_argument("BatchStream: empty train set");
  if (k1_ == 0 || k2_ == 0 || lanes_ == 0)
    throw std::invalid_argument("BatchStream: k1, k2 and lanes must be >= 1");
  const std::size_t stride = train_.size() / lanes_;
  batches_per_epoch_ = std::max<std::size_t>(1, (stride + k1_ - 1) / k1_);
}

Batch BatchStream::next() {
  const auto offsets = batch_offsets(index_, k1_, train_.size(), lanes_);
  Batch batch = make_batch(train_, offsets, k2_);
  if (++index_ >= batches_per_epoch_) {
    index_ = 0;
    ++epoch_;
    train_ = circular_shift(train_, rng_.uniform_index(train_.size()));
  }
  return batch;
}

}  // namespace charrnn
