// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <stdexcept>

#include <gtest/gtest.h>

#include "charrnn/data.hpp"
#include "charrnn/errors.hpp"
#include "test_util.hpp"

namespace charrnn {
namespace {

using testing::TempDir;

Corpus iota_corpus(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.tokens.push_back(static_cast<TokenId>(i));
  return c;
}

TEST(Utf8, RoundTripAndStrictness) {
  const std::string text = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";  // a, e-acute, euro, emoji
  const auto decoded = utf8_decode(text);
  EXPECT_EQ(decoded, (std::u32string{U'a', U'é', U'€', U'\U0001F600'}));
  EXPECT_EQ(utf8_encode(decoded), text);
  EXPECT_THROW(utf8_decode("\xC3"), IoError);          // truncated
  EXPECT_THROW(utf8_decode("\xC0\xAF"), IoError);      // overlong
  EXPECT_THROW(utf8_decode("\xED\xA0\x80"), IoError);  // surrogate
  EXPECT_THROW(utf8_decode("\xFF"), IoError);
}

TEST(LoadCorpus, SortedUniqueVocabulary) {
  TempDir dir;
  const auto loaded = load_corpus(dir.write("abac.txt", "abac"));
  EXPECT_EQ(loaded.vocabulary.symbols(), (std::vector<char32_t>{U'a', U'b', U'c'}));
  EXPECT_EQ(loaded.corpus.tokens, (std::vector<TokenId>{0, 1, 0, 2}));
}

TEST(LoadCorpus, Errors) {
  TempDir dir;
  EXPECT_THROW(load_corpus(dir.write("empty.txt", "")), IoError);
  EXPECT_THROW(load_corpus(dir.path() / "missing.txt"), IoError);
  EXPECT_THROW(load_corpus(dir.write("bad.txt", "ab\xFF")), IoError);
}

TEST(LoadCorpus, WithExistingVocabularyNamesOffendingCharacter) {
  TempDir dir;
  const auto loaded = load_corpus(dir.write("a.txt", "abc"));
  const auto ok = load_corpus_with(dir.write("b.txt", "cab"), loaded.vocabulary);
  EXPECT_EQ(ok.tokens, (std::vector<TokenId>{2, 0, 1}));
  try {
    load_corpus_with(dir.write("c.txt", "abz"), loaded.vocabulary);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos) << e.what();
  }
}

TEST(Vocabulary, EncodeDecode) {
  const auto v = Vocabulary::from_text(U"hello world");
  EXPECT_EQ(v.size(), 8u);
  const auto ids = v.encode(U"hold");
  EXPECT_EQ(v.decode(ids), U"hold");
  EXPECT_FALSE(v.find(U'z').has_value());
  EXPECT_THROW(v.encode(U"zap"), IoError);
}

TEST(Split, SizesForDefaultTestLength) {
  const auto s = split_dataset(iota_corpus(30000), 0);
  EXPECT_EQ(s.train.size(), 18900u);
  EXPECT_EQ(s.test.size(), 11100u);
  EXPECT_EQ(s.train.tokens.front(), 0u);
  EXPECT_EQ(s.test.tokens.back(), 29999u);
}

TEST(Split, RotationIsCyclicAndPartitions) {
  const auto c = iota_corpus(50);
  const auto a = split_dataset(c, 0, 10);
  const auto b = split_dataset(c, 50, 10);
  EXPECT_EQ(a.train.tokens, b.train.tokens);
  EXPECT_EQ(a.test.tokens, b.test.tokens);

  const std::size_t rotation = 17;
  const auto r = split_dataset(c, rotation, 10);
  std::vector<TokenId> joined = r.train.tokens;
  joined.insert(joined.end(), r.test.tokens.begin(), r.test.tokens.end());
  std::rotate(joined.rbegin(), joined.rbegin() + rotation, joined.rend());
  EXPECT_EQ(joined, c.tokens);
  EXPECT_THROW(split_dataset(c, 0, 50), std::invalid_argument);
}

TEST(BatchOffsets, EquidistantLanes) {
  const auto first = batch_offsets(0, 20, 6400, 64);
  ASSERT_EQ(first.size(), 64u);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_EQ(first[j], 100 * j);
  const auto third = batch_offsets(3, 20, 6400, 64);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_EQ(third[j], 60 + 100 * j);
}

TEST(BatchOffsets, OneStrideLaterMatchesNextLane) {
  // i * k1 == train_len / lanes.
  const auto base = batch_offsets(0, 20, 6400, 64);
  const auto later = batch_offsets(5, 20, 6400, 64);
  for (std::size_t j = 0; j + 1 < 64; ++j) EXPECT_EQ(later[j], base[j + 1]);
  EXPECT_EQ(later[63], 0u);
}

TEST(MakeBatch, ShiftByOneAndWrap) {
  const auto c = iota_corpus(5);
  const std::vector<std::size_t> offsets = {0, 4};
  const auto b = make_batch(c, offsets, 3);
  EXPECT_EQ(b.inputs[0], (std::vector<TokenId>{0, 1, 2}));
  EXPECT_EQ(b.targets[0], (std::vector<TokenId>{1, 2, 3}));
  EXPECT_EQ(b.inputs[1], (std::vector<TokenId>{4, 0, 1}));
  EXPECT_EQ(b.targets[1], (std::vector<TokenId>{0, 1, 2}));
}

TEST(MakeBatch, TargetsAlwaysShiftedInputs) {
  Rng rng(5);
  const auto c = testing::repeated_corpus(testing::random_tokens(97, 13, rng), 97);
  const auto offsets = batch_offsets(7, 11, c.size(), 8);
  const auto b = make_batch(c, offsets, 30);
  for (std::size_t j = 0; j < b.lanes(); ++j) {
    for (std::size_t t = 0; t + 1 < 30; ++t) EXPECT_EQ(b.targets[j][t], b.inputs[j][t + 1]);
    EXPECT_EQ(b.targets[j][29], c.tokens[(offsets[j] + 30) % c.size()]);
  }
}

TEST(CircularShift, Examples) {
  const auto c = iota_corpus(4);
  EXPECT_EQ(circular_shift(c, 0).tokens, c.tokens);
  EXPECT_EQ(circular_shift(c, 4).tokens, c.tokens);
  EXPECT_EQ(circular_shift(c, 1).tokens, (std::vector<TokenId>{1, 2, 3, 0}));
}

TEST(BatchStream, EpochLengthAndShift) {
  const std::size_t n = 6400, k1 = 30, lanes = 64;
  BatchStream stream(iota_corpus(n), k1, 40, lanes, Rng(1));
  // Stride 100 with k1 = 30 needs four batches to cover it.
  EXPECT_EQ(stream.batches_per_epoch(), 4u);
  EXPECT_TRUE(stream.at_epoch_start());
  for (std::size_t i = 0; i < 4; ++i) {
    const auto b = stream.next();
    EXPECT_EQ(b.inputs[0][0], i * k1);
  }
  EXPECT_EQ(stream.epoch(), 1u);
  EXPECT_TRUE(stream.at_epoch_start());
  // After the shift the train set is still a rotation of the original.
  const auto& shifted = stream.train().tokens;
  const TokenId start = shifted.front();
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(shifted[i], (start + i) % n);
}

}  // namespace
}  // namespace charrnn
