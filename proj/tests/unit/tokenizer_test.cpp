// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include <apirec/error.hpp>
#include <apirec/tokenizer.hpp>

#include "support.hpp"

namespace apirec {
namespace {

Vocab small_vocab() {
  return Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "map", "##ping", "##p", "m",
                             "api", "a", "b", "##s"});
}

// n distinct-enough words, one piece each.
std::string words(std::size_t n, const char* w = "a") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + std::string(w);
  return out;
}

void expect_consistent(const TokenizedSequence& s, const Vocab& v) {
  ASSERT_EQ(s.ids.size(), s.segment_ids.size());
  ASSERT_EQ(s.ids.size(), s.attention_mask.size());
  ASSERT_LE(s.n_t, s.size());
  EXPECT_EQ(s.ids.front(), v.cls());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.attention_mask[i], i < s.n_t ? 1 : 0);
    if (i >= s.n_t) {
      EXPECT_EQ(s.ids[i], v.pad());
      EXPECT_EQ(s.segment_ids[i], 0);
    }
  }
}

TEST(Vocab, SpecialTokens) {
  const auto v = small_vocab();
  EXPECT_EQ(v.pad(), 0);
  EXPECT_EQ(v.unk(), 1);
  EXPECT_EQ(v.cls(), 2);
  EXPECT_EQ(v.sep(), 3);
  EXPECT_EQ(v.find("api"), 8);
  EXPECT_EQ(v.find("nope"), -1);
}

TEST(Vocab, MissingSpecialToken) {
  EXPECT_THROW(Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]"}), ConfigError);
}

TEST(Wordpiece, GreedyLongestMatch) {
  const auto v = small_vocab();
  EXPECT_EQ(wordpiece("api", v), (std::vector<TokenId>{8}));
  EXPECT_EQ(wordpiece("mapping", v), (std::vector<TokenId>{4, 5}));
  EXPECT_EQ(wordpiece("maps", v), (std::vector<TokenId>{4, 11}));
  EXPECT_EQ(wordpiece("zzz", v), (std::vector<TokenId>{v.unk()}));
  // "m" matches but the rest of "mx" does not: the whole word is unknown
  EXPECT_EQ(wordpiece("mx", v), (std::vector<TokenId>{v.unk()}));
}

TEST(Wordpiece, FixtureVocab) {
  const auto v = testing::fixture_vocab();
  const auto ids = wordpiece("mapping", *v);
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(v->token(ids[0]), "map");
  EXPECT_EQ(v->token(ids[1]), "##ping");
}

TEST(EncodeSingle, Layout) {
  const auto v = small_vocab();
  const auto s = encode_single("map api", v, 256);
  EXPECT_EQ(s.size(), 256u);
  EXPECT_EQ(s.n_t, 4u);
  EXPECT_EQ(std::count(s.ids.begin(), s.ids.end(), v.sep()), 1);
  EXPECT_EQ(s.ids[3], v.sep());
  expect_consistent(s, v);
}

TEST(EncodeSingle, ExactFitAndTruncation) {
  const auto v = small_vocab();
  const auto full = encode_single(words(6), v, 8);
  EXPECT_EQ(full.n_t, 8u);
  EXPECT_EQ(full.ids.back(), v.sep());

  const auto cut = encode_single(words(300, "b") + " api", v, 256);
  EXPECT_EQ(cut.n_t, 256u);
  EXPECT_EQ(std::count(cut.ids.begin(), cut.ids.end(), 10), 254);  // the head is kept
}

TEST(EncodeSingle, EmptyIsAnError) {
  const auto v = small_vocab();
  EXPECT_THROW(encode_single("", v, 16), ConfigError);
  EXPECT_THROW(encode_single("api", v, 2), ConfigError);
}

TEST(EncodePair, Layout) {
  const auto v = small_vocab();
  const auto s = encode_pair(words(3), words(4, "b"), v, 16);
  EXPECT_EQ(s.n_t, 10u);
  const std::vector<std::int32_t> seg{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(s.segment_ids, seg);
  EXPECT_EQ(s.ids[4], v.sep());
  EXPECT_EQ(s.ids[9], v.sep());
  expect_consistent(s, v);
}

TEST(EncodePair, ExactFit) {
  const auto v = small_vocab();
  const auto s = encode_pair("a", "b", v, 5);
  EXPECT_EQ(s.n_t, 5u);
  EXPECT_EQ(s.size(), 5u);
}

TEST(EncodePair, LongestFirstTruncation) {
  const auto v = small_vocab();
  const auto s = encode_pair(words(200), words(200, "b"), v, 256);
  EXPECT_EQ(s.n_t, 256u);
  EXPECT_EQ(std::count(s.ids.begin(), s.ids.end(), 9), 127);
  EXPECT_EQ(std::count(s.ids.begin(), s.ids.end(), 10), 126);

  const auto uneven = encode_pair(words(10), words(300, "b"), v, 64);
  EXPECT_EQ(std::count(uneven.ids.begin(), uneven.ids.end(), 9), 10);
  EXPECT_EQ(std::count(uneven.ids.begin(), uneven.ids.end(), 10), 51);
}

TEST(EncodePair, EmptySide) {
  const auto v = small_vocab();
  EXPECT_THROW(encode_pair("", "a", v, 16), ConfigError);
  EXPECT_THROW(encode_pair("a", "", v, 16), ConfigError);
  EXPECT_THROW(encode_pair("a", "b", v, 4), ConfigError);
}

TEST(EncodePair, SwapKeepsLength) {
  const auto v = small_vocab();
  const auto ab = encode_pair(words(3), words(7, "b"), v, 32);
  const auto ba = encode_pair(words(7, "b"), words(3), v, 32);
  EXPECT_EQ(ab.n_t, ba.n_t);
  EXPECT_NE(ab.segment_ids, ba.segment_ids);
}

TEST(Tokenizer, RandomTextsKeepInvariants) {
  const auto v = testing::fixture_vocab();
  const auto n = testing::fixture_normalizer();
  std::mt19937_64 rng(3);
  const std::vector<std::string> pool{"maps", "mapping", "weather", "qqq", "api", "music", ",", "!"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(1, 40), cap(5, 48);
  for (int trial = 0; trial < 300; ++trial) {
    std::string a, b;
    for (std::size_t i = len(rng); i > 0; --i) a += pool[pick(rng)] + " ";
    for (std::size_t i = len(rng); i > 0; --i) b += pool[pick(rng)] + " ";
    const auto max_len = cap(rng);
    const auto single = encode_single(n(a), *v, max_len);
    const auto pair = encode_pair(n(a), n(b), *v, max_len);
    EXPECT_EQ(single.size(), max_len);
    EXPECT_EQ(pair.size(), max_len);
    expect_consistent(single, *v);
    expect_consistent(pair, *v);
    EXPECT_EQ(pair, encode_pair(n(a), n(b), *v, max_len));
    EXPECT_EQ(single.trimmed().size(), single.n_t);
  }
}

}  // namespace
}  // namespace apirec
