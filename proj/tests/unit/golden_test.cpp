// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <apirec/checkpoint.hpp>
#include <apirec/filter_head.hpp>
#include <apirec/model.hpp>

#include "support.hpp"

namespace apirec {
namespace {

// Outputs of tests/golden/make_golden.py, an independent numpy implementation.
class Golden : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto dir = testing::data_dir() / "golden";
    std::ifstream in(dir / "expected.json");
    expected_ = new nlohmann::json(nlohmann::json::parse(in));
    filter_ = new Checkpoint(load_checkpoint(dir / "filter.ckpt"));
    matcher_ = new Checkpoint(load_checkpoint(dir / "matcher.ckpt"));
  }
  static void TearDownTestSuite() {
    delete expected_;
    delete filter_;
    delete matcher_;
  }

  static TokenizedSequence single() {
    const auto& s = (*expected_)["single"];
    TokenizedSequence seq;
    seq.ids = s["ids"].get<std::vector<TokenId>>();
    seq.segment_ids = s["segments"].get<std::vector<std::int32_t>>();
    seq.attention_mask = s["mask"].get<std::vector<std::int32_t>>();
    seq.n_t = static_cast<std::size_t>(std::count(seq.attention_mask.begin(), seq.attention_mask.end(), 1));
    return seq;
  }

  template <typename M>
  static void expect_matrix(const M& actual, const nlohmann::json& rows, double tol) {
    ASSERT_EQ(actual.rows(), static_cast<Eigen::Index>(rows.size()));
    for (Eigen::Index r = 0; r < actual.rows(); ++r) {
      ASSERT_EQ(actual.cols(), static_cast<Eigen::Index>(rows[r].size()));
      for (Eigen::Index c = 0; c < actual.cols(); ++c) {
        EXPECT_NEAR(actual(r, c), rows[r][c].get<double>(), tol) << "at (" << r << ", " << c << ")";
      }
    }
  }

  template <typename V>
  static void expect_vector(const V& actual, const nlohmann::json& values, double tol) {
    ASSERT_EQ(static_cast<std::size_t>(actual.size()), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      EXPECT_NEAR(actual[i], values[i].get<double>(), tol) << "at " << i;
    }
  }

  static nlohmann::json* expected_;
  static Checkpoint* filter_;
  static Checkpoint* matcher_;
};

nlohmann::json* Golden::expected_ = nullptr;
Checkpoint* Golden::filter_ = nullptr;
Checkpoint* Golden::matcher_ = nullptr;

constexpr double kDoubleTol = 1e-9;
constexpr double kFloatTol = 2e-4;

TEST_F(Golden, EmbedDouble) {
  const auto p = cast_params<double>(filter_->tensors);
  expect_matrix(embed<double>(filter_->meta.encoder, p, single()), (*expected_)["single"]["embed"],
                kDoubleTol);
}

TEST_F(Golden, FirstLayerDouble) {
  const auto p = cast_params<double>(filter_->tensors);
  const auto seq = single();
  const Matrix<double> x = embed<double>(filter_->meta.encoder, p, seq).topRows(seq.n_t);
  const std::span<const std::int32_t> mask(seq.attention_mask.data(), seq.n_t);
  expect_matrix(attention_block<double>(filter_->meta.encoder, p, 0, x, mask),
                (*expected_)["single"]["layer0"], kDoubleTol);
}

TEST_F(Golden, ForwardDouble) {
  const auto p = cast_params<double>(filter_->tensors);
  const auto seq = single();
  const auto out = forward<double>(filter_->meta.encoder, p, seq);
  const auto& e = (*expected_)["single"];
  expect_matrix(out.hidden, e["hidden"], kDoubleTol);
  expect_vector(out.pooler, e["pooler"], kDoubleTol);
  expect_vector(mean_pool<double>(out.hidden, seq.attention_mask), e["mean"], kDoubleTol);
}

TEST_F(Golden, ForwardFloat) {
  const auto seq = single();
  const auto out = forward<float>(filter_->meta.encoder, filter_->tensors, seq);
  expect_matrix(out.hidden, (*expected_)["single"]["hidden"], kFloatTol);
  expect_vector(out.pooler, (*expected_)["single"]["pooler"], kFloatTol);
}

TEST_F(Golden, FilterBranches) {
  const auto p = cast_params<double>(filter_->tensors);
  const auto seq = single();
  const auto out = forward<double>(filter_->meta.encoder, p, seq);
  const Vector<double> mean = mean_pool<double>(out.hidden, seq.attention_mask);
  const auto& e = (*expected_)["filter"];
  auto head = filter_->meta.filter_head;
  expect_vector(fusion_forward<double>(head, p, out.pooler, mean), e["both"], kDoubleTol);
  head.use_mean = false;
  expect_vector(fusion_forward<double>(head, p, out.pooler, mean), e["pooler_only"], kDoubleTol);
  head.use_mean = true;
  head.use_pooler = false;
  expect_vector(fusion_forward<double>(head, p, out.pooler, mean), e["mean_only"], kDoubleTol);
}

TEST_F(Golden, RelevanceScoresFloat) {
  const auto seq = single();
  const auto out = forward<float>(filter_->meta.encoder, filter_->tensors, seq);
  const auto v = relevance_scores(out, seq.attention_mask, filter_->meta.filter_head, filter_->tensors);
  EXPECT_EQ(v.space, LabelSpace::Repository);
  expect_vector(v.scores, (*expected_)["filter"]["both"], kFloatTol);
  const auto c = category_scores(out, seq.attention_mask, filter_->meta.filter_head, filter_->tensors);
  EXPECT_EQ(c.space, LabelSpace::Categories);
  expect_vector(c.scores, (*expected_)["filter"]["both"], kFloatTol);
}

TEST_F(Golden, MatcherCandidates) {
  const auto& e = (*expected_)["matcher"];
  const auto mashup = e["mashup"].get<std::vector<TokenId>>();
  const auto apis = e["apis"].get<std::vector<std::vector<TokenId>>>();
  MatcherModel model(std::make_shared<const Checkpoint>(*matcher_), testing::fixture_vocab());
  CandidateSet cands{{0, 1, 2}, {0.9, 0.8, 0.7}};
  const auto v = model.score_candidates(mashup, cands, apis);
  EXPECT_EQ(v.space, LabelSpace::Candidates);
  expect_vector(v.scores, e["cross"], kFloatTol);
  EXPECT_NEAR(model.similarity(mashup, apis[1]), e["cross"][1].get<double>(), kFloatTol);
}

TEST_F(Golden, MatcherBiEncode) {
  const auto& e = (*expected_)["matcher"];
  auto ckpt = std::make_shared<Checkpoint>(*matcher_);
  ckpt->meta.match_mode = MatchMode::BiEncodeConcat;
  MatcherModel model(ckpt, testing::fixture_vocab());
  const auto mashup = e["mashup"].get<std::vector<TokenId>>();
  const auto api = e["apis"][0].get<std::vector<TokenId>>();
  EXPECT_NEAR(model.similarity(mashup, api), e["bi_first"].get<double>(), kFloatTol);
}

// A random Hugging Face BertModel exported by tools/export_bert.py, with the
// outputs torch computed for one padded pair.
TEST(GoldenBert, ImportedEncoderMatchesReference) {
  const auto dir = testing::data_dir() / "golden";
  std::ifstream in(dir / "bert_expected.json");
  const auto e = nlohmann::json::parse(in);
  const auto imported = import_bert(load_tensors(dir / "bert.ckpt"), e["heads"].get<int>());
  EXPECT_EQ(imported.config.layers, 2);
  EXPECT_EQ(imported.config.hidden, 16);
  EXPECT_EQ(imported.config.intermediate, 32);

  TokenizedSequence seq;
  seq.ids = e["ids"].get<std::vector<TokenId>>();
  seq.segment_ids = e["segments"].get<std::vector<std::int32_t>>();
  seq.attention_mask = e["mask"].get<std::vector<std::int32_t>>();
  seq.n_t = static_cast<std::size_t>(std::count(seq.attention_mask.begin(), seq.attention_mask.end(), 1));
  const auto out = forward<double>(imported.config, cast_params<double>(imported.tensors), seq);

  // torch ran in float32
  const auto& hidden = e["hidden"];
  ASSERT_EQ(hidden.size(), seq.n_t);
  for (std::size_t r = 0; r < seq.n_t; ++r) {
    for (std::size_t c = 0; c < hidden[r].size(); ++c) {
      EXPECT_NEAR(out.hidden(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)),
                  hidden[r][c].get<double>(), 1e-5);
    }
  }
  for (std::size_t i = 0; i < e["pooler"].size(); ++i) {
    EXPECT_NEAR(out.pooler[static_cast<Eigen::Index>(i)], e["pooler"][i].get<double>(), 1e-5);
  }
}

}  // namespace
}  // namespace apirec
