// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <apirec/trainer.hpp>

#include "gradcheck.hpp"
#include "support.hpp"

namespace apirec {
namespace {

using namespace testing::gradcheck;

void check_filter(const FusionHeadConfig& head, std::uint64_t seed, bool dropout) {
  auto enc = gradcheck_encoder();
  if (dropout) enc.dropout = 0.2f;
  const auto params = random_params(filter_shapes(enc, head), seed);
  const auto seq = seq_of({2, 5, 7, 3}, {0, 0, 0, 0});
  const std::vector<double> target{1.0, 0.0, 1.0};

  auto loss = [&](const ParamSet<double>& p) {
    std::mt19937_64 rng(99);
    return filter_example_loss<double>(enc, head, p, seq, target, nullptr, 1.0,
                                       dropout ? &rng : nullptr);
  };
  auto grads = zeros_like(params);
  std::mt19937_64 rng(99);
  filter_example_loss<double>(enc, head, params, seq, target, &grads, 1.0, dropout ? &rng : nullptr);
  const auto worst = compare(params, grads, loss);
  EXPECT_LE(worst.rel, kTolerance) << "worst element " << worst.where;
}

TEST(GradientCheck, FilterBothBranches) { check_filter({3, true, true}, 11, false); }

TEST(GradientCheck, FilterPoolerOnly) { check_filter({3, true, false}, 12, false); }

TEST(GradientCheck, FilterMeanOnly) { check_filter({3, false, true}, 13, false); }

TEST(GradientCheck, FilterWithFixedDropoutMask) { check_filter({3, true, true}, 14, true); }

void check_matcher(MatchMode mode, double label, std::uint64_t seed) {
  const auto enc = gradcheck_encoder();
  const auto params = random_params(matcher_shapes(enc), seed);
  const auto first = mode == MatchMode::CrossEncode ? seq_of({2, 5, 3, 7}, {0, 0, 0, 1})
                                                    : seq_of({2, 5, 9, 3}, {0, 0, 0, 0});
  const auto second = seq_of({2, 7, 3}, {0, 0, 0});
  auto loss = [&](const ParamSet<double>& p) {
    return matcher_example_loss<double>(enc, mode, p, first, second, label, nullptr);
  };
  auto grads = zeros_like(params);
  matcher_example_loss<double>(enc, mode, params, first, second, label, &grads);
  const auto worst = compare(params, grads, loss);
  EXPECT_LE(worst.rel, kTolerance) << "worst element " << worst.where;
}

TEST(GradientCheck, MatcherCrossEncodePositive) { check_matcher(MatchMode::CrossEncode, 1.0, 21); }

TEST(GradientCheck, MatcherCrossEncodeNegative) { check_matcher(MatchMode::CrossEncode, 0.0, 22); }

TEST(GradientCheck, MatcherBiEncode) { check_matcher(MatchMode::BiEncodeConcat, 1.0, 23); }

}  // namespace
}  // namespace apirec
