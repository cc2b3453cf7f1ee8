// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <apirec/checkpoint.hpp>
#include <apirec/tokenizer.hpp>

namespace apirec::bench {

inline constexpr int kWords = 2000;

inline std::shared_ptr<const Vocab> synthetic_vocab() {
  std::vector<std::string> tokens{"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  for (int i = 0; i < kWords; ++i) tokens.push_back("w" + std::to_string(i));
  return std::make_shared<const Vocab>(Vocab::from_tokens(std::move(tokens)));
}

inline std::vector<TokenId> random_pieces(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<TokenId> pick(4, 4 + kWords - 1);
  std::vector<TokenId> out(n);
  for (auto& id : out) id = pick(rng);
  return out;
}

/// Default encoder shape over the synthetic vocabulary.
inline Checkpoint synthetic_checkpoint(ModelTask task, std::size_t labels) {
  CheckpointMeta meta;
  meta.task = task;
  meta.encoder.vocab_size = kWords + 4;
  meta.max_len = 128;
  meta.repository_size = labels;
  if (task != ModelTask::Matcher) meta.filter_head = {static_cast<int>(labels), true, true};
  return init_checkpoint(meta, 1);
}

}  // namespace apirec::bench
