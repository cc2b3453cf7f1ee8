// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <apirec/checkpoint.hpp>
#include <apirec/corpus.hpp>
#include <apirec/model.hpp>
#include <apirec/tokenizer.hpp>

namespace apirec::testing {

inline std::filesystem::path data_dir() { return APIREC_TEST_DATA; }
inline std::filesystem::path fixture_dir() { return data_dir() / "fixtures"; }

inline TextNormalizer fixture_normalizer() {
  return TextNormalizer::from_files(fixture_dir() / "corpus/abbrev.tsv",
                                    fixture_dir() / "corpus/lemma.tsv");
}

inline std::shared_ptr<const Vocab> fixture_vocab() {
  return std::make_shared<const Vocab>(Vocab::load(fixture_dir() / "vocab.txt"));
}

inline std::shared_ptr<const Corpus> fixture_corpus() {
  return std::make_shared<const Corpus>(
      load_corpus(fixture_dir() / "corpus", fixture_normalizer()));
}

inline TextEncoder fixture_text() { return {fixture_vocab(), fixture_normalizer()}; }

/// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("apirec-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Small encoder used where the default shape would only cost time.
inline EncoderConfig tiny_encoder(int vocab_size, int hidden = 16, int layers = 1, int heads = 2) {
  EncoderConfig c;
  c.layers = layers;
  c.hidden = hidden;
  c.heads = heads;
  c.intermediate = 2 * hidden;
  c.max_positions = 64;
  c.vocab_size = vocab_size;
  return c;
}

/// Seeded checkpoint sized for the fixture corpus and vocabulary, with extra
/// noise so scores are spread out instead of sitting near 0.5.
inline std::shared_ptr<const Checkpoint> random_checkpoint(ModelTask task, std::uint64_t seed,
                                                           float spread = 0.3f,
                                                           MatchMode mode = MatchMode::CrossEncode) {
  const auto corpus = fixture_corpus();
  CheckpointMeta meta;
  meta.task = task;
  meta.encoder = tiny_encoder(static_cast<int>(fixture_vocab()->size()));
  meta.max_len = 64;
  meta.repository_size = corpus->repository_size();
  meta.category_count = corpus->category_count();
  if (task == ModelTask::FilterApi) meta.filter_head = {static_cast<int>(corpus->repository_size()), true, true};
  if (task == ModelTask::FilterCategory) meta.filter_head = {static_cast<int>(corpus->category_count()), true, true};
  meta.match_mode = mode;
  auto ckpt = init_checkpoint(meta, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<float> noise(0.0f, spread);
  for (auto& [name, t] : ckpt.tensors) {
    for (auto& x : t.values) x += noise(rng);
  }
  return std::make_shared<const Checkpoint>(std::move(ckpt));
}

}  // namespace apirec::testing
