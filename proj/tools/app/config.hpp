// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <apirec/corpus.hpp>
#include <apirec/pipeline.hpp>
#include <apirec/trainer.hpp>

namespace apirec::app {

/// Everything a command needs, read from one JSON file. Relative paths are
/// resolved against the directory holding that file.
struct AppConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path abbreviations;  // optional
  std::filesystem::path lemmas;         // optional
  std::filesystem::path vocab;
  std::filesystem::path work_dir;  // split manifest, logs, reports
  std::filesystem::path filter_api_checkpoint;
  std::filesystem::path filter_category_checkpoint;
  std::filesystem::path matcher_checkpoint;
  std::filesystem::path pretrained_encoder;  // optional archive of published BERT tensors
  int pretrained_heads = 2;
  bool share_encoder = false;  // category filter starts from the trained API filter's encoder

  std::uint64_t seed = 17;
  SplitRatios split_ratios;
  PipelineConfig pipeline;
  std::map<ModelTask, TrainConfig> train;  // one per task, defaults already applied

  std::vector<std::size_t> sweep_h{20, 30, 45, 100, 200, 500};
  std::vector<double> sweep_lambda{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t sweep_n = 5;

  std::string host = "127.0.0.1";
  int port = 8080;

  std::filesystem::path manifest_path() const { return work_dir / "split.json"; }
  std::filesystem::path checkpoint_for(ModelTask task) const;
  /// Sets the seed used for the split and every training task.
  void set_seed(std::uint64_t s);
};

AppConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
AppConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first path that does not exist.
void require_exists(const std::filesystem::path& path, const std::string& what);

}  // namespace apirec::app
