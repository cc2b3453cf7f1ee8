// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "apirec/encoder.hpp"
#include "apirec/filter_head.hpp"
#include "apirec/matcher_head.hpp"

namespace apirec {

/// What a checkpoint was trained for.
enum class ModelTask { FilterApi, FilterCategory, Matcher };

std::string_view to_string(ModelTask task);
ModelTask parse_model_task(std::string_view text);

/// Sidecar metadata: architecture, label-space sizes and provenance.
struct CheckpointMeta {
  ModelTask task = ModelTask::FilterApi;
  EncoderConfig encoder;
  FusionHeadConfig filter_head;  // filter tasks only
  MatchMode match_mode = MatchMode::CrossEncode;  // matcher only
  std::size_t max_len = 256;
  std::uint64_t seed = 0;
  std::size_t repository_size = 0;
  std::size_t category_count = 0;
  int epochs_trained = 0;
  double selection_metric = 0;

  bool is_filter() const { return task != ModelTask::Matcher; }
  bool operator==(const CheckpointMeta&) const = default;
};

/// Named float tensors plus metadata. Immutable once loaded for inference.
struct Checkpoint {
  ParamSet<float> tensors;
  CheckpointMeta meta;

  /// Every expected tensor present with the expected shape, nothing else.
  void validate() const;
};

/// Fresh parameters for `meta` (truncated normal weights, zero biases).
Checkpoint init_checkpoint(const CheckpointMeta& meta, std::uint64_t seed);

/// Archive layout: a first line `APIRECKPT 1`, then a one-line JSON header
/// listing {name, shape, offset} per tensor, then the raw
/// little-endian float32 data, row-major. Metadata goes to `<path>.meta.json`.
/// Both files are written to a temporary name and renamed into place.
void save_tensors(const ParamSet<float>& tensors, const std::filesystem::path& path);
ParamSet<float> load_tensors(const std::filesystem::path& path);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path meta_path(const std::filesystem::path& archive);

/// Renames published BERT tensors (e.g. `bert.encoder.layer.0.attention.self.query.weight`)
/// onto the encoder layout and infers the encoder shape. The head count is not
/// recoverable from tensor shapes and must be given. Unrelated tensors (MLM
/// heads etc.) are dropped.
struct ImportedEncoder {
  EncoderConfig config;
  ParamSet<float> tensors;
};
ImportedEncoder import_bert(const ParamSet<float>& published, int heads = 2);

}  // namespace apirec
