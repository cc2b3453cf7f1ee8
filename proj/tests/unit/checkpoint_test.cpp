// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <regex>

#include <gtest/gtest.h>

#include <apirec/checkpoint.hpp>
#include <apirec/io.hpp>
#include <apirec/model.hpp>

#include "support.hpp"

namespace apirec {
namespace {

using testing::TempDir;

CheckpointMeta filter_meta(int vocab = 30) {
  CheckpointMeta m;
  m.task = ModelTask::FilterApi;
  m.encoder = testing::tiny_encoder(vocab);
  m.filter_head = {20, true, false};
  m.max_len = 32;
  m.repository_size = 20;
  m.category_count = 16;
  m.epochs_trained = 4;
  m.selection_metric = 0.625;
  return m;
}

TEST(Checkpoint, RoundTrip) {
  TempDir dir;
  for (auto task : {ModelTask::FilterApi, ModelTask::FilterCategory, ModelTask::Matcher}) {
    auto meta = filter_meta();
    meta.task = task;
    if (task == ModelTask::FilterCategory) meta.filter_head.labels = 16;
    if (task == ModelTask::Matcher) {
      meta.match_mode = MatchMode::BiEncodeConcat;
      meta.filter_head = {};  // not stored for matchers
    }
    const auto ckpt = init_checkpoint(meta, 9);
    const auto path = dir.path() / (std::string(to_string(task)) + ".ckpt");
    save_checkpoint(ckpt, path);
    EXPECT_TRUE(std::filesystem::exists(meta_path(path)));
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.meta, ckpt.meta);
    EXPECT_EQ(back.tensors, ckpt.tensors);
  }
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  }
}

TEST(Checkpoint, InitIsSeeded) {
  EXPECT_EQ(init_checkpoint(filter_meta(), 3).tensors, init_checkpoint(filter_meta(), 3).tensors);
  EXPECT_NE(init_checkpoint(filter_meta(), 3).tensors, init_checkpoint(filter_meta(), 4).tensors);
}

TEST(Checkpoint, ArchiveLayout) {
  TempDir dir;
  ParamSet<float> t;
  t.emplace("a", Tensor({2}));
  t.at("a").values = {1.0f, -2.5f};
  t.emplace("b", Tensor({1, 1}));
  t.at("b").values = {0.5f};
  save_tensors(t, dir.path() / "x.ckpt");
  const auto bytes = read_file(dir.path() / "x.ckpt");
  EXPECT_EQ(bytes.substr(0, 12), "APIRECKPT 1\n");
  const auto nl = bytes.find('\n', 12);
  const auto header = bytes.substr(12, nl - 12);
  EXPECT_NE(header.find(R"("offset":8)"), std::string::npos);
  EXPECT_NE(header.find(R"("data_bytes":12)"), std::string::npos);
  ASSERT_EQ(bytes.size() - nl - 1, 12u);
  const unsigned char one_le[4] = {0x00, 0x00, 0x80, 0x3f};  // 1.0f
  EXPECT_EQ(bytes.compare(nl + 1, 4, reinterpret_cast<const char*>(one_le), 4), 0);
  EXPECT_EQ(load_tensors(dir.path() / "x.ckpt"), t);
}

TEST(Checkpoint, RejectsCorruptArchives) {
  TempDir dir;
  const auto ckpt = init_checkpoint(filter_meta(), 1);
  const auto path = dir.path() / "f.ckpt";
  save_checkpoint(ckpt, path);
  const auto good = read_file(path);

  write_file_atomic(path, "NOTACKPT 1\n{}\n");
  EXPECT_THROW(load_tensors(path), ParseError);
  write_file_atomic(path, good.substr(0, good.size() - 8));
  EXPECT_THROW(load_tensors(path), ParseError);
  write_file_atomic(path, "APIRECKPT 1\n{\"tensors\":[\n");
  EXPECT_THROW(load_tensors(path), ParseError);
  EXPECT_THROW(load_tensors(dir.path() / "missing.ckpt"), ConfigError);
}

TEST(Checkpoint, ValidateCatchesShapeDrift) {
  auto ckpt = init_checkpoint(filter_meta(), 1);
  EXPECT_NO_THROW(ckpt.validate());
  ckpt.tensors.at("filter.fusion.bias") = Tensor({19});
  EXPECT_THROW(ckpt.validate(), ShapeError);
  ckpt = init_checkpoint(filter_meta(), 1);
  ckpt.tensors.emplace("extra", Tensor({1}));
  EXPECT_THROW(ckpt.validate(), ShapeError);
  ckpt = init_checkpoint(filter_meta(), 1);
  ckpt.tensors.erase("encoder.pooler.bias");
  EXPECT_THROW(ckpt.validate(), ShapeError);
}

TEST(Checkpoint, EveryHeadSymbolOnce) {
  const auto f = init_checkpoint(filter_meta(), 1);
  for (auto name : {"filter.pooler_proj.weight", "filter.pooler_proj.bias", "filter.mean_proj.weight",
                    "filter.mean_proj.bias", "filter.fusion.weight", "filter.fusion.bias"}) {
    EXPECT_EQ(f.tensors.count(name), 1u) << name;
  }
  auto meta = filter_meta();
  meta.task = ModelTask::Matcher;
  const auto m = init_checkpoint(meta, 1);
  EXPECT_EQ(m.tensors.count("matcher.task.weight"), 1u);
  EXPECT_EQ(m.tensors.count("matcher.task.bias"), 1u);
  EXPECT_EQ(m.tensors.count("filter.fusion.weight"), 0u);
}

// Published names for our tensors, the reverse of the import mapping.
ParamSet<float> as_published(const ParamSet<float>& ours, bool prefixed, bool old_norm_names) {
  const std::vector<std::pair<std::regex, std::string>> rules = {
      {std::regex(R"(encoder\.embeddings\.word\.weight)"), "embeddings.word_embeddings.weight"},
      {std::regex(R"(encoder\.embeddings\.position\.weight)"), "embeddings.position_embeddings.weight"},
      {std::regex(R"(encoder\.embeddings\.segment\.weight)"), "embeddings.token_type_embeddings.weight"},
      {std::regex(R"(encoder\.embeddings\.norm\.(gamma|beta))"), "embeddings.LayerNorm.$1"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.(query|key|value)\.(weight|bias))"),
       "encoder.layer.$1.attention.self.$2.$3"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.output\.(weight|bias))"),
       "encoder.layer.$1.attention.output.dense.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.norm\.(gamma|beta))"),
       "encoder.layer.$1.attention.output.LayerNorm.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.ffn\.inner\.(weight|bias))"),
       "encoder.layer.$1.intermediate.dense.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.ffn\.outer\.(weight|bias))"), "encoder.layer.$1.output.dense.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.ffn\.norm\.(gamma|beta))"),
       "encoder.layer.$1.output.LayerNorm.$2"},
      {std::regex(R"(encoder\.pooler\.(weight|bias))"), "pooler.dense.$1"},
  };
  ParamSet<float> out;
  for (const auto& [name, t] : ours) {
    for (const auto& [re, fmt] : rules) {
      if (!std::regex_match(name, re)) continue;
      auto published = std::regex_replace(name, re, fmt);
      if (!old_norm_names) {
        published = std::regex_replace(published, std::regex(R"(LayerNorm\.gamma)"), "LayerNorm.weight");
        published = std::regex_replace(published, std::regex(R"(LayerNorm\.beta)"), "LayerNorm.bias");
      }
      out.emplace((prefixed ? "bert." : "") + published, t);
    }
  }
  return out;
}

TEST(ImportBert, MapsPublishedNames) {
  EncoderConfig c = testing::tiny_encoder(30, 16, 2, 4);
  c.intermediate = 40;
  c.max_positions = 24;
  ParamSet<float> ours;
  std::mt19937_64 rng(1);
  init_encoder(c, ours, rng);
  for (bool prefixed : {true, false}) {
    for (bool old_names : {true, false}) {
      auto published = as_published(ours, prefixed, old_names);
      ASSERT_EQ(published.size(), ours.size());
      published.emplace("cls.predictions.bias", Tensor({30}));
      const auto imported = import_bert(published, 4);
      EXPECT_EQ(imported.tensors, ours);
      EXPECT_EQ(imported.config.layers, 2);
      EXPECT_EQ(imported.config.hidden, 16);
      EXPECT_EQ(imported.config.heads, 4);
      EXPECT_EQ(imported.config.intermediate, 40);
      EXPECT_EQ(imported.config.max_positions, 24);
      EXPECT_EQ(imported.config.vocab_size, 30);
    }
  }
}

TEST(ImportBert, RejectsBrokenInputs) {
  const auto c = testing::tiny_encoder(30, 16, 2, 2);
  ParamSet<float> ours;
  std::mt19937_64 rng(1);
  init_encoder(c, ours, rng);
  auto published = as_published(ours, true, false);
  published.erase("bert.encoder.layer.1.output.dense.weight");
  EXPECT_THROW(import_bert(published, 2), ShapeError);
  published = as_published(ours, true, false);
  published.at("bert.pooler.dense.bias") = Tensor({15});
  EXPECT_THROW(import_bert(published, 2), ShapeError);
  EXPECT_THROW(import_bert(as_published(ours, true, false), 3), ConfigError);
  EXPECT_THROW(import_bert({}, 2), ShapeError);
}

TEST(Models, CompatibilityChecks) {
  const auto vocab = testing::fixture_vocab();
  const auto corpus = testing::fixture_corpus();
  auto meta = filter_meta(static_cast<int>(vocab->size()));
  auto good = std::make_shared<const Checkpoint>(init_checkpoint(meta, 1));
  FilterModel f(good, vocab);
  EXPECT_NO_THROW(f.check_compatible(*corpus));
  EXPECT_EQ(f.label_space(), LabelSpace::Repository);

  meta.filter_head.labels = 19;
  meta.repository_size = 19;
  FilterModel wrong(std::make_shared<const Checkpoint>(init_checkpoint(meta, 1)), vocab);
  EXPECT_THROW(wrong.check_compatible(*corpus), CompatibilityError);

  EXPECT_THROW(FilterModel(std::make_shared<const Checkpoint>(init_checkpoint(filter_meta(30), 1)), vocab),
               CompatibilityError);
  meta = filter_meta(static_cast<int>(vocab->size()));
  meta.task = ModelTask::Matcher;
  auto matcher = std::make_shared<const Checkpoint>(init_checkpoint(meta, 1));
  EXPECT_THROW(FilterModel(matcher, vocab), CompatibilityError);
  EXPECT_THROW(MatcherModel(good, vocab), CompatibilityError);
}

TEST(ModelTask, Names) {
  for (auto t : {ModelTask::FilterApi, ModelTask::FilterCategory, ModelTask::Matcher}) {
    EXPECT_EQ(parse_model_task(to_string(t)), t);
  }
  EXPECT_THROW(parse_model_task("filter"), ConfigError);
}

}  // namespace
}  // namespace apirec
