// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include <apirec/io.hpp>

namespace apirec::app {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto p = std::filesystem::path(j.at(key).get<std::string>());
  if (p.empty()) return {};
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_encoder(const json& j, EncoderConfig& e) {
  reject_unknown(j, {"layers", "hidden", "heads", "intermediate", "max_positions", "dropout"},
                 "train encoder");
  read(j, "layers", e.layers);
  read(j, "hidden", e.hidden);
  read(j, "heads", e.heads);
  read(j, "intermediate", e.intermediate);
  read(j, "max_positions", e.max_positions);
  read(j, "dropout", e.dropout);
}

void apply_train(const json& j, TrainConfig& c, const std::string& where) {
  reject_unknown(j,
                 {"epochs", "phase_boundary", "lr_high", "lr_low", "batch_size", "negatives",
                  "patience", "selection_n", "max_len", "use_pooler", "use_mean", "match_mode",
                  "validation_h", "encoder"},
                 where);
  read(j, "epochs", c.epochs);
  read(j, "phase_boundary", c.phase_boundary);
  read(j, "lr_high", c.lr_high);
  read(j, "lr_low", c.lr_low);
  read(j, "batch_size", c.batch_size);
  read(j, "negatives", c.negatives);
  read(j, "patience", c.patience);
  read(j, "selection_n", c.selection_n);
  read(j, "max_len", c.max_len);
  read(j, "use_pooler", c.use_pooler);
  read(j, "use_mean", c.use_mean);
  read(j, "validation_h", c.validation_h);
  if (j.contains("match_mode")) c.match_mode = parse_match_mode(j.at("match_mode").get<std::string>());
  if (j.contains("encoder")) apply_encoder(j.at("encoder"), c.encoder);
}

}  // namespace

std::filesystem::path AppConfig::checkpoint_for(ModelTask task) const {
  switch (task) {
    case ModelTask::FilterApi: return filter_api_checkpoint;
    case ModelTask::FilterCategory: return filter_category_checkpoint;
    case ModelTask::Matcher: return matcher_checkpoint;
  }
  return {};
}

void AppConfig::set_seed(std::uint64_t s) {
  seed = s;
  for (auto& [task, c] : train) c.seed = s;
}

AppConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  AppConfig c;
  for (auto task : {ModelTask::FilterApi, ModelTask::FilterCategory, ModelTask::Matcher}) {
    c.train.emplace(task, TrainConfig::defaults(task));
  }
  try {
    const json j = json::parse(json_text);
    reject_unknown(j,
                   {"corpus_dir", "abbreviations", "lemmas", "vocab", "work_dir", "checkpoints",
                    "pretrained_encoder", "pretrained_heads", "share_encoder", "seed", "split", "pipeline", "train",
                    "sweep", "service"},
                   "config");
    c.corpus_dir = resolve(base_dir, j, "corpus_dir");
    c.abbreviations = resolve(base_dir, j, "abbreviations");
    c.lemmas = resolve(base_dir, j, "lemmas");
    c.vocab = resolve(base_dir, j, "vocab");
    c.work_dir = resolve(base_dir, j, "work_dir");
    if (c.work_dir.empty()) c.work_dir = base_dir;
    c.pretrained_encoder = resolve(base_dir, j, "pretrained_encoder");
    read(j, "pretrained_heads", c.pretrained_heads);
    read(j, "share_encoder", c.share_encoder);
    if (c.corpus_dir.empty()) throw ConfigError("config lacks corpus_dir");
    if (c.vocab.empty()) throw ConfigError("config lacks vocab");

    const json ck = j.value("checkpoints", json::object());
    reject_unknown(ck, {"filter_api", "filter_category", "matcher"}, "checkpoints");
    c.filter_api_checkpoint = resolve(base_dir, ck, "filter_api");
    c.filter_category_checkpoint = resolve(base_dir, ck, "filter_category");
    c.matcher_checkpoint = resolve(base_dir, ck, "matcher");
    if (c.filter_api_checkpoint.empty()) c.filter_api_checkpoint = c.work_dir / "filter_api.ckpt";
    if (c.filter_category_checkpoint.empty()) {
      c.filter_category_checkpoint = c.work_dir / "filter_category.ckpt";
    }
    if (c.matcher_checkpoint.empty()) c.matcher_checkpoint = c.work_dir / "matcher.ckpt";

    const json split = j.value("split", json::object());
    reject_unknown(split, {"ratios"}, "split");
    read(split, "ratios", c.split_ratios.parts);

    const json pipe = j.value("pipeline", json::object());
    reject_unknown(pipe, {"h", "lambda", "top_n", "mode"}, "pipeline");
    read(pipe, "h", c.pipeline.h);
    read(pipe, "lambda", c.pipeline.lambda);
    read(pipe, "top_n", c.pipeline.top_n);
    if (pipe.contains("mode")) c.pipeline.mode = parse_pipeline_mode(pipe.at("mode").get<std::string>());

    const json train = j.value("train", json::object());
    reject_unknown(train, {"common", "filter-api", "filter-category", "matcher"}, "train");
    for (auto& [task, tc] : c.train) {
      if (train.contains("common")) apply_train(train.at("common"), tc, "train.common");
      const std::string name(to_string(task));
      if (train.contains(name)) apply_train(train.at(name), tc, "train." + name);
    }

    const json sw = j.value("sweep", json::object());
    reject_unknown(sw, {"h", "lambda", "n"}, "sweep");
    read(sw, "h", c.sweep_h);
    read(sw, "lambda", c.sweep_lambda);
    read(sw, "n", c.sweep_n);

    const json svc = j.value("service", json::object());
    reject_unknown(svc, {"host", "port"}, "service");
    read(svc, "host", c.host);
    read(svc, "port", c.port);

    std::uint64_t seed = c.seed;
    read(j, "seed", seed);
    c.set_seed(seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  require_exists(path, "config file");
  return parse_config(read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

void require_exists(const std::filesystem::path& path, const std::string& what) {
  if (path.empty() || !std::filesystem::exists(path)) {
    throw ConfigError(what + " not found: " + (path.empty() ? "<unset>" : path.string()));
  }
}

}  // namespace apirec::app
