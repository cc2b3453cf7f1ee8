// SPDX-License-Identifier: Apache-2.0
#include "apirec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <regex>
#include <set>

#include <nlohmann/json.hpp>

#include "apirec/io.hpp"

namespace apirec {

namespace {

using json = nlohmann::json;

constexpr std::string_view kMagic = "APIRECKPT 1";

std::uint32_t to_le(std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  return ((x & 0xffu) << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
}

json encoder_to_json(const EncoderConfig& c) {
  return {{"layers", c.layers},
          {"hidden", c.hidden},
          {"heads", c.heads},
          {"intermediate", c.intermediate},
          {"max_positions", c.max_positions},
          {"vocab_size", c.vocab_size},
          {"type_vocab", c.type_vocab},
          {"dropout", c.dropout}};
}

EncoderConfig encoder_from_json(const json& j) {
  EncoderConfig c;
  c.layers = j.at("layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.heads = j.at("heads").get<int>();
  c.intermediate = j.at("intermediate").get<int>();
  c.max_positions = j.at("max_positions").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.type_vocab = j.at("type_vocab").get<int>();
  c.dropout = j.at("dropout").get<float>();
  return c;
}

std::vector<std::pair<std::string, std::vector<std::int64_t>>> expected_shapes(
    const CheckpointMeta& meta) {
  auto shapes = encoder_tensor_shapes(meta.encoder);
  auto head = meta.is_filter() ? fusion_head_shapes(meta.filter_head, meta.encoder.hidden)
                               : match_head_shapes(meta.encoder.hidden);
  shapes.insert(shapes.end(), head.begin(), head.end());
  return shapes;
}

std::string shape_string(const std::vector<std::int64_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

}  // namespace

std::string_view to_string(ModelTask task) {
  switch (task) {
    case ModelTask::FilterApi: return "filter-api";
    case ModelTask::FilterCategory: return "filter-category";
    case ModelTask::Matcher: return "matcher";
  }
  return "unknown";
}

ModelTask parse_model_task(std::string_view text) {
  if (text == "filter-api") return ModelTask::FilterApi;
  if (text == "filter-category") return ModelTask::FilterCategory;
  if (text == "matcher") return ModelTask::Matcher;
  throw ConfigError("unknown task '" + std::string(text) +
                    "' (expected filter-api, filter-category or matcher)");
}

void Checkpoint::validate() const {
  meta.encoder.validate();
  if (meta.is_filter()) meta.filter_head.validate();
  const auto shapes = expected_shapes(meta);
  if (shapes.size() != tensors.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, expected " +
                     std::to_string(shapes.size()));
  }
  for (const auto& [name, shape] : shapes) {
    const auto& t = require(tensors, name);
    if (t.shape != shape) {
      throw ShapeError("tensor '" + name + "' has shape " + shape_string(t.shape) + ", expected " +
                       shape_string(shape));
    }
  }
}

Checkpoint init_checkpoint(const CheckpointMeta& meta, std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.meta = meta;
  ckpt.meta.seed = seed;
  std::mt19937_64 rng(seed);
  init_encoder(meta.encoder, ckpt.tensors, rng);
  if (meta.is_filter()) {
    init_fusion_head(meta.filter_head, meta.encoder.hidden, ckpt.tensors, rng);
  } else {
    init_match_head(meta.encoder.hidden, ckpt.tensors, rng);
  }
  ckpt.validate();
  return ckpt;
}

std::filesystem::path meta_path(const std::filesystem::path& archive) {
  return archive.string() + ".meta.json";
}

void save_tensors(const ParamSet<float>& tensors, const std::filesystem::path& path) {
  json header;
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    if (BasicTensor<float>::numel_of(t.shape) != t.numel()) {
      throw ShapeError("tensor '" + name + "' shape disagrees with its data");
    }
    header["tensors"].push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(t.numel()) * 4;
  }
  header["data_bytes"] = offset;
  header["dtype"] = "f32le";

  std::string bytes;
  bytes.append(kMagic).push_back('\n');
  bytes.append(header.dump()).push_back('\n');
  const std::size_t data_start = bytes.size();
  bytes.resize(data_start + offset);
  char* out = bytes.data() + data_start;
  for (const auto& [name, t] : tensors) {
    for (float x : t.values) {
      const std::uint32_t le = to_le(std::bit_cast<std::uint32_t>(x));
      std::memcpy(out, &le, 4);
      out += 4;
    }
  }
  write_file_atomic(path, bytes);
}

ParamSet<float> load_tensors(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto file = path.string();
  const auto nl1 = bytes.find('\n');
  if (nl1 == std::string::npos || std::string_view(bytes).substr(0, nl1) != kMagic) {
    throw ParseError(file, 1, "not a checkpoint archive");
  }
  const auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string::npos) throw ParseError(file, 2, "truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
  } catch (const json::exception& e) {
    throw ParseError(file, 2, e.what());
  }
  const std::size_t data_start = nl2 + 1;
  const std::string_view data(bytes.data() + data_start, bytes.size() - data_start);

  ParamSet<float> out;
  try {
    if (header.value("dtype", "f32le") != "f32le") throw ParseError(file, 2, "unsupported dtype");
    if (header.at("data_bytes").get<std::uint64_t>() != data.size()) {
      throw ParseError(file, 2, "data section size disagrees with the header");
    }
    for (const auto& entry : header.at("tensors")) {
      auto name = entry.at("name").get<std::string>();
      Tensor t(entry.at("shape").get<std::vector<std::int64_t>>());
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto n = static_cast<std::uint64_t>(t.numel()) * 4;
      if (offset + n > data.size()) throw ParseError(file, 2, "tensor '" + name + "' out of range");
      const char* in = data.data() + offset;
      for (auto& x : t.values) {
        std::uint32_t le;
        std::memcpy(&le, in, 4);
        x = std::bit_cast<float>(to_le(le));
        in += 4;
      }
      if (!out.emplace(name, std::move(t)).second) {
        throw ParseError(file, 2, "duplicate tensor '" + name + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(file, 2, e.what());
  }
  return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  ckpt.validate();
  const auto& m = ckpt.meta;
  json j{{"task", to_string(m.task)},
         {"encoder", encoder_to_json(m.encoder)},
         {"max_len", m.max_len},
         {"seed", m.seed},
         {"repository_size", m.repository_size},
         {"category_count", m.category_count},
         {"epochs_trained", m.epochs_trained},
         {"selection_metric", m.selection_metric}};
  if (m.is_filter()) {
    j["filter_head"] = {{"labels", m.filter_head.labels},
                        {"use_pooler", m.filter_head.use_pooler},
                        {"use_mean", m.filter_head.use_mean}};
  } else {
    j["match_mode"] = to_string(m.match_mode);
  }
  save_tensors(ckpt.tensors, path);
  write_file_atomic(meta_path(path), j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ckpt;
  const auto mpath = meta_path(path);
  try {
    const json j = json::parse(read_file(mpath));
    auto& m = ckpt.meta;
    m.task = parse_model_task(j.at("task").get<std::string>());
    m.encoder = encoder_from_json(j.at("encoder"));
    m.max_len = j.at("max_len").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.repository_size = j.at("repository_size").get<std::size_t>();
    m.category_count = j.at("category_count").get<std::size_t>();
    m.epochs_trained = j.value("epochs_trained", 0);
    m.selection_metric = j.value("selection_metric", 0.0);
    if (m.is_filter()) {
      const auto& h = j.at("filter_head");
      m.filter_head.labels = h.at("labels").get<std::int64_t>();
      m.filter_head.use_pooler = h.at("use_pooler").get<bool>();
      m.filter_head.use_mean = h.at("use_mean").get<bool>();
    } else {
      m.match_mode = parse_match_mode(j.at("match_mode").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ParseError(mpath.string(), 1, e.what());
  }
  ckpt.tensors = load_tensors(path);
  ckpt.validate();
  return ckpt;
}

ImportedEncoder import_bert(const ParamSet<float>& published, int heads) {
  static const std::vector<std::pair<std::regex, std::string>> rules = {
      {std::regex(R"(embeddings\.word_embeddings\.weight)"), "embeddings.word.weight"},
      {std::regex(R"(embeddings\.position_embeddings\.weight)"), "embeddings.position.weight"},
      {std::regex(R"(embeddings\.token_type_embeddings\.weight)"), "embeddings.segment.weight"},
      {std::regex(R"(embeddings\.LayerNorm\.(weight|gamma))"), "embeddings.norm.gamma"},
      {std::regex(R"(embeddings\.LayerNorm\.(bias|beta))"), "embeddings.norm.beta"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.self\.(query|key|value)\.(weight|bias))"),
       "layer.$1.attention.$2.$3"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.output\.dense\.(weight|bias))"),
       "layer.$1.attention.output.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.output\.LayerNorm\.(weight|gamma))"),
       "layer.$1.attention.norm.gamma"},
      {std::regex(R"(encoder\.layer\.(\d+)\.attention\.output\.LayerNorm\.(bias|beta))"),
       "layer.$1.attention.norm.beta"},
      {std::regex(R"(encoder\.layer\.(\d+)\.intermediate\.dense\.(weight|bias))"),
       "layer.$1.ffn.inner.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.output\.dense\.(weight|bias))"),
       "layer.$1.ffn.outer.$2"},
      {std::regex(R"(encoder\.layer\.(\d+)\.output\.LayerNorm\.(weight|gamma))"),
       "layer.$1.ffn.norm.gamma"},
      {std::regex(R"(encoder\.layer\.(\d+)\.output\.LayerNorm\.(bias|beta))"),
       "layer.$1.ffn.norm.beta"},
      {std::regex(R"(pooler\.dense\.(weight|bias))"), "pooler.$1"},
  };

  ImportedEncoder out;
  std::set<int> layers;
  for (const auto& [name, t] : published) {
    std::string_view key = name;
    if (key.starts_with("bert.")) key.remove_prefix(5);
    const std::string k(key);
    for (const auto& [re, fmt] : rules) {
      std::smatch m;
      if (!std::regex_match(k, m, re)) continue;
      const auto target = "encoder." + m.format(fmt);
      if (k.starts_with("encoder.layer.")) layers.insert(std::stoi(m[1].str()));
      if (!out.tensors.emplace(target, t).second) {
        throw ShapeError("two published tensors map onto '" + target + "'");
      }
      break;
    }
  }

  auto& c = out.config;
  const auto& word = require(out.tensors, "encoder.embeddings.word.weight");
  c.vocab_size = static_cast<int>(word.rows());
  c.hidden = static_cast<int>(word.cols());
  c.max_positions = static_cast<int>(require(out.tensors, "encoder.embeddings.position.weight").rows());
  c.type_vocab = static_cast<int>(require(out.tensors, "encoder.embeddings.segment.weight").rows());
  c.layers = static_cast<int>(layers.size());
  if (c.layers == 0 || *layers.rbegin() != c.layers - 1) {
    throw ShapeError("published encoder layers are missing or not numbered densely");
  }
  c.intermediate = static_cast<int>(require(out.tensors, "encoder.layer.0.ffn.inner.weight").rows());
  c.heads = heads;
  c.validate();

  for (const auto& [name, shape] : encoder_tensor_shapes(c)) {
    const auto& t = require(out.tensors, name);
    if (t.shape != shape) {
      throw ShapeError("published tensor for '" + name + "' has shape " + shape_string(t.shape));
    }
  }
  return out;
}

}  // namespace apirec
