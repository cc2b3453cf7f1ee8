// SPDX-License-Identifier: Apache-2.0
#include "apirec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "apirec/error.hpp"
#include "apirec/io.hpp"

namespace apirec {

namespace {

using nlohmann::json;

std::map<std::string, std::string> load_table(const std::filesystem::path& path) {
  std::map<std::string, std::string> table;
  if (path.empty()) return table;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError(path.string(), lineno, "expected 'token<TAB>replacement'");
    }
    table[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string require_string(const json& rec, const char* key, const std::string& file,
                           std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw ParseError(file, line, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> require_strings(const json& rec, const char* key, const std::string& file,
                                         std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_array()) {
    throw ParseError(file, line, std::string("missing array field '") + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ParseError(file, line, std::string("non-string entry in '") + key + "'");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    if (!rec.is_object()) throw ParseError(path.string(), lineno, "record is not an object");
    fn(rec, lineno);
  }
}

}  // namespace

TextNormalizer::TextNormalizer(std::map<std::string, std::string> abbreviations,
                               std::map<std::string, std::string> lemmas)
    : abbreviations_(std::move(abbreviations)), lemmas_(std::move(lemmas)) {}

TextNormalizer TextNormalizer::from_files(const std::filesystem::path& abbrev_tsv,
                                          const std::filesystem::path& lemma_tsv) {
  return TextNormalizer(load_table(abbrev_tsv), load_table(lemma_tsv));
}

std::string TextNormalizer::operator()(std::string_view raw) const {
  std::string spaced;
  spaced.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    if (is_ascii_punct(c)) {
      spaced.push_back(' ');
      spaced.push_back(static_cast<char>(c));
      spaced.push_back(' ');
    } else if (c < 128 && std::isspace(c)) {
      spaced.push_back(' ');
    } else if (c < 128) {
      spaced.push_back(static_cast<char>(std::tolower(c)));
    } else {
      spaced.push_back(static_cast<char>(c));
    }
  }
  std::string out;
  out.reserve(spaced.size());
  for (auto& tok : split_ws(spaced)) {
    if (auto it = abbreviations_.find(tok); it != abbreviations_.end()) tok = it->second;
    if (auto it = lemmas_.find(tok); it != lemmas_.end()) tok = it->second;
    if (tok.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::string preprocess(std::string_view raw, const TextNormalizer& normalizer) {
  return normalizer(raw);
}

void Corpus::validate(const TextNormalizer& normalizer) const {
  if (apis.empty()) throw IntegrityError("empty API repository");
  const auto L = static_cast<ApiId>(apis.size());
  const auto C = static_cast<CategoryId>(categories.size());
  for (std::size_t i = 0; i < apis.size(); ++i) {
    const auto& a = apis[i];
    if (a.id != static_cast<ApiId>(i)) throw IntegrityError("API ids are not dense: " + a.name);
    if (normalizer(a.description).empty()) {
      throw IntegrityError("API '" + a.name + "' has an empty description");
    }
    for (auto c : a.categories) {
      if (c < 0 || c >= C) throw IntegrityError("API '" + a.name + "' has unknown category");
    }
  }
  for (std::size_t i = 0; i < mashups.size(); ++i) {
    const auto& m = mashups[i];
    if (m.id != static_cast<MashupId>(i)) {
      throw IntegrityError("mashup ids are not dense: " + m.name);
    }
    if (m.called_apis.empty()) throw IntegrityError("mashup '" + m.name + "' calls no API");
    if (normalizer(m.description).empty()) {
      throw IntegrityError("mashup '" + m.name + "' has an empty description");
    }
    for (auto a : m.called_apis) {
      if (a < 0 || a >= L) throw IntegrityError("mashup '" + m.name + "' calls unknown API");
    }
    for (auto c : m.categories) {
      if (c < 0 || c >= C) throw IntegrityError("mashup '" + m.name + "' has unknown category");
    }
  }
}

Corpus load_corpus(const std::filesystem::path& dir, const TextNormalizer& normalizer) {
  Corpus corpus;
  std::unordered_map<std::string, CategoryId> category_ids;
  std::unordered_map<std::string, ApiId> api_ids;

  auto intern = [&](const std::vector<std::string>& names) {
    std::vector<CategoryId> ids;
    for (const auto& n : names) {
      auto [it, inserted] =
          category_ids.emplace(n, static_cast<CategoryId>(corpus.categories.size()));
      if (inserted) corpus.categories.push_back(n);
      if (std::find(ids.begin(), ids.end(), it->second) == ids.end()) ids.push_back(it->second);
    }
    return ids;
  };

  const auto api_path = dir / "apis.jsonl";
  for_each_record(api_path, [&](const json& rec, std::size_t line) {
    WebApi api;
    api.id = static_cast<ApiId>(corpus.apis.size());
    api.name = require_string(rec, "name", api_path.string(), line);
    api.description = require_string(rec, "description", api_path.string(), line);
    api.categories = intern(require_strings(rec, "categories", api_path.string(), line));
    if (normalizer(api.description).empty()) {
      throw ParseError(api_path.string(), line, "empty description");
    }
    if (!api_ids.emplace(api.name, api.id).second) {
      throw IntegrityError(api_path.string() + ":" + std::to_string(line) +
                           ": duplicate API name '" + api.name + "'");
    }
    corpus.apis.push_back(std::move(api));
  });
  if (corpus.apis.empty()) throw IntegrityError("empty API repository in " + api_path.string());

  const auto mashup_path = dir / "mashups.jsonl";
  for_each_record(mashup_path, [&](const json& rec, std::size_t line) {
    Mashup m;
    m.id = static_cast<MashupId>(corpus.mashups.size());
    m.name = require_string(rec, "name", mashup_path.string(), line);
    m.description = require_string(rec, "description", mashup_path.string(), line);
    m.categories = intern(require_strings(rec, "categories", mashup_path.string(), line));
    for (const auto& api_name : require_strings(rec, "called_apis", mashup_path.string(), line)) {
      auto it = api_ids.find(api_name);
      if (it == api_ids.end()) {
        throw IntegrityError(mashup_path.string() + ":" + std::to_string(line) +
                             ": unknown API '" + api_name + "'");
      }
      if (std::find(m.called_apis.begin(), m.called_apis.end(), it->second) ==
          m.called_apis.end()) {
        m.called_apis.push_back(it->second);
      }
    }
    if (m.called_apis.empty()) throw ParseError(mashup_path.string(), line, "no called APIs");
    if (normalizer(m.description).empty()) {
      throw ParseError(mashup_path.string(), line, "empty description");
    }
    corpus.mashups.push_back(std::move(m));
  });

  corpus.validate(normalizer);
  return corpus;
}

SplitManifest split_manifest(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed) {
  const auto& r = ratios.parts;
  if (std::any_of(r.begin(), r.end(), [](int x) { return x < 0; })) {
    throw ConfigError("split ratios must be non-negative");
  }
  const long sum = std::accumulate(r.begin(), r.end(), 0L);
  if (sum <= 0) throw ConfigError("split ratios must sum to a positive value");
  if (corpus.mashups.empty()) throw ConfigError("cannot split an empty corpus");

  std::vector<MashupId> order(corpus.mashups.size());
  std::iota(order.begin(), order.end(), MashupId{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto total = static_cast<long>(order.size());
  const long n_val = total * r[1] / sum;
  const long n_test = total * r[2] / sum;
  const long n_train = total - n_val - n_test;
  const std::array<long, 3> sizes{n_train, n_val, n_test};
  if (total >= sum) {
    for (int i = 0; i < 3; ++i) {
      if (r[i] > 0 && sizes[i] == 0) throw ConfigError("a split with positive ratio is empty");
    }
  }

  SplitManifest m;
  m.seed = seed;
  m.ratios = ratios;
  m.train.assign(order.begin(), order.begin() + n_train);
  m.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  m.test.assign(order.begin() + n_train + n_val, order.end());
  return m;
}

SplitCorpus apply_split(std::shared_ptr<const Corpus> corpus, const SplitManifest& manifest) {
  SplitCorpus out;
  std::unordered_set<MashupId> seen;
  auto take = [&](const std::vector<MashupId>& ids, std::vector<Mashup>& dst) {
    for (auto id : ids) {
      if (id < 0 || id >= static_cast<MashupId>(corpus->mashups.size())) {
        throw IntegrityError("split manifest references unknown mashup " + std::to_string(id));
      }
      if (!seen.insert(id).second) {
        throw IntegrityError("split manifest lists mashup " + std::to_string(id) + " twice");
      }
      dst.push_back(corpus->mashups[static_cast<std::size_t>(id)]);
    }
  };
  take(manifest.train, out.train);
  take(manifest.validation, out.validation);
  take(manifest.test, out.test);
  if (seen.size() != corpus->mashups.size()) {
    throw IntegrityError("split manifest does not cover every mashup");
  }
  out.corpus = std::move(corpus);
  return out;
}

SplitCorpus split(std::shared_ptr<const Corpus> corpus, SplitRatios ratios, std::uint64_t seed) {
  auto manifest = split_manifest(*corpus, ratios, seed);
  return apply_split(std::move(corpus), manifest);
}

void save_manifest(const SplitManifest& m, const std::filesystem::path& path) {
  json j{{"seed", m.seed},
         {"ratios", m.ratios.parts},
         {"train", m.train},
         {"validation", m.validation},
         {"test", m.test}};
  write_file_atomic(path, j.dump(1) + "\n");
}

SplitManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open split manifest " + path.string());
  try {
    json j = json::parse(in);
    SplitManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.ratios.parts = j.at("ratios").get<std::array<int, 3>>();
    m.train = j.at("train").get<std::vector<MashupId>>();
    m.validation = j.at("validation").get<std::vector<MashupId>>();
    m.test = j.at("test").get<std::vector<MashupId>>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

CorpusStats compute_stats(const Corpus& corpus, const TextNormalizer& normalizer) {
  CorpusStats s;
  s.apis = corpus.apis.size();
  s.mashups = corpus.mashups.size();
  s.categories = corpus.categories.size();
  double calls = 0, mashup_cats = 0, api_cats = 0, mashup_words = 0, api_words = 0;
  for (const auto& m : corpus.mashups) {
    calls += static_cast<double>(m.called_apis.size());
    mashup_cats += static_cast<double>(m.categories.size());
    mashup_words += static_cast<double>(split_ws(normalizer(m.description)).size());
  }
  for (const auto& a : corpus.apis) {
    api_cats += static_cast<double>(a.categories.size());
    api_words += static_cast<double>(split_ws(normalizer(a.description)).size());
  }
  if (s.mashups > 0) {
    const auto n = static_cast<double>(s.mashups);
    s.apis_per_mashup = calls / n;
    s.categories_per_mashup = mashup_cats / n;
    s.words_per_mashup = mashup_words / n;
    s.positive_pair_ratio = calls / (n * static_cast<double>(s.apis));
  }
  if (s.apis > 0) {
    s.categories_per_api = api_cats / static_cast<double>(s.apis);
    s.words_per_api = api_words / static_cast<double>(s.apis);
  }
  return s;
}

}  // namespace apirec
