// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace apirec {

using ApiId = std::int64_t;
using MashupId = std::int64_t;
using CategoryId = std::int64_t;

/// Text normalization applied to every description and query.
///
/// Lowercases ASCII, separates ASCII punctuation into standalone tokens and
/// collapses whitespace. Optional tables are applied afterwards as exact-token
/// replacements: abbreviations first, then lemmas.
class TextNormalizer {
 public:
  TextNormalizer() = default;
  TextNormalizer(std::map<std::string, std::string> abbreviations,
                 std::map<std::string, std::string> lemmas);

  /// Loads optional `token TAB replacement` tables. Empty paths are skipped.
  static TextNormalizer from_files(const std::filesystem::path& abbrev_tsv,
                                   const std::filesystem::path& lemma_tsv);

  std::string operator()(std::string_view raw) const;

  const std::map<std::string, std::string>& abbreviations() const { return abbreviations_; }
  const std::map<std::string, std::string>& lemmas() const { return lemmas_; }

 private:
  std::map<std::string, std::string> abbreviations_;
  std::map<std::string, std::string> lemmas_;
};

/// Normalizes `raw` with the given normalizer (empty tables by default).
std::string preprocess(std::string_view raw, const TextNormalizer& normalizer = {});

struct WebApi {
  ApiId id = 0;
  std::string name;
  std::string description;
  std::vector<CategoryId> categories;
};

struct Mashup {
  MashupId id = 0;
  std::string name;
  std::string description;
  std::vector<CategoryId> categories;
  std::vector<ApiId> called_apis;
};

/// The API repository plus labelled mashups. Immutable once loaded.
struct Corpus {
  std::vector<WebApi> apis;
  std::vector<Mashup> mashups;
  std::vector<std::string> categories;  // index = category id

  std::size_t repository_size() const { return apis.size(); }
  std::size_t category_count() const { return categories.size(); }
  /// Throws IntegrityError when an invariant does not hold.
  void validate(const TextNormalizer& normalizer = {}) const;
};

/// Loads `apis.jsonl` and `mashups.jsonl` from `dir`. Ids are assigned densely
/// in file order; categories in order of first appearance (APIs first).
Corpus load_corpus(const std::filesystem::path& dir, const TextNormalizer& normalizer = {});

struct SplitRatios {
  std::array<int, 3> parts{3, 1, 1};  // train, validation, test

  bool operator==(const SplitRatios&) const = default;
};

/// Mashup ids per split; the serialized form of a split.
struct SplitManifest {
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<MashupId> train;
  std::vector<MashupId> validation;
  std::vector<MashupId> test;

  bool operator==(const SplitManifest&) const = default;
};

struct SplitCorpus {
  std::shared_ptr<const Corpus> corpus;  // shared repository
  std::vector<Mashup> train;
  std::vector<Mashup> validation;
  std::vector<Mashup> test;
};

/// Seeded shuffle, then validation and test take floor(total * r / sum(r));
/// training takes the remainder.
SplitManifest split_manifest(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed);
SplitCorpus apply_split(std::shared_ptr<const Corpus> corpus, const SplitManifest& manifest);
SplitCorpus split(std::shared_ptr<const Corpus> corpus, SplitRatios ratios, std::uint64_t seed);

void save_manifest(const SplitManifest& manifest, const std::filesystem::path& path);
SplitManifest load_manifest(const std::filesystem::path& path);

/// Dataset statistics in the layout of a typical dataset summary table.
struct CorpusStats {
  std::size_t apis = 0;
  std::size_t mashups = 0;
  std::size_t categories = 0;
  double apis_per_mashup = 0;
  double categories_per_mashup = 0;
  double categories_per_api = 0;
  double words_per_mashup = 0;
  double words_per_api = 0;
  double positive_pair_ratio = 0;  // sum |called| / (mashups * apis)
};

CorpusStats compute_stats(const Corpus& corpus, const TextNormalizer& normalizer = {});

}  // namespace apirec
