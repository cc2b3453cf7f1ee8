// SPDX-License-Identifier: Apache-2.0
#include "app.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <apirec/checkpoint.hpp>
#include <apirec/io.hpp>
#include <apirec/log.hpp>

#include "service.hpp"

namespace apirec::app {

namespace {

using json = nlohmann::json;

std::span<const Mashup> pick_split(const SplitCorpus& split, std::string_view name) {
  if (name == "train") return split.train;
  if (name == "validation") return split.validation;
  if (name == "test") return split.test;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::shared_ptr<const Checkpoint> load_shared(const std::filesystem::path& path,
                                              const std::string& what) {
  require_exists(path, what + " checkpoint");
  return std::make_shared<const Checkpoint>(load_checkpoint(path));
}

}  // namespace

Workspace open_workspace(const AppConfig& config) {
  require_exists(config.corpus_dir / "apis.jsonl", "API file");
  require_exists(config.corpus_dir / "mashups.jsonl", "mashup file");
  require_exists(config.vocab, "vocabulary");
  if (!config.abbreviations.empty()) require_exists(config.abbreviations, "abbreviation table");
  if (!config.lemmas.empty()) require_exists(config.lemmas, "lemma table");

  Workspace ws;
  ws.text.normalizer = TextNormalizer::from_files(config.abbreviations, config.lemmas);
  ws.text.vocab = std::make_shared<const Vocab>(Vocab::load(config.vocab));
  ws.corpus = std::make_shared<const Corpus>(load_corpus(config.corpus_dir, ws.text.normalizer));
  return ws;
}

SplitCorpus load_split(const AppConfig& config, const Workspace& ws) {
  require_exists(config.manifest_path(), "split manifest (run ingest first)");
  return apply_split(ws.corpus, load_manifest(config.manifest_path()));
}

std::shared_ptr<const Recommender> load_recommender(const AppConfig& config, const Workspace& ws) {
  auto filter = load_shared(config.filter_api_checkpoint, "filter-api");
  std::shared_ptr<const Checkpoint> matcher;
  if (config.pipeline.mode != PipelineMode::FilterOnly ||
      std::filesystem::exists(config.matcher_checkpoint)) {
    matcher = load_shared(config.matcher_checkpoint, "matcher");
  }
  return std::make_shared<const Recommender>(ws.corpus, ws.text, filter, matcher);
}

std::string format_stats(const CorpusStats& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "APIs\t%zu\nMashups\t%zu\nCategories\t%zu\nAPIs per mashup\t%.3f\n"
                "Categories per mashup\t%.3f\nCategories per API\t%.3f\n"
                "Words per mashup description\t%.3f\nWords per API description\t%.3f\n"
                "Positive pair ratio\t%.5f\n",
                s.apis, s.mashups, s.categories, s.apis_per_mashup, s.categories_per_mashup,
                s.categories_per_api, s.words_per_mashup, s.words_per_api, s.positive_pair_ratio);
  return buf;
}

std::string recommendation_json(const Recommendation& rec, const Corpus& corpus,
                                bool with_latency) {
  json items = json::array();
  for (const auto& item : rec.items) {
    items.push_back({{"api_name", corpus.apis.at(static_cast<std::size_t>(item.api_id)).name},
                     {"api_id", item.api_id},
                     {"score", item.score},
                     {"filter_score", item.filter_score},
                     {"matcher_score", item.matcher_score ? json(*item.matcher_score) : json()}});
  }
  json j{{"query", rec.query}, {"recommendations", std::move(items)}};
  if (with_latency) j["latency_ms"] = rec.filter_ms + rec.matcher_ms;
  return j.dump();
}

CorpusStats cmd_ingest(const AppConfig& config, std::ostream& out) {
  const auto ws = open_workspace(config);
  const auto stats = compute_stats(*ws.corpus, ws.text.normalizer);
  const auto manifest = split_manifest(*ws.corpus, config.split_ratios, config.seed);
  std::filesystem::create_directories(config.work_dir);
  save_manifest(manifest, config.manifest_path());
  write_file_atomic(config.work_dir / "stats.tsv", format_stats(stats));
  out << format_stats(stats);
  out << "split\ttrain " << manifest.train.size() << ", validation " << manifest.validation.size()
      << ", test " << manifest.test.size() << " (seed " << manifest.seed << ")\n";
  out << "manifest\t" << config.manifest_path().string() << '\n';
  return stats;
}

std::filesystem::path cmd_train(const AppConfig& config, ModelTask task, std::ostream& out) {
  const auto ws = open_workspace(config);
  const auto split = load_split(config, ws);
  TrainConfig tc = config.train.at(task);

  std::optional<ParamSet<float>> pretrained;
  if (task == ModelTask::FilterCategory && config.share_encoder) {
    const auto api = load_shared(config.filter_api_checkpoint, "filter-api");
    pretrained.emplace();
    for (const auto& [name, t] : api->tensors) {
      if (name.starts_with("encoder.")) pretrained->emplace(name, t);
    }
    const float dropout = tc.encoder.dropout;
    tc.encoder = api->meta.encoder;
    tc.encoder.dropout = dropout;
  } else if (!config.pretrained_encoder.empty()) {
    require_exists(config.pretrained_encoder, "pretrained encoder");
    auto imported = import_bert(load_tensors(config.pretrained_encoder), config.pretrained_heads);
    imported.config.dropout = tc.encoder.dropout;
    tc.encoder = imported.config;
    pretrained = std::move(imported.tensors);
  }
  const ParamSet<float>* init = pretrained ? &*pretrained : nullptr;
  auto progress = [&out](const EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %d  lr %g  loss %.6f  val NDCG@%zu %.4f\n", e.epoch, e.lr,
                  e.train_loss, e.validation.n, e.validation.ndcg);
    out << buf << std::flush;
  };

  TrainResult result;
  if (task == ModelTask::Matcher) {
    auto filter = load_shared(config.filter_api_checkpoint, "filter-api");
    result = train_matcher(split, ws.text, tc, filter, init, progress);
  } else {
    result = train_filter(split, ws.text, tc, init, progress);
  }
  const auto path = config.checkpoint_for(task);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_checkpoint(result.best, path);
  write_file_atomic(path.string() + ".log.tsv", result.log_tsv());
  out << "best epoch " << result.best_epoch << ", checkpoint " << path.string() << '\n';
  return path;
}

std::vector<std::pair<std::string, MetricsReport>> cmd_evaluate(const AppConfig& config,
                                                                std::string_view split_name,
                                                                std::ostream& out) {
  const auto ws = open_workspace(config);
  const auto split = load_split(config, ws);
  const auto mashups = pick_split(split, split_name);
  if (mashups.empty()) throw ConfigError(std::string(split_name) + " split is empty");
  auto pc = config.pipeline;
  pc.mode = PipelineMode::Hierarchical;
  AppConfig full = config;
  full.pipeline.mode = PipelineMode::Hierarchical;
  const auto rec = load_recommender(full, ws);
  const auto reports = evaluate_modes(*rec, mashups, pc);
  const auto table = format_table(reports);
  std::filesystem::create_directories(config.work_dir);
  write_file_atomic(config.work_dir / "metrics.tsv", table);
  out << table;
  return reports;
}

std::vector<SweepRow> cmd_sweep(const AppConfig& config, std::string_view split_name,
                                std::ostream& out) {
  const auto ws = open_workspace(config);
  const auto split = load_split(config, ws);
  const auto mashups = pick_split(split, split_name);
  if (mashups.empty()) throw ConfigError(std::string(split_name) + " split is empty");
  AppConfig full = config;
  full.pipeline.mode = PipelineMode::Hierarchical;
  const auto rec = load_recommender(full, ws);
  const auto rows = sweep(*rec, mashups, config.sweep_h, config.sweep_lambda, config.sweep_n);
  const auto table = format_sweep(rows, config.sweep_n);
  std::filesystem::create_directories(config.work_dir);
  write_file_atomic(config.work_dir / "sweep.tsv", table);
  out << table;
  return rows;
}

Recommendation cmd_recommend(const AppConfig& config, std::string_view query, std::ostream& out) {
  const auto ws = open_workspace(config);
  const auto rec = load_recommender(config, ws);
  auto result = rec->recommend(query, config.pipeline);
  out << recommendation_json(result, *ws.corpus, false) << '\n';
  return result;
}

namespace {

int cmd_serve(const AppConfig& config, std::ostream& out) {
  const auto ws = open_workspace(config);
  Service service(load_recommender(config, ws), config.pipeline);
  const int port = service.bind(config.host, config.port);
  if (port < 0) throw ConfigError("cannot bind " + config.host + ":" + std::to_string(config.port));
  out << "serving on " << config.host << ":" << port << '\n' << std::flush;
  return service.serve() ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Two-stage Web API recommender", "apirec"};
  cli.set_help_flag("--help", "print this help and exit");
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> h, top_n;
  std::optional<double> lambda;
  std::optional<std::string> mode;
  cli.add_option("--config", config_path, "JSON configuration file (or APP_CONFIG)");
  cli.add_option("--seed", seed, "seed for the split and training");
  cli.add_option("--h", h, "candidate count H");
  cli.add_option("--lambda", lambda, "fusion weight in [0, 1]");
  cli.add_option("--top-n", top_n, "number of recommendations N");
  cli.add_option("--mode", mode, "pipeline mode")
      ->check(CLI::IsMember({"hierarchical", "filter-only", "matcher-on-candidates"}));

  auto* ingest = cli.add_subcommand("ingest", "validate the corpus, write the split, print statistics");
  auto* train = cli.add_subcommand("train", "train one model");
  std::string task;
  train->add_option("--task", task, "filter-api, filter-category or matcher")
      ->required()
      ->check(CLI::IsMember({"filter-api", "filter-category", "matcher"}));
  auto* evaluate = cli.add_subcommand("evaluate", "metrics of every pipeline mode on a split");
  std::string split_name = "test";
  evaluate->add_option("--split", split_name, "train, validation or test")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  auto* sweep_cmd = cli.add_subcommand("sweep", "grid over H and lambda");
  std::vector<std::size_t> hs;
  std::vector<double> lambdas;
  sweep_cmd->add_option("--hs", hs, "comma separated H values")->delimiter(',');
  sweep_cmd->add_option("--lambdas", lambdas, "comma separated lambda values")->delimiter(',');
  sweep_cmd->add_option("--split", split_name, "train, validation or test")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  auto* recommend = cli.add_subcommand("recommend", "recommend APIs for one description");
  std::string query;
  recommend->add_option("query", query, "requirement description")->required();
  auto* serve = cli.add_subcommand("serve", "HTTP service");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("APP_CONFIG")) config_path = env;
    }
    if (config_path.empty()) {
      err << "error: no configuration; pass --config or set APP_CONFIG\n";
      return 2;
    }
    AppConfig config = load_config(config_path);
    if (seed) config.set_seed(*seed);
    if (h) config.pipeline.h = *h;
    if (lambda) config.pipeline.lambda = *lambda;
    if (top_n) config.pipeline.top_n = *top_n;
    if (mode) config.pipeline.mode = parse_pipeline_mode(*mode);
    if (const char* port = std::getenv("APP_PORT")) {
      try {
        config.port = std::stoi(port);
      } catch (const std::exception&) {
        throw ConfigError(std::string("APP_PORT is not a port number: ") + port);
      }
    }
    if (!hs.empty()) config.sweep_h = hs;
    if (!lambdas.empty()) config.sweep_lambda = lambdas;
    if (top_n) config.sweep_n = *top_n;

    if (*ingest) cmd_ingest(config, out);
    if (*train) cmd_train(config, parse_model_task(task), out);
    if (*evaluate) cmd_evaluate(config, split_name, out);
    if (*sweep_cmd) cmd_sweep(config, split_name, out);
    if (*recommend) cmd_recommend(config, query, out);
    if (*serve) return cmd_serve(config, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace apirec::app
