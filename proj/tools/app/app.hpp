// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <apirec/corpus.hpp>
#include <apirec/pipeline.hpp>

#include "config.hpp"

namespace apirec::app {

/// Corpus and text encoder loaded from a config.
struct Workspace {
  std::shared_ptr<const Corpus> corpus;
  TextEncoder text;
};

Workspace open_workspace(const AppConfig& config);
SplitCorpus load_split(const AppConfig& config, const Workspace& ws);
/// Filter-api checkpoint plus the matcher checkpoint when one exists.
std::shared_ptr<const Recommender> load_recommender(const AppConfig& config, const Workspace& ws);

std::string format_stats(const CorpusStats& stats);
/// Response body shared by the one-shot command and the service.
std::string recommendation_json(const Recommendation& rec, const Corpus& corpus, bool with_latency);

CorpusStats cmd_ingest(const AppConfig& config, std::ostream& out);
std::filesystem::path cmd_train(const AppConfig& config, ModelTask task, std::ostream& out);
std::vector<std::pair<std::string, MetricsReport>> cmd_evaluate(const AppConfig& config,
                                                                std::string_view split_name,
                                                                std::ostream& out);
std::vector<SweepRow> cmd_sweep(const AppConfig& config, std::string_view split_name,
                                std::ostream& out);
Recommendation cmd_recommend(const AppConfig& config, std::string_view query, std::ostream& out);

/// Parses the command line and runs one verb. Returns the exit status:
/// 0 on success, 2 on usage errors, 1 on any other failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace apirec::app
