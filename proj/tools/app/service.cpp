// SPDX-License-Identifier: Apache-2.0
#include "service.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "app.hpp"

namespace apirec::app {

namespace {

using json = nlohmann::json;

Service::Response error_response(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

std::string next_error_id() {
  static std::atomic<std::uint64_t> counter{0};
  const auto now = static_cast<std::uint64_t>(
      std::chrono::system_clock::now().time_since_epoch().count());
  std::uint64_t x = now ^ (++counter * 0x9e3779b97f4a7c15ULL);
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

json model_json(const CheckpointMeta& m) {
  return {{"task", to_string(m.task)},
          {"layers", m.encoder.layers},
          {"hidden", m.encoder.hidden},
          {"heads", m.encoder.heads},
          {"vocab_size", m.encoder.vocab_size},
          {"max_len", m.max_len},
          {"seed", m.seed},
          {"epochs_trained", m.epochs_trained},
          {"selection_metric", m.selection_metric}};
}

}  // namespace

Service::Service(std::shared_ptr<const Recommender> recommender, PipelineConfig defaults)
    : rec_(std::move(recommender)), defaults_(defaults), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/recommend", [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = recommend(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    const auto r = health();
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
}

Service::~Service() = default;

Service::Response Service::recommend(const std::string& body) const {
  PipelineConfig config = defaults_;
  std::string description;
  try {
    const json j = json::parse(body);
    if (!j.is_object()) return error_response(400, "request body must be a JSON object");
    if (!j.contains("description") || !j.at("description").is_string()) {
      return error_response(400, "'description' must be a string");
    }
    description = j.at("description").get<std::string>();
    for (const char* key : {"top_n", "h"}) {
      if (j.contains(key) && !j.at(key).is_number_unsigned()) {
        return error_response(400, std::string("'") + key + "' must be a non-negative integer");
      }
    }
    if (j.contains("lambda") && !j.at("lambda").is_number()) {
      return error_response(400, "'lambda' must be a number");
    }
    if (j.contains("top_n")) config.top_n = j.at("top_n").get<std::size_t>();
    if (j.contains("h")) config.h = j.at("h").get<std::size_t>();
    if (j.contains("lambda")) config.lambda = j.at("lambda").get<double>();
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  }
  try {
    const auto rec = rec_->recommend(description, config);
    return {200, recommendation_json(rec, rec_->corpus(), true)};
  } catch (const ConfigError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    const auto id = next_error_id();
    std::cerr << "error " << id << ": " << e.what() << '\n';
    return error_response(500, "internal error " + id);
  }
}

Service::Response Service::health() const {
  json j{{"status", "ok"},
         {"repository_size", rec_->corpus().repository_size()},
         {"filter", model_json(rec_->filter().meta())},
         {"pipeline",
          {{"h", defaults_.h},
           {"lambda", defaults_.lambda},
           {"top_n", defaults_.top_n},
           {"mode", to_string(defaults_.mode)}}}};
  j["matcher"] = rec_->has_matcher() ? model_json(rec_->matcher().meta()) : json(nullptr);
  return {200, j.dump()};
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::serve() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

void Service::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace apirec::app
