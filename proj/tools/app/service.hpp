// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include <apirec/pipeline.hpp>

namespace httplib {
class Server;
}

namespace apirec::app {

/// HTTP front end over one immutable recommender snapshot.
///
///   POST /recommend  {description, top_n?, h?, lambda?}
///   GET  /healthz
class Service {
 public:
  struct Response {
    int status = 200;
    std::string body;
  };

  Service(std::shared_ptr<const Recommender> recommender, PipelineConfig defaults);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response recommend(const std::string& body) const;
  Response health() const;

  /// Binds `host:port` (port 0 picks a free one) and returns the bound port,
  /// or -1 when binding fails.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop() is called.
  bool serve();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  std::shared_ptr<const Recommender> rec_;
  PipelineConfig defaults_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace apirec::app
