#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmprint/backend/backend.hpp"

namespace httplib {
class Server;
}

namespace llmprint::remote {

/// (surface, log-probability) pairs for one prompt. Entries are used as
/// given: the top-k list reports them verbatim and sampling draws in
/// proportion to exp(logprob / temperature).
using Distribution = std::vector<std::pair<std::string, double>>;
using DistributionFn = std::function<Distribution(const std::string& prompt)>;

/// The same list for every prompt.
DistributionFn fixed_distribution(Distribution entries);
/// All mass on one surface.
DistributionFn constant_distribution(std::string surface);
/// Tokenizes the prompt with the backend's vocabulary and returns the
/// log-softmax of its first-token logits over every surface.
DistributionFn backend_distribution(std::shared_ptr<const ModelBackend> backend);
/// Independent standard-normal logits per prompt (seeded by a hash of the
/// prompt text and `seed`), log-softmaxed over `surfaces`.
DistributionFn random_distribution(std::vector<std::string> surfaces, std::uint64_t seed);

struct MockServerOptions {
  std::string model = "mock";
  /// Required bearer token when set.
  std::optional<std::string> api_key;
  bool logprobs_supported = true;
  std::size_t max_logprobs = 20;
};

struct RequestRecord {
  std::chrono::steady_clock::time_point received;
  int status = 0;
  /// Request body; the Authorization header is never recorded.
  nlohmann::json body;
};

/// OpenAI-style /v1/completions endpoint over a DistributionFn, for
/// offline tests and demos. Generates exactly one token per choice.
class MockCompletionServer {
 public:
  explicit MockCompletionServer(DistributionFn distribution, MockServerOptions options = {});
  ~MockCompletionServer();
  MockCompletionServer(const MockCompletionServer&) = delete;
  MockCompletionServer& operator=(const MockCompletionServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  void start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string url() const;

  /// The next `count` requests are answered with `status`.
  void inject_failures(std::size_t count, int status = 429,
                       std::optional<int> retry_after_seconds = std::nullopt);
  std::vector<RequestRecord> requests() const;
  void clear_requests();

 private:
  void install_routes();
  std::pair<int, nlohmann::json> handle(const std::string& auth, const std::string& body);

  DistributionFn distribution_;
  MockServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;

  mutable std::mutex mu_;
  std::vector<RequestRecord> log_;
  std::size_t pending_failures_ = 0;
  int failure_status_ = 429;
  std::optional<int> retry_after_;
  std::uint64_t unseeded_ = 0;
};

}  // namespace llmprint::remote
