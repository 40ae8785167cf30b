#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmprint/remote/endpoint.hpp"

namespace llmprint::remote {

/// Sliding one-second window: at most `per_second` acquisitions in any
/// window. The window is widened by `guard` so that timestamps taken on the
/// receiving side still respect the cap.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second,
                       std::chrono::milliseconds guard = std::chrono::milliseconds(10));
  void acquire();

 private:
  std::size_t permits_;
  std::chrono::steady_clock::duration window_;
  std::mutex mu_;
  std::deque<std::chrono::steady_clock::time_point> sent_;
};

/// Counting gate bounding in-flight requests.
class ConcurrencyGate {
 public:
  explicit ConcurrencyGate(std::size_t limit) : free_(limit) {}
  void enter();
  void leave();

 private:
  std::size_t free_;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct ClientStats {
  std::size_t requests = 0;  // HTTP attempts, retries included
  std::size_t retries = 0;
};

/// Reads an environment variable; replaceable in tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// POSTs to {base_url}/v1/completions with retries, exponential backoff,
/// a rate cap and bounded concurrency. Thread-safe.
class CompletionClient {
 public:
  explicit CompletionClient(EndpointSpec spec, const EnvLookup& env = process_env);

  /// `body` without "model"; the configured model is added.
  nlohmann::json complete(nlohmann::json body);

  const EndpointSpec& endpoint() const { return spec_; }
  ClientStats stats() const { return {requests_.load(), retries_.load()}; }

 private:
  EndpointSpec spec_;
  std::optional<std::string> api_key_;
  std::string path_;
  std::string origin_;
  RateLimiter limiter_;
  ConcurrencyGate gate_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> retries_{0};
};

/// (surface, log-probability) as returned by the endpoint, highest first.
struct SurfaceLogprob {
  std::string surface;
  double logprob = 0.0;
};

/// One-token completion with top-k log-probabilities; the first generated
/// position's list, sorted descending (ties by surface), at most k entries.
std::vector<SurfaceLogprob> remote_topk_logprobs(CompletionClient& client,
                                                 const std::string& prompt, std::size_t k);

/// Outcome of T sampled completions; `texts[i]` is nullopt when the
/// request carrying draw i failed.
struct SampledTexts {
  std::vector<std::optional<std::string>> texts;
  std::vector<std::string> errors;
};

/// T draws at `temperature`, in ceil(T / batch) requests. Request r carries
/// seed mix_seed(seed, r). Failed requests are listed in `errors`.
SampledTexts remote_sample_texts(CompletionClient& client, const std::string& prompt,
                                 std::size_t count, double temperature, std::uint64_t seed);

/// First whitespace-delimited word of a completion, leading whitespace
/// removed.
std::string first_word(const std::string& text);

struct SampleTally {
  std::size_t c_plus = 0;
  std::size_t c_minus = 0;
  /// Draws matching neither surface, ambiguous ones included.
  std::size_t neither = 0;
  /// Draws where one string is a proper prefix of a pair surface or the
  /// other way round ("violets" against "violet").
  std::size_t ambiguous = 0;
  std::size_t requested = 0;
  std::size_t completed = 0;
  std::vector<std::string> errors;
};

/// Tallies first words against the pair surfaces by exact string match.
SampleTally remote_sample_first_token(CompletionClient& client, const std::string& prompt,
                                      std::size_t count, double temperature, std::uint64_t seed,
                                      const std::string& positive, const std::string& negative);

}  // namespace llmprint::remote
