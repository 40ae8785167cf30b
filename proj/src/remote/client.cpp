#include "llmprint/remote/client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "llmprint/core/parallel.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint::remote {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kSnippet = 200;
constexpr auto kMaxBackoff = std::chrono::seconds(60);

std::string error_snippet(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    if (j.contains("error")) {
      const auto& e = j.at("error");
      if (e.is_object() && e.contains("message")) return e.at("message").get<std::string>();
      if (e.is_string()) return e.get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  return body.substr(0, kSnippet);
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

RateLimiter::RateLimiter(double per_second, std::chrono::milliseconds guard) {
  if (!(per_second > 0.0)) {
    permits_ = 0;
    window_ = {};
    return;
  }
  // Below one request per second the window stretches to 1/rate.
  const double seconds = std::max(1.0, 1.0 / per_second);
  permits_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(per_second)));
  window_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds)) +
            guard;
}

void RateLimiter::acquire() {
  if (permits_ == 0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = Clock::now();
    while (!sent_.empty() && now - sent_.front() >= window_) sent_.pop_front();
    if (sent_.size() < permits_) {
      sent_.push_back(now);
      return;
    }
    const auto wake = sent_.front() + window_;
    lock.unlock();
    std::this_thread::sleep_until(wake);
    lock.lock();
  }
}

void ConcurrencyGate::enter() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void ConcurrencyGate::leave() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

CompletionClient::CompletionClient(EndpointSpec spec, const EnvLookup& env)
    : spec_(std::move(spec)),
      limiter_(spec_.requests_per_second),
      gate_(spec_.max_concurrency) {
  spec_.validate();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (spec_.base_url.rfind("https://", 0) == 0) {
    throw InvalidArgument("this build has no TLS support; https endpoints are unavailable");
  }
#endif
  if (!spec_.api_key_env.empty()) {
    api_key_ = env(spec_.api_key_env);
    if (!api_key_) {
      throw InvalidArgument("environment variable '" + spec_.api_key_env + "' is not set");
    }
  }
  const auto scheme_end = spec_.base_url.find("://") + 3;
  const auto slash = spec_.base_url.find('/', scheme_end);
  origin_ = spec_.base_url.substr(0, slash);
  path_ = (slash == std::string::npos ? "" : spec_.base_url.substr(slash)) + "/v1/completions";
}

nlohmann::json CompletionClient::complete(nlohmann::json body) {
  body["model"] = spec_.model;
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    gate_.enter();
    int status = 0;
    std::string response_body;
    std::string retry_after;
    std::string transport;
    {
      httplib::Client cli(origin_);
      cli.set_connection_timeout(spec_.timeout);
      cli.set_read_timeout(spec_.timeout);
      cli.set_write_timeout(spec_.timeout);
      ++requests_;
      auto res = cli.Post(path_, headers, payload, "application/json");
      if (res) {
        status = res->status;
        response_body = res->body;
        retry_after = res->get_header_value("Retry-After");
      } else {
        transport = httplib::to_string(res.error());
      }
    }
    gate_.leave();

    if (status == 200) {
      try {
        return nlohmann::json::parse(response_body);
      } catch (const nlohmann::json::exception&) {
        throw MalformedResponse(status, "completion response is not JSON");
      }
    }
    if (status == 401 || status == 403) {
      throw AuthError(status, "endpoint rejected the credentials: " + error_snippet(response_body));
    }
    const bool retry = status == 0 || transient(status);
    if (!retry || attempt >= spec_.max_retries) {
      if (status == 0) throw RemoteError(0, "no response from " + origin_ + ": " + transport);
      if (status == 429) {
        throw RateLimitExhausted(status, "rate limited after " + std::to_string(attempt + 1) +
                                             " attempts");
      }
      const std::string detail = error_snippet(response_body);
      if (status == 400 && detail.find("logprobs") != std::string::npos) {
        throw LogprobsUnsupported(status, "endpoint refuses log-probabilities: " + detail);
      }
      throw RemoteError(status, "completion request failed: " + detail);
    }
    ++retries_;
    auto wait = spec_.initial_backoff * (1LL << std::min(attempt, 20));
    if (!retry_after.empty()) {
      try {
        wait = std::max<std::chrono::milliseconds>(wait, std::chrono::seconds(std::stoll(retry_after)));
      } catch (const std::exception&) {
      }
    }
    std::this_thread::sleep_for(std::min<std::chrono::milliseconds>(wait, kMaxBackoff));
  }
}

std::vector<SurfaceLogprob> remote_topk_logprobs(CompletionClient& client,
                                                 const std::string& prompt, std::size_t k) {
  if (k == 0) throw InvalidArgument("top-k needs k >= 1");
  const auto response = client.complete(
      {{"prompt", prompt}, {"max_tokens", 1}, {"temperature", 0.0}, {"logprobs", k}});
  std::vector<SurfaceLogprob> out;
  try {
    const auto& choice = response.at("choices").at(0);
    if (!choice.contains("logprobs") || choice.at("logprobs").is_null()) {
      throw LogprobsUnsupported(200, "response carries no log-probabilities");
    }
    const auto& top = choice.at("logprobs").at("top_logprobs");
    if (!top.is_array() || top.empty() || !top.at(0).is_object()) {
      throw MalformedResponse(200, "top_logprobs missing for the first position");
    }
    for (const auto& [surface, lp] : top.at(0).items()) {
      if (!lp.is_number()) throw MalformedResponse(200, "non-numeric log-probability");
      out.push_back({surface, lp.get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(200, std::string("unexpected completion schema: ") + e.what());
  }
  std::sort(out.begin(), out.end(), [](const SurfaceLogprob& a, const SurfaceLogprob& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.surface < b.surface;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

SampledTexts remote_sample_texts(CompletionClient& client, const std::string& prompt,
                                 std::size_t count, double temperature, std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("sample count must be >= 1");
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  const std::size_t batch = client.endpoint().batch_choices;
  const std::size_t requests = (count + batch - 1) / batch;
  SampledTexts out;
  out.texts.assign(count, std::nullopt);
  std::vector<std::string> errors(requests);
  parallel_for(requests, client.endpoint().max_concurrency, [&](std::size_t r) {
    const std::size_t first = r * batch;
    const std::size_t n = std::min(batch, count - first);
    nlohmann::json body = {{"prompt", prompt},
                           {"max_tokens", 1},
                           {"temperature", temperature},
                           {"seed", mix_seed(seed, r)}};
    if (batch > 1) body["n"] = n;
    try {
      const auto response = client.complete(std::move(body));
      const auto& choices = response.at("choices");
      if (!choices.is_array() || choices.size() < n) {
        throw MalformedResponse(200, "expected " + std::to_string(n) + " choices");
      }
      for (std::size_t i = 0; i < n; ++i) out.texts[first + i] = choices.at(i).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      errors[r] = "request " + std::to_string(r) + ": unexpected completion schema: " + e.what();
    } catch (const std::exception& e) {
      errors[r] = "request " + std::to_string(r) + ": " + e.what();
    }
  });
  for (auto& e : errors) {
    if (!e.empty()) out.errors.push_back(std::move(e));
  }
  return out;
}

std::string first_word(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = text.find_first_of(" \t\r\n", begin);
  return text.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
}

SampleTally remote_sample_first_token(CompletionClient& client, const std::string& prompt,
                                      std::size_t count, double temperature, std::uint64_t seed,
                                      const std::string& positive, const std::string& negative) {
  const auto sampled = remote_sample_texts(client, prompt, count, temperature, seed);
  SampleTally tally;
  tally.requested = count;
  tally.errors = sampled.errors;
  auto prefix_related = [](const std::string& a, const std::string& b) {
    return !a.empty() && !b.empty() && a != b &&
           (a.rfind(b, 0) == 0 || b.rfind(a, 0) == 0);
  };
  for (const auto& text : sampled.texts) {
    if (!text) continue;
    ++tally.completed;
    const std::string word = first_word(*text);
    if (word == positive) {
      ++tally.c_plus;
    } else if (word == negative) {
      ++tally.c_minus;
    } else {
      ++tally.neither;
      if (prefix_related(word, positive) || prefix_related(word, negative)) ++tally.ambiguous;
    }
  }
  return tally;
}

}  // namespace llmprint::remote
