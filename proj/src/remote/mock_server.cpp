#include "llmprint/remote/mock_server.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <httplib.h>

#include "llmprint/core/error.hpp"
#include "llmprint/core/random.hpp"

namespace llmprint::remote {
namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json error_body(const std::string& message) {
  return {{"error", {{"message", message}, {"type", "invalid_request_error"}}}};
}

Distribution log_softmax_over(const std::vector<std::string>& surfaces,
                              std::span<const double> logits) {
  const double lse = logsumexp(logits);
  Distribution out;
  out.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) out.emplace_back(surfaces[i], logits[i] - lse);
  return out;
}

/// Index drawn from exp(lp / temperature); temperature 0 is the first maximum.
std::size_t draw(const Distribution& d, double temperature, Rng& rng) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i].second > d[best].second) best = i;
  }
  if (temperature == 0.0) return best;
  std::vector<double> w(d.size());
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    w[i] = std::exp((d[i].second - d[best].second) / temperature);
    total += w[i];
  }
  double u = unit_uniform(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return best;
}

}  // namespace

DistributionFn fixed_distribution(Distribution entries) {
  if (entries.empty()) throw InvalidArgument("fixed distribution needs at least one entry");
  return [entries = std::move(entries)](const std::string&) { return entries; };
}

DistributionFn constant_distribution(std::string surface) {
  return fixed_distribution({{std::move(surface), 0.0}});
}

DistributionFn backend_distribution(std::shared_ptr<const ModelBackend> backend) {
  if (!backend) throw InvalidArgument("backend distribution needs a backend");
  std::vector<std::string> surfaces;
  const auto& vocab = backend->vocabulary();
  for (TokenId t = 0; t < vocab.size(); ++t) surfaces.push_back(vocab.surface(t));
  return [backend = std::move(backend), surfaces = std::move(surfaces)](const std::string& prompt) {
    const auto ids = backend->vocabulary().tokenize(prompt);
    const auto logits = backend->first_token_logits(ids);
    return log_softmax_over(surfaces, logits.values());
  };
}

DistributionFn random_distribution(std::vector<std::string> surfaces, std::uint64_t seed) {
  if (surfaces.empty()) throw InvalidArgument("random distribution needs surfaces");
  return [surfaces = std::move(surfaces), seed](const std::string& prompt) {
    Rng rng(mix_seed(seed, fnv1a(prompt)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> logits(surfaces.size());
    for (double& z : logits) z = normal(rng);
    return log_softmax_over(surfaces, logits);
  };
}

MockCompletionServer::MockCompletionServer(DistributionFn distribution, MockServerOptions options)
    : distribution_(std::move(distribution)),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  if (!distribution_) throw InvalidArgument("mock server needs a distribution");
  install_routes();
}

MockCompletionServer::~MockCompletionServer() { stop(); }

void MockCompletionServer::install_routes() {
  server_->Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
    const auto received = std::chrono::steady_clock::now();
    nlohmann::json logged;
    try {
      logged = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      logged = nullptr;
    }
    int status = 0;
    nlohmann::json reply;
    std::optional<int> retry_after;
    {
      std::lock_guard lock(mu_);
      if (pending_failures_ > 0) {
        --pending_failures_;
        status = failure_status_;
        retry_after = retry_after_;
        reply = error_body("injected failure");
      }
    }
    if (status == 0) std::tie(status, reply) = handle(req.get_header_value("Authorization"), req.body);
    {
      std::lock_guard lock(mu_);
      log_.push_back({received, status, std::move(logged)});
    }
    if (retry_after) res.set_header("Retry-After", std::to_string(*retry_after));
    res.status = status;
    res.set_content(reply.dump(), "application/json");
  });
}

std::pair<int, nlohmann::json> MockCompletionServer::handle(const std::string& auth,
                                                            const std::string& text) {
  if (options_.api_key && auth != "Bearer " + *options_.api_key) {
    return {401, error_body("invalid API key")};
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return {400, error_body("request body is not JSON")};
  }
  if (!body.is_object()) return {400, error_body("request body must be an object")};
  if (body.value("model", std::string()) != options_.model) {
    return {404, error_body("model '" + body.value("model", std::string()) + "' not found")};
  }
  if (!body.contains("prompt") || !body.at("prompt").is_string()) {
    return {400, error_body("prompt must be a string")};
  }
  std::size_t n = 1;
  std::optional<std::size_t> k;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  try {
    n = body.value("n", std::size_t{1});
    if (body.contains("logprobs") && !body.at("logprobs").is_null()) {
      k = body.at("logprobs").get<std::size_t>();
    }
    temperature = body.value("temperature", 1.0);
    if (body.contains("seed")) {
      seed = body.at("seed").get<std::uint64_t>();
    } else {
      std::lock_guard lock(mu_);
      seed = mix_seed(0x6d6f636bULL, unseeded_++);
    }
  } catch (const nlohmann::json::exception&) {
    return {400, error_body("malformed request fields")};
  }
  if (n < 1 || n > 128) return {400, error_body("n must be in [1, 128]")};
  if (!(temperature >= 0.0)) return {400, error_body("temperature must be >= 0")};
  if (k && !options_.logprobs_supported) {
    return {400, error_body("logprobs are not supported for this model")};
  }
  if (k && *k > options_.max_logprobs) {
    return {400, error_body("logprobs must be <= " + std::to_string(options_.max_logprobs))};
  }

  Distribution dist;
  try {
    dist = distribution_(body.at("prompt").get<std::string>());
  } catch (const std::exception& e) {
    return {400, error_body(e.what())};
  }
  if (dist.empty()) return {500, error_body("empty distribution")};

  std::vector<std::size_t> order(dist.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a].second > dist[b].second; });

  Rng rng(seed);
  nlohmann::json choices = nlohmann::json::array();
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t pick = draw(dist, temperature, rng);
    const std::string token = " " + dist[pick].first;
    nlohmann::json choice = {{"index", c}, {"text", token}, {"finish_reason", "length"}};
    if (k) {
      nlohmann::json top = nlohmann::json::object();
      for (std::size_t i = 0; i < std::min(*k, order.size()); ++i) {
        top[" " + dist[order[i]].first] = dist[order[i]].second;
      }
      choice["logprobs"] = {{"tokens", {token}},
                            {"token_logprobs", {dist[pick].second}},
                            {"top_logprobs", {top}}};
    } else {
      choice["logprobs"] = nullptr;
    }
    choices.push_back(std::move(choice));
  }
  return {200,
          {{"id", "cmpl-mock"},
           {"object", "text_completion"},
           {"model", options_.model},
           {"choices", std::move(choices)}}};
}

void MockCompletionServer::start(const std::string& host, int port) {
  if (thread_.joinable()) throw InvalidArgument("mock server already running");
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw Error("mock server cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockCompletionServer::serve(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    throw Error("mock server cannot listen on " + host + ":" + std::to_string(port));
  }
}

void MockCompletionServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockCompletionServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void MockCompletionServer::inject_failures(std::size_t count, int status,
                                           std::optional<int> retry_after_seconds) {
  std::lock_guard lock(mu_);
  pending_failures_ = count;
  failure_status_ = status;
  retry_after_ = retry_after_seconds;
}

std::vector<RequestRecord> MockCompletionServer::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

void MockCompletionServer::clear_requests() {
  std::lock_guard lock(mu_);
  log_.clear();
}

}  // namespace llmprint::remote
