#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include "llmprint/core/error.hpp"

namespace llmprint::remote {

/// An OpenAI-compatible completion endpoint. The API key itself is never
/// stored; only the name of the environment variable holding it.
struct EndpointSpec {
  std::string base_url;
  std::string api_key_env;  // empty: no Authorization header
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::size_t max_concurrency = 4;
  /// 0 disables the cap.
  double requests_per_second = 0.0;
  /// Choices per sampling request (`n`); 1 sends one request per draw.
  std::size_t batch_choices = 1;
  std::chrono::milliseconds initial_backoff{200};

  void validate() const;

  /// "http://host:port;model=m;key_env=VAR;timeout_ms=..;retries=..;
  /// concurrency=..;rps=..;batch=..;backoff_ms=..". Unknown keys are errors.
  static EndpointSpec parse(const std::string& text);
  /// Inverse of parse; contains no credential.
  std::string to_string() const;
};

/// Any failed exchange with an endpoint. `status` is the HTTP status, or 0
/// when no response arrived.
class RemoteError : public Error {
 public:
  RemoteError(int status, const std::string& message)
      : Error(message + (status ? " (HTTP " + std::to_string(status) + ")" : "")),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class AuthError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

/// Still rate limited after every retry.
class RateLimitExhausted : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

class MalformedResponse : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

/// The endpoint does not return log-probabilities.
class LogprobsUnsupported : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

}  // namespace llmprint::remote
