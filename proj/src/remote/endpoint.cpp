#include "llmprint/remote/endpoint.hpp"

#include <cmath>
#include <sstream>

namespace llmprint::remote {
namespace {

long long parse_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw InvalidArgument("endpoint option '" + key + "' expects an integer, got '" + value + "'");
  }
  return v;
}

}  // namespace

void EndpointSpec::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw InvalidArgument("endpoint URL must start with http:// or https://, got '" + base_url + "'");
  }
  if (model.empty()) throw InvalidArgument("endpoint needs a model name");
  if (timeout.count() <= 0) throw InvalidArgument("endpoint timeout must be positive");
  if (max_retries < 0) throw InvalidArgument("endpoint retries must be >= 0");
  if (max_concurrency < 1) throw InvalidArgument("endpoint concurrency must be >= 1");
  if (!(requests_per_second >= 0.0) || !std::isfinite(requests_per_second)) {
    throw InvalidArgument("requests per second must be a finite value >= 0");
  }
  if (batch_choices < 1) throw InvalidArgument("batch size must be >= 1");
  if (initial_backoff.count() < 0) throw InvalidArgument("backoff must be >= 0");
}

EndpointSpec EndpointSpec::parse(const std::string& text) {
  EndpointSpec spec;
  std::stringstream in(text);
  std::string part;
  bool first = true;
  while (std::getline(in, part, ';')) {
    if (first) {
      spec.base_url = part;
      first = false;
      continue;
    }
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw InvalidArgument("endpoint option '" + part + "' lacks '='");
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "model") {
      spec.model = value;
    } else if (key == "key_env") {
      spec.api_key_env = value;
    } else if (key == "timeout_ms") {
      spec.timeout = std::chrono::milliseconds(parse_integer(key, value));
    } else if (key == "retries") {
      spec.max_retries = static_cast<int>(parse_integer(key, value));
    } else if (key == "concurrency") {
      const auto v = parse_integer(key, value);
      if (v < 1) throw InvalidArgument("endpoint concurrency must be >= 1");
      spec.max_concurrency = static_cast<std::size_t>(v);
    } else if (key == "rps") {
      try {
        spec.requests_per_second = std::stod(value);
      } catch (const std::exception&) {
        throw InvalidArgument("endpoint option 'rps' expects a number, got '" + value + "'");
      }
    } else if (key == "batch") {
      const auto v = parse_integer(key, value);
      if (v < 1) throw InvalidArgument("batch size must be >= 1");
      spec.batch_choices = static_cast<std::size_t>(v);
    } else if (key == "backoff_ms") {
      spec.initial_backoff = std::chrono::milliseconds(parse_integer(key, value));
    } else {
      throw InvalidArgument("unknown endpoint option '" + key + "'");
    }
  }
  while (!spec.base_url.empty() && spec.base_url.back() == '/') spec.base_url.pop_back();
  spec.validate();
  return spec;
}

std::string EndpointSpec::to_string() const {
  std::ostringstream out;
  out << base_url << ";model=" << model;
  if (!api_key_env.empty()) out << ";key_env=" << api_key_env;
  out << ";timeout_ms=" << timeout.count() << ";retries=" << max_retries
      << ";concurrency=" << max_concurrency << ";rps=" << requests_per_second
      << ";batch=" << batch_choices << ";backoff_ms=" << initial_backoff.count();
  return out.str();
}

}  // namespace llmprint::remote
