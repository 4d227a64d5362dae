#include "trajsem/http_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "trajsem/errors.hpp"

namespace trajsem {

using nlohmann::json;

namespace {

std::string strip_trailing_slash(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

struct SlotGuard {
  std::counting_semaphore<>& sem;
  explicit SlotGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), slots_(std::max(1, config_.parallelism)) {
  config_.base_url = strip_trailing_slash(config_.base_url);
  if (config_.base_url.empty()) throw ConfigError("http backend needs --url");
  if (config_.logprobs < 1) throw ConfigError("http logprobs must be >= 1");
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  if (config_.eos_text) intern(*config_.eos_text);
}

std::string HttpBackend::id() const {
  return "http(" + config_.base_url + "," + config_.model + ")";
}

Capabilities HttpBackend::capabilities() const {
  Capabilities caps;
  caps.full_distribution = false;  // servers expose top-K, not the vocabulary
  caps.sampling = true;
  caps.max_context = config_.max_context;
  return caps;
}

Vocabulary HttpBackend::vocabulary() const {
  std::lock_guard<std::mutex> lock(vocab_mutex_);
  return vocab_;
}

TokenId HttpBackend::intern(const std::string& surface) const {
  std::lock_guard<std::mutex> lock(vocab_mutex_);
  auto it = index_.find(surface);
  if (it != index_.end()) return it->second;
  TokenId id = static_cast<TokenId>(vocab_.tokens.size());
  vocab_.tokens.push_back(surface);
  if (config_.eos_text && surface == *config_.eos_text) vocab_.eos_id = id;
  index_.emplace(surface, id);
  return id;
}

std::string HttpBackend::completions(const std::string& body) const {
  SlotGuard guard(slots_);
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(static_cast<time_t>(config_.timeout_seconds), 0);
  client.set_read_timeout(static_cast<time_t>(config_.timeout_seconds), 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post("/v1/completions", headers, body, "application/json");
  if (!res) {
    throw TransportError("request to " + config_.base_url +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("server returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
  }
  return res->body;
}

std::vector<TokenId> HttpBackend::tokenize(std::string_view text) const {
  if (text.empty()) return {};
  json body{{"model", config_.model},
            {"prompt", std::string(text)},
            {"max_tokens", 0},
            {"echo", true},
            {"logprobs", 0}};
  json reply;
  try {
    reply = json::parse(completions(body.dump()));
    std::vector<TokenId> out;
    for (const auto& tok : reply.at("choices").at(0).at("logprobs").at("tokens")) {
      out.push_back(intern(tok.get<std::string>()));
    }
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completions reply: ") + e.what());
  }
}

std::string HttpBackend::detokenize(std::span<const TokenId> tokens) const {
  std::lock_guard<std::mutex> lock(vocab_mutex_);
  std::string out;
  for (TokenId id : tokens) out += vocab_.surface(id);
  return out;
}

NextTokenDistribution HttpBackend::next_token_logprobs_impl(
    std::span<const TokenId> prefix) const {
  json body{{"model", config_.model},
            {"prompt", detokenize(prefix)},
            {"max_tokens", 1},
            {"temperature", 1.0},
            {"logprobs", config_.logprobs}};
  if (config_.seed) body["seed"] = *config_.seed;

  NextTokenDistribution dist;
  dist.complete = false;
  try {
    json reply = json::parse(completions(body.dump()));
    const json& top = reply.at("choices").at(0).at("logprobs").at("top_logprobs").at(0);
    for (const auto& [surface, lp] : top.items()) {
      double v = std::min(lp.get<double>(), 0.0);
      dist.entries.emplace_back(intern(surface), v);
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completions reply: ") + e.what());
  }
  std::sort(dist.entries.begin(), dist.entries.end());
  dist.entries.erase(std::unique(dist.entries.begin(), dist.entries.end(),
                                 [](const auto& a, const auto& b) { return a.first == b.first; }),
                     dist.entries.end());
  if (dist.entries.empty()) throw TransportError("server returned no top_logprobs");
  return dist;
}

std::vector<double> HttpBackend::continuation_logprobs_impl(
    std::span<const TokenId> prompt, std::span<const TokenId> continuation) const {
  if (continuation.empty()) return {};
  std::string text = detokenize(prompt) + detokenize(continuation);
  json body{{"model", config_.model},
            {"prompt", text},
            {"max_tokens", 0},
            {"echo", true},
            {"logprobs", 0}};
  try {
    json reply = json::parse(completions(body.dump()));
    const json& lps = reply.at("choices").at(0).at("logprobs").at("token_logprobs");
    if (lps.size() < continuation.size()) {
      throw TransportError("server returned " + std::to_string(lps.size()) +
                           " token logprobs for a " + std::to_string(continuation.size()) +
                           "-token continuation");
    }
    // The server re-tokenizes the concatenated string; we read the tail.
    // Re-tokenization across the prompt/continuation boundary may differ
    // from our local token split, which is the documented caveat of
    // string-level scoring.
    std::vector<double> out;
    out.reserve(continuation.size());
    for (std::size_t i = lps.size() - continuation.size(); i < lps.size(); ++i) {
      out.push_back(lps.at(i).is_null() ? kLogFloor : lps.at(i).get<double>());
    }
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completions reply: ") + e.what());
  }
}

}  // namespace trajsem
