#include "trajsem/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "trajsem/errors.hpp"

namespace trajsem {

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::http: return "http";
    case BackendKind::ngram: return "ngram";
    case BackendKind::crisp: return "crisp";
    case BackendKind::uniform: return "uniform";
  }
  return "unknown";
}

void NextTokenDistribution::validate() const {
  double sum = 0.0;
  TokenId prev = -1;
  for (const auto& [id, lp] : entries) {
    if (id <= prev) throw Error("distribution entries not sorted/unique");
    if (lp > 1e-9) throw Error("log-probability above zero");
    prev = id;
    sum += std::exp(lp);
  }
  if (complete && std::abs(sum - 1.0) > 1e-6) {
    throw Error("complete distribution sums to " + std::to_string(sum));
  }
}

namespace {

std::string cache_key(std::span<const TokenId> prompt, std::span<const TokenId> continuation) {
  std::string key;
  key.resize((prompt.size() + continuation.size() + 1) * sizeof(TokenId));
  char* out = key.data();
  auto put = [&](TokenId v) {
    std::memcpy(out, &v, sizeof(TokenId));
    out += sizeof(TokenId);
  };
  put(static_cast<TokenId>(prompt.size()));
  for (TokenId t : prompt) put(t);
  for (TokenId t : continuation) put(t);
  return key;
}

}  // namespace

void Backend::check_context(std::size_t prefix_len) const {
  if (prefix_len > capabilities().max_context) {
    throw Error("context overflow: " + std::to_string(prefix_len) + " tokens exceeds " +
                std::to_string(capabilities().max_context));
  }
}

NextTokenDistribution Backend::next_token_logprobs(std::span<const TokenId> prefix) const {
  check_context(prefix.size());
  return next_token_logprobs_impl(prefix);
}

std::vector<double> Backend::continuation_logprobs(
    std::span<const TokenId> prompt, std::span<const TokenId> continuation) const {
  check_context(prompt.size() + continuation.size());
  std::string key = cache_key(prompt, continuation);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = score_cache_.find(key);
    if (it != score_cache_.end()) return it->second;
  }
  std::vector<double> logs = continuation_logprobs_impl(prompt, continuation);
  for (double& lp : logs) lp = clamp_logprob(lp);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return score_cache_.emplace(std::move(key), std::move(logs)).first->second;
}

std::vector<double> Backend::continuation_logprobs_impl(
    std::span<const TokenId> prompt, std::span<const TokenId> continuation) const {
  std::vector<double> logs;
  logs.reserve(continuation.size());
  std::vector<TokenId> ctx(prompt.begin(), prompt.end());
  ctx.reserve(prompt.size() + continuation.size());
  for (TokenId tok : continuation) {
    NextTokenDistribution dist = next_token_logprobs_impl(ctx);
    double lp = kLogFloor;
    auto it = std::lower_bound(dist.entries.begin(), dist.entries.end(), tok,
                               [](const auto& e, TokenId t) { return e.first < t; });
    if (it != dist.entries.end() && it->first == tok) lp = it->second;
    logs.push_back(lp);
    ctx.push_back(tok);
  }
  return logs;
}

TokenId sample_from_distribution(const NextTokenDistribution& dist, double temperature,
                                 Rng& rng) {
  if (dist.entries.empty()) throw Error("cannot sample from empty distribution");
  if (temperature <= 0.0) throw Error("temperature must be positive");

  if (temperature < kGreedyTemperature) {
    TokenId best = dist.entries.front().first;
    double best_lp = dist.entries.front().second;
    for (const auto& [id, lp] : dist.entries) {
      if (lp > best_lp) {
        best = id;
        best_lp = lp;
      }
    }
    return best;
  }

  double max_lp = dist.entries.front().second;
  for (const auto& e : dist.entries) max_lp = std::max(max_lp, e.second);

  double total = 0.0;
  std::vector<double> weights;
  weights.reserve(dist.entries.size());
  for (const auto& [id, lp] : dist.entries) {
    double w = std::exp((lp - max_lp) / temperature);
    weights.push_back(w);
    total += w;
  }

  double u = rng.next_double() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return dist.entries[i].first;
  }
  return dist.entries.back().first;
}

TokenId sample_next(const Backend& backend, std::span<const TokenId> prefix,
                    double temperature, Rng& rng) {
  if (!backend.capabilities().sampling) {
    throw Error("backend '" + backend.id() + "' does not support sampling");
  }
  NextTokenDistribution dist = backend.next_token_logprobs(prefix);
  return sample_from_distribution(dist, temperature, rng);
}

}  // namespace trajsem
