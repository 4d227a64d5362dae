#pragma once

#include <cstdint>
#include <optional>
#include <semaphore>

#include "trajsem/backend.hpp"

namespace trajsem {

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:8080
  std::string model;
  int logprobs = 20;      // top-K logprobs requested per position
  int parallelism = 4;    // max concurrent in-flight requests
  std::optional<std::string> eos_text;
  std::size_t max_context = 4096;
  std::optional<std::uint64_t> seed;  // forwarded to the server when set
  double timeout_seconds = 120.0;
  std::string api_key_env = "TRAJSEM_API_KEY";
};

/**
 * OpenAI-compatible /v1/completions client.
 *
 * Tokenization is delegated to the server via echo mode, and token ids
 * are local interns of the returned surfaces. Continuations are scored
 * with `max_tokens=0, echo=true`, reading per-token log-probs for the
 * tail of the concatenated prompt+continuation string. Next-token
 * distributions come from a `max_tokens=1, logprobs=K` request; sampling
 * then happens locally over the returned top-K, which keeps runs
 * reproducible under our own seeding when the server is deterministic.
 */
class HttpBackend : public Backend {
public:
  explicit HttpBackend(HttpBackendConfig config);

  BackendKind kind() const override { return BackendKind::http; }
  std::string id() const override;
  Capabilities capabilities() const override;
  Vocabulary vocabulary() const override;
  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;

protected:
  NextTokenDistribution next_token_logprobs_impl(
      std::span<const TokenId> prefix) const override;
  std::vector<double> continuation_logprobs_impl(
      std::span<const TokenId> prompt, std::span<const TokenId> continuation) const override;

private:
  TokenId intern(const std::string& surface) const;
  std::string completions(const std::string& body) const;

  HttpBackendConfig config_;
  std::string api_key_;

  mutable std::mutex vocab_mutex_;
  mutable Vocabulary vocab_;
  mutable std::unordered_map<std::string, TokenId> index_;

  mutable std::counting_semaphore<> slots_;
};

}  // namespace trajsem
