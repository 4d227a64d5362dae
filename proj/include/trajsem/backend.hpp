#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trajsem/rng.hpp"
#include "trajsem/vocabulary.hpp"

namespace trajsem {

/// Floor applied to every log-probability before arithmetic, in nats.
/// Keeps distances finite when a backend assigns zero (or unreported)
/// probability to a token.
inline constexpr double kLogFloor = -30.0;

/// Temperatures below this collapse sampling to greedy argmax with ties
/// resolved to the lowest token index.
inline constexpr double kGreedyTemperature = 1e-9;

inline double clamp_logprob(double lp) { return lp < kLogFloor ? kLogFloor : lp; }

enum class BackendKind { http, ngram, crisp, uniform };

std::string to_string(BackendKind kind);

struct Capabilities {
  bool full_distribution = false;
  bool sampling = true;
  std::size_t max_context = 1 << 20;
};

/**
 * Next-token distribution in log space (nats).
 *
 * Entries are sorted by token index and unique. `complete` means the
 * entries cover the whole vocabulary mass: exp-sums to 1 within 1e-6.
 * Zero-probability tokens are omitted rather than carried as -inf.
 */
struct NextTokenDistribution {
  std::vector<std::pair<TokenId, double>> entries;
  bool complete = false;

  /// Throws Error when the invariants above are violated.
  void validate() const;
};

/**
 * A next-token log-probability source.
 *
 * Implementations must be safe for concurrent read-style calls.
 * (prefix, continuation) scores are memoized per instance; the cache is
 * what makes Algorithm-style double scoring affordable over HTTP.
 */
class Backend {
public:
  virtual ~Backend() = default;

  virtual BackendKind kind() const = 0;
  virtual std::string id() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual Vocabulary vocabulary() const = 0;

  /// Distribution over the next token after `prefix`.
  /// Deterministic for ngram/crisp/uniform backends.
  NextTokenDistribution next_token_logprobs(std::span<const TokenId> prefix) const;

  virtual std::vector<TokenId> tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const TokenId> tokens) const = 0;

  /// Per-token log-probabilities of `continuation` after `prompt`,
  /// floor-clamped. Memoized on (prompt, continuation) token ids.
  std::vector<double> continuation_logprobs(std::span<const TokenId> prompt,
                                            std::span<const TokenId> continuation) const;

protected:
  virtual NextTokenDistribution next_token_logprobs_impl(
      std::span<const TokenId> prefix) const = 0;

  /// Default walks next_token_logprobs_impl token by token; remote
  /// backends override with a batched echo-mode request.
  virtual std::vector<double> continuation_logprobs_impl(
      std::span<const TokenId> prompt, std::span<const TokenId> continuation) const;

  void check_context(std::size_t prefix_len) const;

private:
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> score_cache_;
};

/**
 * Draws a token from the softmax-with-temperature of the distribution's
 * entries. At temperature 1 on a complete distribution this is exactly
 * the model distribution; incomplete distributions are renormalized over
 * the returned entries.
 */
TokenId sample_next(const Backend& backend, std::span<const TokenId> prefix,
                    double temperature, Rng& rng);

/// Sampling step on an already-fetched distribution.
TokenId sample_from_distribution(const NextTokenDistribution& dist, double temperature,
                                 Rng& rng);

using BackendPtr = std::shared_ptr<const Backend>;

}  // namespace trajsem
