#pragma once

#include "trajsem/backend.hpp"
#include "trajsem/dfa.hpp"

namespace trajsem {

/// Surface used for the end-of-sequence token appended to DFA alphabets.
inline constexpr const char* kEosSurface = "[EOS]";

/**
 * Deterministic generator over a DFA: probability mass is spread
 * uniformly over the feasible next tokens. A token is feasible when it
 * keeps the automaton out of the sink; [EOS] is feasible exactly in
 * accepting states. Prefixes that have already left the language get the
 * unconstrained uniform distribution over the whole vocabulary, matching
 * the zero-denominator convention of the crisp calculus.
 *
 * The DFA is trimmed at construction so every reachable non-sink state
 * has at least one feasible continuation, which keeps sampling total.
 */
class CrispBackend : public Backend {
public:
  explicit CrispBackend(Dfa dfa, std::string id = "");

  BackendKind kind() const override { return BackendKind::crisp; }
  std::string id() const override { return id_; }
  Capabilities capabilities() const override;
  Vocabulary vocabulary() const override { return vocab_; }
  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;

  const Dfa& dfa() const { return dfa_; }

  /// True when every token of `word` (eos excluded) keeps the automaton
  /// out of the sink.
  bool feasible(std::span<const TokenId> word) const;

protected:
  NextTokenDistribution next_token_logprobs_impl(
      std::span<const TokenId> prefix) const override;

private:
  Dfa dfa_;
  std::string id_;
  Vocabulary vocab_;
  LocalTokenizer tokenizer_;
};

std::shared_ptr<CrispBackend> load_crisp_backend(const std::string& dfa_path);

}  // namespace trajsem
