#pragma once

#include "trajsem/backend.hpp"

namespace trajsem {

/// Assigns equal probability to every non-bos token after any prefix.
/// Mostly useful as a degenerate reference in tests and sanity checks.
class UniformBackend : public Backend {
public:
  explicit UniformBackend(Vocabulary vocab);

  BackendKind kind() const override { return BackendKind::uniform; }
  std::string id() const override;
  Capabilities capabilities() const override;
  Vocabulary vocabulary() const override { return vocab_; }
  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;

protected:
  NextTokenDistribution next_token_logprobs_impl(
      std::span<const TokenId> prefix) const override;

private:
  Vocabulary vocab_;
  LocalTokenizer tokenizer_;
  NextTokenDistribution dist_;
};

}  // namespace trajsem
