#include "trajsem/uniform_backend.hpp"

#include <cmath>

#include "trajsem/errors.hpp"

namespace trajsem {

UniformBackend::UniformBackend(Vocabulary vocab)
    : vocab_(std::move(vocab)), tokenizer_(vocab_) {
  vocab_.validate();
  std::size_t count = 0;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!(vocab_.bos_id && *vocab_.bos_id == static_cast<TokenId>(i))) ++count;
  }
  if (count == 0) throw ConfigError("uniform backend needs at least one token");
  double lp = -std::log(static_cast<double>(count));
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    TokenId id = static_cast<TokenId>(i);
    if (vocab_.bos_id && *vocab_.bos_id == id) continue;
    dist_.entries.emplace_back(id, lp);
  }
  dist_.complete = true;
}

std::string UniformBackend::id() const {
  return "uniform(v=" + std::to_string(vocab_.size()) + ")";
}

Capabilities UniformBackend::capabilities() const {
  Capabilities caps;
  caps.full_distribution = true;
  caps.sampling = true;
  return caps;
}

std::vector<TokenId> UniformBackend::tokenize(std::string_view text) const {
  return tokenizer_.tokenize(text);
}

std::string UniformBackend::detokenize(std::span<const TokenId> tokens) const {
  return trajsem::detokenize(vocab_, tokens);
}

NextTokenDistribution UniformBackend::next_token_logprobs_impl(
    std::span<const TokenId>) const {
  return dist_;
}

}  // namespace trajsem
