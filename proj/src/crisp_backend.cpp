#include "trajsem/crisp_backend.hpp"

#include <cmath>

#include "trajsem/errors.hpp"

namespace trajsem {

namespace {

Vocabulary crisp_vocabulary(const Dfa& dfa) {
  Vocabulary vocab;
  vocab.tokens = dfa.alphabet;
  for (const auto& t : vocab.tokens) {
    if (t == kEosSurface) {
      throw ConfigError(std::string("dfa alphabet may not contain the reserved token ") +
                        kEosSurface);
    }
  }
  vocab.tokens.push_back(kEosSurface);
  vocab.eos_id = static_cast<TokenId>(vocab.tokens.size() - 1);
  vocab.validate();
  return vocab;
}

}  // namespace

CrispBackend::CrispBackend(Dfa dfa, std::string id)
    : dfa_(trim_dead_states(dfa)),
      id_(id.empty() ? "crisp(states=" + std::to_string(dfa.state_count()) + ")"
                     : std::move(id)),
      vocab_(crisp_vocabulary(dfa_)),
      tokenizer_(vocab_) {}

Capabilities CrispBackend::capabilities() const {
  Capabilities caps;
  caps.full_distribution = true;
  caps.sampling = true;
  return caps;
}

std::vector<TokenId> CrispBackend::tokenize(std::string_view text) const {
  return tokenizer_.tokenize(text);
}

std::string CrispBackend::detokenize(std::span<const TokenId> tokens) const {
  return trajsem::detokenize(vocab_, tokens);
}

bool CrispBackend::feasible(std::span<const TokenId> word) const {
  int state = dfa_.start;
  for (TokenId t : word) {
    if (vocab_.eos_id && t == *vocab_.eos_id) return state != dfa_.sink && dfa_.accepting[state];
    vocab_.surface(t);  // range check
    state = dfa_.step(state, static_cast<int>(t));
    if (state == dfa_.sink) return false;
  }
  return true;
}

NextTokenDistribution CrispBackend::next_token_logprobs_impl(
    std::span<const TokenId> prefix) const {
  const TokenId eos = *vocab_.eos_id;

  int state = dfa_.start;
  bool free_mode = false;  // prefix left the language (or continued past eos)
  for (TokenId t : prefix) {
    if (t == eos) {
      free_mode = true;
      break;
    }
    vocab_.surface(t);
    state = dfa_.step(state, static_cast<int>(t));
    if (state == dfa_.sink) {
      free_mode = true;
      break;
    }
  }

  NextTokenDistribution dist;
  dist.complete = true;
  if (free_mode) {
    double lp = -std::log(static_cast<double>(vocab_.size()));
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      dist.entries.emplace_back(static_cast<TokenId>(i), lp);
    }
    return dist;
  }

  std::vector<TokenId> feasible_tokens;
  for (int a = 0; a < dfa_.symbol_count(); ++a) {
    if (dfa_.step(state, a) != dfa_.sink) feasible_tokens.push_back(static_cast<TokenId>(a));
  }
  if (dfa_.accepting[state]) feasible_tokens.push_back(eos);
  if (feasible_tokens.empty()) {
    // Unreachable after trimming; guard anyway.
    throw Error("crisp backend state has no feasible continuation");
  }
  double lp = -std::log(static_cast<double>(feasible_tokens.size()));
  for (TokenId t : feasible_tokens) dist.entries.emplace_back(t, lp);
  return dist;
}

std::shared_ptr<CrispBackend> load_crisp_backend(const std::string& dfa_path) {
  return std::make_shared<CrispBackend>(load_dfa_file(dfa_path), "crisp(" + dfa_path + ")");
}

}  // namespace trajsem
