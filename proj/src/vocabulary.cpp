#include "trajsem/vocabulary.hpp"

#include <cctype>
#include <unordered_set>

#include "trajsem/errors.hpp"

namespace trajsem {

const std::string& Vocabulary::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens.size()) {
    throw Error("unknown token index " + std::to_string(id));
  }
  return tokens[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == surface) return static_cast<TokenId>(i);
  }
  return std::nullopt;
}

void Vocabulary::validate() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& t : tokens) {
    if (!seen.insert(t).second) {
      throw ConfigError("duplicate token surface '" + t + "' in vocabulary");
    }
  }
  auto check_id = [&](const std::optional<TokenId>& id, const char* name) {
    if (id && (*id < 0 || static_cast<std::size_t>(*id) >= tokens.size())) {
      throw ConfigError(std::string(name) + " index out of range");
    }
  };
  check_id(eos_id, "eos");
  check_id(bos_id, "bos");
}

std::vector<std::string> utf8_codepoints(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((lead & 0x80) == 0x00) len = 1;
    else if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    if (i + len > text.size()) len = 1;
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

LocalTokenizer::LocalTokenizer(const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    TokenId id = static_cast<TokenId>(i);
    if (vocab.is_special(id)) continue;
    index_.emplace(vocab.tokens[i], id);
  }
}

std::vector<TokenId> LocalTokenizer::tokenize(std::string_view text) const {
  std::vector<TokenId> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string_view chunk = text.substr(start, i - start);
    auto whole = index_.find(std::string(chunk));
    if (whole != index_.end()) {
      out.push_back(whole->second);
      continue;
    }
    for (const auto& cp : utf8_codepoints(chunk)) {
      auto it = index_.find(cp);
      if (it == index_.end()) {
        throw Error("token '" + cp + "' not in vocabulary (from chunk '" +
                    std::string(chunk) + "')");
      }
      out.push_back(it->second);
    }
  }
  return out;
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> tokens) {
  std::string out;
  for (TokenId id : tokens) out += vocab.surface(id);
  return out;
}

}  // namespace trajsem
