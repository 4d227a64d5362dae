#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trajsem {

using TokenId = std::int32_t;

/// Ordered token inventory of a backend. Surfaces are unique; eos/bos are
/// optional indices into `tokens`.
struct Vocabulary {
  std::vector<std::string> tokens;
  std::optional<TokenId> eos_id;
  std::optional<TokenId> bos_id;

  std::size_t size() const { return tokens.size(); }
  const std::string& surface(TokenId id) const;
  std::optional<TokenId> find(std::string_view surface) const;
  bool is_special(TokenId id) const {
    return (eos_id && *eos_id == id) || (bos_id && *bos_id == id);
  }

  /// Throws ConfigError on duplicate surfaces or out-of-range special ids.
  void validate() const;
};

/// Splits UTF-8 text into code points. Invalid bytes are passed through as
/// single-byte units.
std::vector<std::string> utf8_codepoints(std::string_view text);

/**
 * String/token conversion for local backends.
 *
 * Text is split on whitespace; each chunk that exactly matches a
 * vocabulary surface becomes one token, anything else falls back to its
 * code points. Special tokens (eos/bos) are never produced from text.
 * Unknown code points raise Error.
 */
class LocalTokenizer {
public:
  explicit LocalTokenizer(const Vocabulary& vocab);

  std::vector<TokenId> tokenize(std::string_view text) const;

private:
  std::unordered_map<std::string, TokenId> index_;
};

/// Concatenates token surfaces.
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> tokens);

}  // namespace trajsem
