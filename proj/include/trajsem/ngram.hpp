#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>

#include "trajsem/backend.hpp"

namespace trajsem {

/**
 * Additively-smoothed n-gram model over character tokens.
 *
 * Corpus lines are whitespace-split and the chunks broken into code
 * points, so the token inventory is the corpus character set. Histories
 * shorter than `order` occur at line starts and are counted as such,
 * which keeps every next-token query answerable by direct lookup.
 */
class NgramBackend : public Backend {
public:
  NgramBackend(std::string corpus_text, int order, double smoothing, std::string id);

  BackendKind kind() const override { return BackendKind::ngram; }
  std::string id() const override { return id_; }
  Capabilities capabilities() const override;
  Vocabulary vocabulary() const override { return vocab_; }
  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }

  std::string to_json_text() const;
  static std::shared_ptr<NgramBackend> from_json_text(const std::string& text);

protected:
  NextTokenDistribution next_token_logprobs_impl(
      std::span<const TokenId> prefix) const override;

private:
  NgramBackend() = default;
  void build_tokenizer();

  std::string id_;
  int order_ = 1;
  double smoothing_ = 0.0;
  Vocabulary vocab_;
  std::unique_ptr<LocalTokenizer> tokenizer_;

  struct HistoryCounts {
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
  };
  std::unordered_map<std::string, HistoryCounts> counts_;
};

/// Trains from a corpus file. Errors: unreadable/empty corpus, order < 1,
/// order larger than the corpus token count, negative smoothing.
std::shared_ptr<NgramBackend> train_ngram(const std::string& corpus_path, int order,
                                          double smoothing);

std::shared_ptr<NgramBackend> load_ngram_file(const std::string& model_path);

}  // namespace trajsem
