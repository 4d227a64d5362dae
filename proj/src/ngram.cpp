#include "trajsem/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trajsem/errors.hpp"

namespace trajsem {

namespace {

std::string pack_history(std::span<const TokenId> history) {
  std::string key;
  key.resize(history.size() * sizeof(TokenId));
  if (!history.empty()) std::memcpy(key.data(), history.data(), key.size());
  return key;
}

std::vector<std::vector<std::string>> corpus_lines(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> toks;
    std::istringstream ls(line);
    std::string chunk;
    while (ls >> chunk) {
      for (auto& cp : utf8_codepoints(chunk)) toks.push_back(std::move(cp));
    }
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  return lines;
}

}  // namespace

NgramBackend::NgramBackend(std::string corpus_text, int order, double smoothing,
                           std::string id)
    : id_(std::move(id)), order_(order), smoothing_(smoothing) {
  if (order_ < 1) throw ConfigError("ngram order must be >= 1");
  if (smoothing_ < 0.0) throw ConfigError("ngram smoothing must be >= 0");

  auto lines = corpus_lines(corpus_text);
  std::size_t total_tokens = 0;
  std::set<std::string> charset;
  for (const auto& line : lines) {
    total_tokens += line.size();
    for (const auto& t : line) charset.insert(t);
  }
  if (total_tokens == 0) throw ConfigError("ngram corpus is empty after tokenization");
  if (static_cast<std::size_t>(order_) > total_tokens) {
    throw ConfigError("ngram order " + std::to_string(order_) +
                      " exceeds corpus length " + std::to_string(total_tokens));
  }

  vocab_.tokens.assign(charset.begin(), charset.end());
  vocab_.validate();
  build_tokenizer();

  const std::size_t vsize = vocab_.size();
  for (const auto& line : lines) {
    std::vector<TokenId> ids;
    ids.reserve(line.size());
    for (const auto& t : line) ids.push_back(*vocab_.find(t));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::size_t from = i > static_cast<std::size_t>(order_) ? i - order_ : 0;
      std::string key = pack_history({ids.data() + from, i - from});
      auto& hc = counts_[key];
      if (hc.counts.empty()) hc.counts.assign(vsize, 0);
      ++hc.counts[static_cast<std::size_t>(ids[i])];
      ++hc.total;
    }
  }
}

void NgramBackend::build_tokenizer() {
  tokenizer_ = std::make_unique<LocalTokenizer>(vocab_);
}

Capabilities NgramBackend::capabilities() const {
  Capabilities caps;
  caps.full_distribution = true;
  caps.sampling = true;
  return caps;
}

std::vector<TokenId> NgramBackend::tokenize(std::string_view text) const {
  return tokenizer_->tokenize(text);
}

std::string NgramBackend::detokenize(std::span<const TokenId> tokens) const {
  return trajsem::detokenize(vocab_, tokens);
}

NextTokenDistribution NgramBackend::next_token_logprobs_impl(
    std::span<const TokenId> prefix) const {
  for (TokenId t : prefix) vocab_.surface(t);  // validates indices

  std::size_t hist_len = std::min<std::size_t>(prefix.size(), static_cast<std::size_t>(order_));
  std::span<const TokenId> history = prefix.subspan(prefix.size() - hist_len, hist_len);

  const std::size_t vsize = vocab_.size();
  auto it = counts_.find(pack_history(history));
  const HistoryCounts* hc = it == counts_.end() ? nullptr : &it->second;
  std::int64_t total = hc ? hc->total : 0;

  NextTokenDistribution dist;
  dist.complete = true;
  if (total == 0 && smoothing_ == 0.0) {
    // Unseen history with no smoothing mass: fall back to uniform.
    double lp = -std::log(static_cast<double>(vsize));
    for (std::size_t x = 0; x < vsize; ++x) dist.entries.emplace_back(static_cast<TokenId>(x), lp);
    return dist;
  }

  double denom = static_cast<double>(total) + smoothing_ * static_cast<double>(vsize);
  for (std::size_t x = 0; x < vsize; ++x) {
    double c = hc ? static_cast<double>(hc->counts[x]) : 0.0;
    double p = (c + smoothing_) / denom;
    if (p <= 0.0) continue;  // zero-probability tokens are omitted
    dist.entries.emplace_back(static_cast<TokenId>(x), std::log(p));
  }
  return dist;
}

std::string NgramBackend::to_json_text() const {
  nlohmann::json j;
  j["order"] = order_;
  j["smoothing"] = smoothing_;
  j["vocabulary"] = vocab_.tokens;
  nlohmann::json hists = nlohmann::json::array();
  for (const auto& [key, hc] : counts_) {
    std::vector<TokenId> history(key.size() / sizeof(TokenId));
    if (!history.empty()) std::memcpy(history.data(), key.data(), key.size());
    nlohmann::json entry;
    entry["history"] = history;
    nlohmann::json cc = nlohmann::json::object();
    for (std::size_t x = 0; x < hc.counts.size(); ++x) {
      if (hc.counts[x] > 0) cc[std::to_string(x)] = hc.counts[x];
    }
    entry["counts"] = std::move(cc);
    hists.push_back(std::move(entry));
  }
  j["histories"] = std::move(hists);
  return j.dump(2);
}

std::shared_ptr<NgramBackend> NgramBackend::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  auto backend = std::shared_ptr<NgramBackend>(new NgramBackend());
  backend->order_ = j.at("order").get<int>();
  backend->smoothing_ = j.at("smoothing").get<double>();
  backend->vocab_.tokens = j.at("vocabulary").get<std::vector<std::string>>();
  backend->vocab_.validate();
  backend->id_ = "ngram(o=" + std::to_string(backend->order_) + ",loaded)";
  backend->build_tokenizer();
  const std::size_t vsize = backend->vocab_.size();
  for (const auto& entry : j.at("histories")) {
    auto history = entry.at("history").get<std::vector<TokenId>>();
    HistoryCounts hc;
    hc.counts.assign(vsize, 0);
    for (const auto& [tok, count] : entry.at("counts").items()) {
      std::size_t x = std::stoul(tok);
      if (x >= vsize) throw ConfigError("ngram model token index out of range");
      hc.counts[x] = count.get<std::int64_t>();
      hc.total += hc.counts[x];
    }
    backend->counts_.emplace(pack_history(history), std::move(hc));
  }
  return backend;
}

std::shared_ptr<NgramBackend> train_ngram(const std::string& corpus_path, int order,
                                          double smoothing) {
  std::ifstream in(corpus_path);
  if (!in) throw Error("cannot open corpus file: " + corpus_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::make_shared<NgramBackend>(
      buffer.str(), order, smoothing,
      "ngram(o=" + std::to_string(order) + "," + corpus_path + ")");
}

std::shared_ptr<NgramBackend> load_ngram_file(const std::string& model_path) {
  std::ifstream in(model_path);
  if (!in) throw Error("cannot open ngram model file: " + model_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return NgramBackend::from_json_text(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(model_path, 0, e.what());
  }
}

}  // namespace trajsem
