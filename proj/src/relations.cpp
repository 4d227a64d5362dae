#include "trajsem/relations.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "trajsem/errors.hpp"
#include "trajsem/parallel.hpp"

namespace trajsem {

std::string to_string(Direction d) {
  return d == Direction::forward ? "forward" : "backward";
}

namespace {

RelationVerdict verdict_from_margin(double margin, std::string a, std::string b) {
  RelationVerdict v;
  v.margin = margin;
  v.direction = margin >= 0.0 ? Direction::forward : Direction::backward;
  v.pair_a = std::move(a);
  v.pair_b = std::move(b);
  return v;
}

}  // namespace

RelationVerdict entailment_test_with_pool(const Backend& backend,
                                          std::span<const TokenId> u_prompt,
                                          std::span<const TokenId> v_prompt,
                                          std::vector<Trajectory> pool,
                                          const SamplingConfig& cfg, const DistanceSpec& spec,
                                          int parallelism) {
  MeaningSample mu = build_meaning_sample(backend, u_prompt, pool, cfg, parallelism);
  MeaningSample mv = build_meaning_sample(backend, v_prompt, std::move(pool), cfg, parallelism);
  // Forward (u => v) iff the meet sits closer to M_v than to M_u.
  double margin = containment_score(mu, mv, spec);
  return verdict_from_margin(margin, mu.prompt_text, mv.prompt_text);
}

RelationVerdict entailment_test(const Backend& backend, std::string_view u,
                                std::string_view v, const SamplingConfig& cfg,
                                const DistanceSpec& spec, int parallelism) {
  cfg.validate();
  std::vector<TokenId> pu = prepare_prompt(backend, u, cfg);
  std::vector<TokenId> pv = prepare_prompt(backend, v, cfg);
  std::vector<Trajectory> pool = sample_trajectories(backend, pu, cfg, 0, parallelism);
  std::vector<Trajectory> tv = sample_trajectories(backend, pv, cfg, 1, parallelism);
  pool.insert(pool.end(), std::make_move_iterator(tv.begin()), std::make_move_iterator(tv.end()));
  RelationVerdict verdict =
      entailment_test_with_pool(backend, pu, pv, std::move(pool), cfg, spec, parallelism);
  verdict.pair_a = std::string(u);
  verdict.pair_b = std::string(v);
  return verdict;
}

namespace {

bool boundary_at(const std::string& text, std::size_t pos, std::size_t len) {
  auto is_word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  if (pos > 0 && is_word_char(text[pos - 1])) return false;
  if (pos + len < text.size() && is_word_char(text[pos + len])) return false;
  return true;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> read_paragraphs(const std::string& corpus_path) {
  std::ifstream in(corpus_path);
  if (!in) throw Error("cannot open corpus file: " + corpus_path);
  std::vector<std::string> paragraphs;
  std::string line, current;
  auto flush = [&] {
    // Trim and collapse line breaks into single spaces.
    while (!current.empty() && current.back() == ' ') current.pop_back();
    if (!current.empty()) paragraphs.push_back(current);
    current.clear();
  };
  while (std::getline(in, line)) {
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) {
      flush();
      continue;
    }
    std::size_t begin = line.find_first_not_of(" \t\r");
    std::size_t end = line.find_last_not_of(" \t\r");
    if (!current.empty()) current += ' ';
    current += line.substr(begin, end - begin + 1);
  }
  flush();
  return paragraphs;
}

}  // namespace

std::vector<ContextPair> retrieve_contexts(const std::string& corpus_path,
                                           std::string_view word, int max_contexts,
                                           bool case_insensitive) {
  if (word.empty()) throw Error("cannot retrieve contexts for an empty word");
  if (max_contexts < 1) throw ConfigError("max_contexts must be >= 1");

  std::vector<ContextPair> out;
  std::string needle = case_insensitive ? lowercase(word) : std::string(word);
  std::vector<std::string> paragraphs = read_paragraphs(corpus_path);
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    if (static_cast<int>(out.size()) >= max_contexts) break;
    const std::string& para = paragraphs[p];
    std::string haystack = case_insensitive ? lowercase(para) : para;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
      if (boundary_at(haystack, pos, needle.size())) {
        ContextPair ctx;
        ctx.prefix_text = para.substr(0, pos);
        ctx.suffix_text = para.substr(pos + needle.size());
        ctx.source_id = static_cast<std::int64_t>(p);
        out.push_back(std::move(ctx));
        break;  // first occurrence splits the paragraph
      }
      ++pos;
    }
  }
  return out;
}

MeaningSample substring_meaning(const Backend& backend, std::string_view word,
                                std::span<const ContextPair> contexts, int parallelism,
                                int* skipped) {
  if (contexts.empty()) throw Error("substring meaning needs at least one context");
  std::vector<TokenId> word_tokens = backend.tokenize(word);
  if (word_tokens.empty()) throw Error("word '" + std::string(word) + "' produces no tokens");

  std::vector<TokenId> prompt;
  Vocabulary vocab = backend.vocabulary();
  if (vocab.bos_id) prompt.push_back(*vocab.bos_id);

  const std::size_t max_context = backend.capabilities().max_context;
  struct Prepared {
    Trajectory key;
    std::vector<TokenId> sequence;
    bool fits = false;
  };
  std::vector<Prepared> prepared(contexts.size());
  int skip_count = 0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    std::vector<TokenId> seq = backend.tokenize(contexts[i].prefix_text);
    Trajectory key;
    key.tokens = seq;
    key.origin_prompt_id = static_cast<std::int64_t>(i);
    seq.insert(seq.end(), word_tokens.begin(), word_tokens.end());
    std::vector<TokenId> suffix = backend.tokenize(contexts[i].suffix_text);
    key.tokens.insert(key.tokens.end(), suffix.begin(), suffix.end());
    seq.insert(seq.end(), suffix.begin(), suffix.end());
    prepared[i].fits = prompt.size() + seq.size() <= max_context;
    if (!prepared[i].fits) ++skip_count;
    prepared[i].key = std::move(key);
    prepared[i].sequence = std::move(seq);
  }
  if (skipped) *skipped = skip_count;
  if (skip_count == static_cast<int>(contexts.size())) {
    throw Error("every context exceeds the backend context window");
  }

  MeaningSample sample;
  sample.prompt = prompt;
  sample.prompt_text = std::string(word);
  sample.meta.backend_id = backend.id();
  std::vector<double> scores(prepared.size(), 0.0);
  parallel_for(prepared.size(), parallelism, [&](std::size_t i) {
    if (!prepared[i].fits) return;
    Trajectory continuation;
    continuation.tokens = prepared[i].sequence;
    scores[i] = score_continuation(backend, prompt, continuation);
  });
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    if (!prepared[i].fits) continue;
    sample.support.push_back(std::move(prepared[i].key));
    sample.log_scores.push_back(scores[i]);
  }
  return sample;
}

RelationVerdict hyponym_test_with_contexts(const Backend& backend, std::string_view u,
                                           std::string_view v,
                                           std::span<const ContextPair> pooled,
                                           const DistanceSpec& spec, int parallelism) {
  MeaningSample mu = substring_meaning(backend, u, pooled, parallelism);
  MeaningSample mv = substring_meaning(backend, v, pooled, parallelism);
  // Alg-2 rule: u is the hyponym iff M_u sits closer to the meet.
  double margin = containment_score(mv, mu, spec);
  RelationVerdict verdict = verdict_from_margin(margin, std::string(u), std::string(v));
  if (backend.tokenize(u).size() > 1) {
    verdict.notes.push_back("'" + std::string(u) + "' is multi-token");
  }
  if (backend.tokenize(v).size() > 1) {
    verdict.notes.push_back("'" + std::string(v) + "' is multi-token");
  }
  return verdict;
}

namespace {

/// Pools the two context lists and drops entries that would overflow the
/// context window for either word, so both substring meanings stay
/// support-aligned.
std::vector<ContextPair> pool_contexts(const Backend& backend,
                                       std::span<const ContextPair> a,
                                       std::span<const ContextPair> b,
                                       std::size_t max_word_tokens) {
  std::vector<ContextPair> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());

  std::size_t budget = backend.capabilities().max_context;
  std::vector<ContextPair> kept;
  for (auto& ctx : pooled) {
    std::size_t len = backend.tokenize(ctx.prefix_text).size() +
                      backend.tokenize(ctx.suffix_text).size() + max_word_tokens + 1;
    if (len <= budget) kept.push_back(std::move(ctx));
  }
  return kept;
}

}  // namespace

RelationVerdict hyponym_test(const Backend& backend, std::string_view u, std::string_view v,
                             const std::string& corpus_path, const DistanceSpec& spec,
                             int max_contexts, bool case_insensitive, int parallelism) {
  std::vector<ContextPair> cu = retrieve_contexts(corpus_path, u, max_contexts, case_insensitive);
  std::vector<ContextPair> cv = retrieve_contexts(corpus_path, v, max_contexts, case_insensitive);
  if (cu.empty()) throw Error("no corpus contexts found for word '" + std::string(u) + "'");
  if (cv.empty()) throw Error("no corpus contexts found for word '" + std::string(v) + "'");
  std::size_t word_tokens =
      std::max(backend.tokenize(u).size(), backend.tokenize(v).size());
  std::vector<ContextPair> pooled = pool_contexts(backend, cu, cv, word_tokens);
  if (pooled.empty()) throw Error("every pooled context exceeds the backend context window");
  return hyponym_test_with_contexts(backend, u, v, pooled, spec, parallelism);
}

std::pair<bool, int> analyze_edges(int node_count,
                                   std::span<const std::pair<int, int>> edges) {
  std::vector<std::vector<bool>> adj(node_count, std::vector<bool>(node_count, false));
  std::vector<std::vector<int>> out(node_count);
  for (const auto& [from, to] : edges) {
    adj[from][to] = true;
    out[from].push_back(to);
  }

  // Cycle detection via three-color DFS.
  std::vector<int> color(node_count, 0);
  bool acyclic = true;
  auto dfs = [&](auto&& self, int s) -> void {
    color[s] = 1;
    for (int t : out[s]) {
      if (color[t] == 1) acyclic = false;
      else if (color[t] == 0) self(self, t);
    }
    color[s] = 2;
  };
  for (int s = 0; s < node_count; ++s) {
    if (color[s] == 0) dfs(dfs, s);
  }

  int violations = 0;
  for (int a = 0; a < node_count; ++a) {
    for (int b = 0; b < node_count; ++b) {
      if (!adj[a][b]) continue;
      for (int c = 0; c < node_count; ++c) {
        if (adj[b][c] && adj[c][a]) ++violations;
      }
    }
  }
  return {acyclic, violations / 3};  // each directed 3-cycle counted thrice
}

HierarchyResult build_hierarchy(const Backend& backend, std::span<const std::string> words,
                                const std::string& corpus_path, const DistanceSpec& spec,
                                int max_contexts, bool case_insensitive, int parallelism) {
  if (words.size() < 2) throw Error("hierarchy needs at least two words");
  {
    std::set<std::string> unique(words.begin(), words.end());
    if (unique.size() != words.size()) throw Error("hierarchy words must be distinct");
  }

  HierarchyResult result;
  result.words.assign(words.begin(), words.end());

  std::vector<std::vector<ContextPair>> contexts(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    contexts[i] = retrieve_contexts(corpus_path, words[i], max_contexts, case_insensitive);
    if (contexts[i].empty()) {
      throw Error("no corpus contexts found for word '" + words[i] + "'");
    }
  }

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }

  result.verdicts.resize(pairs.size());
  parallel_for(pairs.size(), parallelism, [&](std::size_t p) {
    auto [i, j] = pairs[p];
    std::size_t word_tokens = std::max(backend.tokenize(result.words[i]).size(),
                                       backend.tokenize(result.words[j]).size());
    std::vector<ContextPair> pooled =
        pool_contexts(backend, contexts[i], contexts[j], word_tokens);
    if (pooled.empty()) {
      throw Error("every pooled context exceeds the backend context window");
    }
    result.verdicts[p] =
        hyponym_test_with_contexts(backend, result.words[i], result.words[j], pooled, spec, 1);
  });

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto [i, j] = pairs[p];
    if (result.verdicts[p].direction == Direction::forward) {
      result.edges.emplace_back(i, j);  // i is the hyponym
    } else {
      result.edges.emplace_back(j, i);
    }
  }

  auto [acyclic, violations] = analyze_edges(static_cast<int>(words.size()), result.edges);
  result.acyclic = acyclic;
  result.transitivity_violations = violations;
  return result;
}

}  // namespace trajsem
