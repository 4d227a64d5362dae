#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajsem/backend.hpp"
#include "trajsem/engine.hpp"
#include "trajsem/meaning.hpp"

namespace trajsem {

/// One corpus occurrence of a probed word, split at its first
/// token-boundary occurrence: prefix + word + suffix reconstructs the
/// paragraph.
struct ContextPair {
  std::string prefix_text;
  std::string suffix_text;
  std::int64_t source_id = 0;  // paragraph index in corpus order
};

enum class Direction { forward, backward };

std::string to_string(Direction d);

/**
 * Directional verdict. `margin` is the containment margin: positive
 * means forward, negative backward, and exactly zero ties to forward.
 * For entailment, forward reads "u entails v"; for the hyponym test,
 * "u is a hyponym of v".
 */
struct RelationVerdict {
  Direction direction = Direction::forward;
  double margin = 0.0;
  std::string pair_a;
  std::string pair_b;
  std::vector<std::string> notes;
};

/// Entailment Test over prompt meanings: samples both trajectory sets,
/// scores both prompts on the pooled support, and compares distances to
/// the meet.
RelationVerdict entailment_test(const Backend& backend, std::string_view u,
                                std::string_view v, const SamplingConfig& cfg,
                                const DistanceSpec& spec = {}, int parallelism = 1);

/// Same decision rule on a caller-supplied trajectory pool (shared
/// support), e.g. an exhaustive enumeration of a crisp backend.
RelationVerdict entailment_test_with_pool(const Backend& backend,
                                          std::span<const TokenId> u_prompt,
                                          std::span<const TokenId> v_prompt,
                                          std::vector<Trajectory> pool,
                                          const SamplingConfig& cfg,
                                          const DistanceSpec& spec = {},
                                          int parallelism = 1);

/// Paragraph-level contexts containing `word`, in corpus order.
/// Paragraphs are blank-line separated; a missing word yields an empty
/// list. Matches are token-boundary and case-sensitive by default.
std::vector<ContextPair> retrieve_contexts(const std::string& corpus_path,
                                           std::string_view word, int max_contexts = 100,
                                           bool case_insensitive = false);

/**
 * Substring meaning over retrieved contexts: each entry is the mean
 * per-token log-probability of prefix + word + suffix scored from
 * scratch (BOS when available), keyed by the context's position in
 * `contexts`. Contexts exceeding the backend's context window are
 * skipped (counted in *skipped); all-skipped is an error.
 */
MeaningSample substring_meaning(const Backend& backend, std::string_view word,
                                std::span<const ContextPair> contexts, int parallelism = 1,
                                int* skipped = nullptr);

/// Hyponym Test over pooled corpus contexts of both words.
RelationVerdict hyponym_test(const Backend& backend, std::string_view u, std::string_view v,
                             const std::string& corpus_path, const DistanceSpec& spec = {},
                             int max_contexts = 100, bool case_insensitive = false,
                             int parallelism = 1);

/// Pool-injected variant used when the caller already holds contexts.
RelationVerdict hyponym_test_with_contexts(const Backend& backend, std::string_view u,
                                           std::string_view v,
                                           std::span<const ContextPair> pooled,
                                           const DistanceSpec& spec = {},
                                           int parallelism = 1);

/// Pairwise-recovered hierarchy: an edge points from predicted hyponym
/// to predicted hypernym.
struct HierarchyResult {
  std::vector<std::string> words;
  std::vector<RelationVerdict> verdicts;         // one per (i<j) pair, pair-index order
  std::vector<std::pair<int, int>> edges;        // hyponym -> hypernym
  bool acyclic = true;
  int transitivity_violations = 0;
};

HierarchyResult build_hierarchy(const Backend& backend, std::span<const std::string> words,
                                const std::string& corpus_path, const DistanceSpec& spec = {},
                                int max_contexts = 100, bool case_insensitive = false,
                                int parallelism = 1);

/// Cycle and 3-cycle accounting over an arbitrary edge set.
std::pair<bool, int> analyze_edges(int node_count, std::span<const std::pair<int, int>> edges);

}  // namespace trajsem
