#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trajsem/dfa.hpp"

namespace trajsem {

/// A word over a DFA alphabet, as symbol indices.
using Word = std::vector<int>;

/// All words of length <= max_len in length-then-lexicographic order,
/// starting with the empty word.
std::vector<Word> enumerate_words(int alphabet_size, int max_len);

/**
 * {0,1}-valued autoregressive token generator backed by a DFA.
 *
 * A step is feasible after a feasible prefix u iff the state after u·a is
 * not the sink. After an infeasible prefix every token scores 1: this is
 * the zero-denominator convention of the predicate-to-generator map, and
 * mirrors the fact that continuations of infeasible prompts are
 * unconstrained.
 */
struct CrispGenerator {
  Dfa dfa;

  /// All step scores along `word` are 1. The empty word is always feasible.
  bool word_feasible(std::span<const int> word) const;

  /// Token-level score G(a | prefix) in {0,1}.
  int token_score(std::span<const int> prefix, int symbol) const;
};

/// {0,1}-valued linguistic predicate backed by DFA acceptance, with the
/// enumeration bound used whenever a check needs to quantify over words.
struct CrispLanguage {
  Dfa dfa;
  int truncation_k = 6;

  bool contains(std::span<const int> word) const { return dfa.accepts(word); }
};

/// Language of all feasible words of `g` (always prefix-closed).
CrispLanguage predicate_of_generator(const CrispGenerator& g, int truncation_k = 6);

/// Generator induced by a predicate: a is feasible after u iff u·a is in
/// the language, with every token feasible after prefixes outside it.
CrispGenerator generator_of_predicate(const CrispLanguage& l);

/// Brzozowski derivative u^-1 L = { v : u v in L }.
CrispLanguage left_quotient(const CrispLanguage& l, std::span<const int> u);

/// Generator prompted with u: scores G(a | u s). For infeasible u this is
/// the unconstrained all-ones generator.
CrispGenerator prompted(const CrispGenerator& g, std::span<const int> u);

bool generators_equal(const CrispGenerator& a, const CrispGenerator& b, int k);
bool languages_equal(const CrispLanguage& a, const CrispLanguage& b, int k);
bool prefix_closed(const CrispLanguage& l, int k);

enum class QuotientCheckStatus { holds, fails, hypothesis_violated };

struct QuotientCheckResult {
  QuotientCheckStatus status;
  std::optional<Word> witness;  // word where the two sides differ
};

/// Checks L(G_u) == u^-1 L(G) on all words of length <= k. Infeasible u
/// violates the theorem's hypothesis and is reported as such rather than
/// as a failure.
QuotientCheckResult prompted_equals_quotient(const CrispGenerator& g,
                                             std::span<const int> u, int k);

/**
 * Residual-automaton construction: states are the distinct left-quotient
 * languages discovered breadth-first from the start, distinguished by
 * their acceptance signature over all words of length <= k. Minimal in
 * the Myhill-Nerode sense whenever k separates every pair of
 * distinguishable states (k >= state count is always enough).
 */
Dfa minimal_automaton(const CrispLanguage& l, int k);

/// Syntactic-congruence classes of words of length <= max_len: words are
/// grouped by the state transformation they induce on the minimal
/// automaton.
struct SyntacticPartition {
  std::vector<std::vector<Word>> classes;
};

SyntacticPartition syntactic_classes(const CrispLanguage& l, int max_len);

/// Result of checking the unique-morphism conditions into the universal
/// process of predicates, on the k-truncation.
struct MorphismReport {
  int prefixes_checked = 0;
  std::vector<std::pair<Word, int>> violations;  // (prefix, symbol)
  bool transition_ok = true;   // gamma(m(u))(a) == m(u a)
  bool observation_ok = true;  // mu(m(u)) == L(G)(u)
  bool ok() const { return transition_ok && observation_ok && violations.empty(); }
};

MorphismReport universal_interpretation(const CrispGenerator& g, int k);

/// Aggregate property suite over one DFA, as exposed by `automata check`.
struct CrispCheckReport {
  int k = 6;
  bool roundtrip_identity = false;
  bool predicate_prefix_closed = false;
  bool quotient_composition = false;
  int feasible_prompts_checked = 0;
  int infeasible_prompts_seen = 0;
  bool prompted_equals_quotient_all = false;
  int minimal_states = 0;
  int hopcroft_states = 0;
  bool minimization_agreement = false;
  bool minimal_idempotent = false;
  int syntactic_class_count = 0;
  bool congruence_refines_quotients = false;
  MorphismReport morphism;

  bool all_passed() const;
};

CrispCheckReport run_crisp_checks(const Dfa& dfa, int k);

}  // namespace trajsem
