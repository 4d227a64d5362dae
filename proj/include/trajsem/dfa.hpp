#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace trajsem {

/**
 * Deterministic finite automaton with a total transition function.
 *
 * A canonical absorbing non-accepting sink is always present; parsers and
 * builders route unlisted transitions to it. Words are sequences of
 * symbol indices into `alphabet`.
 */
struct Dfa {
  std::vector<std::string> alphabet;
  std::vector<std::vector<int>> next;  // [state][symbol]
  std::vector<bool> accepting;
  int start = 0;
  int sink = 0;

  int state_count() const { return static_cast<int>(next.size()); }
  int symbol_count() const { return static_cast<int>(alphabet.size()); }
  int step(int state, int symbol) const { return next[state][symbol]; }
  int run(int state, std::span<const int> word) const;
  bool accepts(std::span<const int> word) const;
  std::optional<int> symbol(std::string_view surface) const;

  void validate() const;
};

/// Builds a DFA from `user_states` explicit states plus the implicit sink.
/// Transitions are (from, symbol surface, to); unlisted ones go to the sink.
Dfa make_dfa(std::vector<std::string> alphabet, int user_states, int start,
             std::span<const int> accepting,
             std::span<const std::tuple<int, std::string, int>> transitions);

/**
 * Text format:
 *   line 1: alphabet tokens, space-separated
 *   line 2: state count and start index
 *   line 3: accepting state indices (may be empty)
 *   rest:   one `state token state` transition per line
 * Blank lines and lines starting with '#' are skipped.
 */
Dfa parse_dfa(std::istream& in, const std::string& source_name);
Dfa load_dfa_file(const std::string& path);
std::string dfa_to_text(const Dfa& dfa);

std::vector<bool> reachable_states(const Dfa& dfa);

/// States reachable from the start, counting the sink only when reachable.
int reachable_state_count(const Dfa& dfa);

/// Redirects every state that cannot reach acceptance into the sink.
Dfa trim_dead_states(const Dfa& dfa);

/// Classic partition-refinement minimization over the reachable part.
Dfa hopcroft_minimize(const Dfa& dfa);

}  // namespace trajsem
