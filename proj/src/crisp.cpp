#include "trajsem/crisp.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>

#include "trajsem/errors.hpp"

namespace trajsem {

std::vector<Word> enumerate_words(int alphabet_size, int max_len) {
  std::vector<Word> out;
  out.push_back({});
  std::size_t layer_begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    std::size_t layer_end = out.size();
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (int a = 0; a < alphabet_size; ++a) {
        Word w = out[i];
        w.push_back(a);
        out.push_back(std::move(w));
      }
    }
    layer_begin = layer_end;
  }
  return out;
}

bool CrispGenerator::word_feasible(std::span<const int> word) const {
  if (word.empty()) return true;
  return dfa.run(dfa.start, word) != dfa.sink;
}

int CrispGenerator::token_score(std::span<const int> prefix, int symbol) const {
  if (!word_feasible(prefix)) return 1;  // unconstrained past an infeasible prefix
  int state = dfa.run(dfa.start, prefix);
  return dfa.step(state, symbol) != dfa.sink ? 1 : 0;
}

CrispLanguage predicate_of_generator(const CrispGenerator& g, int truncation_k) {
  // Feasible words are exactly the non-sink paths; the degenerate
  // sink-start generator admits only the empty word.
  if (g.dfa.start == g.dfa.sink) {
    Dfa empty_only = make_dfa(g.dfa.alphabet, 1, 0, std::array<int, 1>{0}, {});
    return CrispLanguage{std::move(empty_only), truncation_k};
  }
  Dfa dfa = g.dfa;
  for (int s = 0; s < dfa.state_count(); ++s) dfa.accepting[s] = s != dfa.sink;
  return CrispLanguage{std::move(dfa), truncation_k};
}

CrispGenerator generator_of_predicate(const CrispLanguage& l) {
  Dfa dfa = l.dfa;
  for (int s = 0; s < dfa.state_count(); ++s) {
    for (int a = 0; a < dfa.symbol_count(); ++a) {
      if (!dfa.accepting[dfa.next[s][a]]) dfa.next[s][a] = dfa.sink;
    }
  }
  return CrispGenerator{std::move(dfa)};
}

CrispLanguage left_quotient(const CrispLanguage& l, std::span<const int> u) {
  CrispLanguage out = l;
  out.dfa.start = l.dfa.run(l.dfa.start, u);
  return out;
}

CrispGenerator prompted(const CrispGenerator& g, std::span<const int> u) {
  if (!g.word_feasible(u)) {
    // All continuations of an infeasible prompt score 1.
    Dfa free = make_dfa(g.dfa.alphabet, 1, 0, std::array<int, 1>{0}, {});
    for (int a = 0; a < free.symbol_count(); ++a) free.next[0][a] = 0;
    return CrispGenerator{std::move(free)};
  }
  CrispGenerator out = g;
  out.dfa.start = g.dfa.run(g.dfa.start, u);
  return out;
}

bool generators_equal(const CrispGenerator& a, const CrispGenerator& b, int k) {
  if (a.dfa.alphabet != b.dfa.alphabet) return false;
  for (const Word& u : enumerate_words(a.dfa.symbol_count(), k)) {
    for (int sym = 0; sym < a.dfa.symbol_count(); ++sym) {
      if (a.token_score(u, sym) != b.token_score(u, sym)) return false;
    }
  }
  return true;
}

bool languages_equal(const CrispLanguage& a, const CrispLanguage& b, int k) {
  if (a.dfa.alphabet != b.dfa.alphabet) return false;
  for (const Word& w : enumerate_words(a.dfa.symbol_count(), k)) {
    if (a.contains(w) != b.contains(w)) return false;
  }
  return true;
}

bool prefix_closed(const CrispLanguage& l, int k) {
  for (const Word& w : enumerate_words(l.dfa.symbol_count(), k)) {
    if (w.empty() || !l.contains(w)) continue;
    Word prefix(w.begin(), w.end() - 1);
    if (!l.contains(prefix)) return false;
  }
  return true;
}

QuotientCheckResult prompted_equals_quotient(const CrispGenerator& g,
                                             std::span<const int> u, int k) {
  if (!g.word_feasible(u)) {
    return {QuotientCheckStatus::hypothesis_violated, std::nullopt};
  }
  CrispLanguage lhs = predicate_of_generator(prompted(g, u), k);
  CrispLanguage rhs = left_quotient(predicate_of_generator(g, k), u);
  for (const Word& w : enumerate_words(g.dfa.symbol_count(), k)) {
    if (lhs.contains(w) != rhs.contains(w)) {
      return {QuotientCheckStatus::fails, w};
    }
  }
  return {QuotientCheckStatus::holds, std::nullopt};
}

namespace {

std::vector<char> quotient_signature(const Dfa& dfa, int state,
                                     const std::vector<Word>& words) {
  std::vector<char> sig;
  sig.reserve(words.size());
  for (const Word& w : words) sig.push_back(dfa.accepting[dfa.run(state, w)] ? 1 : 0);
  return sig;
}

}  // namespace

Dfa minimal_automaton(const CrispLanguage& l, int k) {
  const Dfa& in = l.dfa;
  const std::vector<Word> words = enumerate_words(in.symbol_count(), k);

  std::map<std::vector<char>, int> id_of_sig;
  std::vector<int> rep_state;           // representative input state per output state
  std::vector<int> sig_id(in.state_count(), -1);

  auto discover = [&](int state) {
    auto sig = quotient_signature(in, state, words);
    auto [it, inserted] = id_of_sig.emplace(std::move(sig), static_cast<int>(rep_state.size()));
    if (inserted) rep_state.push_back(state);
    sig_id[state] = it->second;
    return it->second;
  };

  std::deque<int> queue{in.start};
  std::vector<bool> visited(in.state_count(), false);
  visited[in.start] = true;
  discover(in.start);
  std::vector<std::vector<int>> next_ids;  // filled after BFS

  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < in.symbol_count(); ++a) {
      int t = in.next[s][a];
      if (!visited[t]) {
        visited[t] = true;
        discover(t);
        queue.push_back(t);
      }
    }
  }

  int n = static_cast<int>(rep_state.size());
  next_ids.assign(n, std::vector<int>(in.symbol_count(), 0));
  std::vector<bool> accepting(n, false);
  for (int q = 0; q < n; ++q) {
    int rep = rep_state[q];
    accepting[q] = in.accepting[rep];
    for (int a = 0; a < in.symbol_count(); ++a) next_ids[q][a] = sig_id[in.next[rep][a]];
  }

  // The all-zero-signature state is the sink when it is truly absorbing;
  // otherwise a fresh unreachable sink keeps the transition function total.
  int sink = -1;
  for (int q = 0; q < n; ++q) {
    if (accepting[q]) continue;
    bool zero = true;
    const auto& sig = quotient_signature(in, rep_state[q], words);
    for (char c : sig) zero = zero && c == 0;
    if (!zero) continue;
    bool absorbing = true;
    for (int a = 0; a < in.symbol_count(); ++a) absorbing = absorbing && next_ids[q][a] == q;
    if (absorbing) {
      sink = q;
      break;
    }
  }

  Dfa out;
  out.alphabet = in.alphabet;
  out.start = sig_id[in.start];
  if (sink < 0) {
    sink = n;
    next_ids.emplace_back(in.symbol_count(), sink);
    accepting.push_back(false);
    ++n;
  }
  out.sink = sink;
  out.next = std::move(next_ids);
  out.accepting = std::move(accepting);
  out.validate();
  return out;
}

SyntacticPartition syntactic_classes(const CrispLanguage& l, int max_len) {
  Dfa min = minimal_automaton(l, l.truncation_k);
  auto reach = reachable_states(min);
  std::vector<int> states;
  for (int s = 0; s < min.state_count(); ++s) {
    if (reach[s]) states.push_back(s);
  }

  SyntacticPartition partition;
  std::map<std::vector<int>, int> class_of;
  for (const Word& w : enumerate_words(min.symbol_count(), max_len)) {
    std::vector<int> action;
    action.reserve(states.size());
    for (int s : states) action.push_back(min.run(s, w));
    auto [it, inserted] =
        class_of.emplace(std::move(action), static_cast<int>(partition.classes.size()));
    if (inserted) partition.classes.emplace_back();
    partition.classes[it->second].push_back(w);
  }
  return partition;
}

MorphismReport universal_interpretation(const CrispGenerator& g, int k) {
  const int nsym = g.dfa.symbol_count();
  const std::vector<Word> words = enumerate_words(nsym, k);

  // rank of a word in `words` (length-lex order).
  auto rank = [&](std::span<const int> w) {
    std::size_t offset = 0, layer = 1;
    for (std::size_t len = 0; len < w.size(); ++len) {
      offset += layer;
      layer *= static_cast<std::size_t>(nsym);
    }
    std::size_t idx = 0;
    for (int sym : w) idx = idx * static_cast<std::size_t>(nsym) + static_cast<std::size_t>(sym);
    return offset + idx;
  };

  // m(u) truncated to words of length <= k, memoized per DFA state since
  // the predicate of a feasible prefix depends only on the state reached.
  // An infeasible u zeroes the whole table: every u·v keeps the zero step.
  std::vector<std::vector<char>> table_of_state(g.dfa.state_count());
  std::vector<char> infeasible_table(words.size(), 0);
  auto table_for = [&](std::span<const int> u) -> const std::vector<char>& {
    if (!g.word_feasible(u)) return infeasible_table;
    int s = g.dfa.run(g.dfa.start, u);
    auto& tab = table_of_state[s];
    if (tab.empty()) {
      tab.reserve(words.size());
      CrispGenerator at_s{g.dfa};
      at_s.dfa.start = s;
      for (const Word& v : words) tab.push_back(at_s.word_feasible(v) ? 1 : 0);
    }
    return tab;
  };

  MorphismReport report;
  for (const Word& u : words) {
    ++report.prefixes_checked;
    const auto& m_u = table_for(u);

    // mu(m(u)) = L(G)(u): the table's value at the empty word.
    if ((m_u[0] != 0) != g.word_feasible(u)) {
      report.observation_ok = false;
      report.violations.emplace_back(u, -1);
    }

    // gamma(m(u))(a) = m(u a) on words of length <= k-1.
    for (int a = 0; a < nsym; ++a) {
      Word ua = u;
      ua.push_back(a);
      const auto& m_ua = table_for(ua);
      bool ok = true;
      for (const Word& v : words) {
        if (static_cast<int>(v.size()) > k - 1) continue;
        Word av;
        av.reserve(v.size() + 1);
        av.push_back(a);
        av.insert(av.end(), v.begin(), v.end());
        if (m_u[rank(av)] != m_ua[rank(v)]) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        report.transition_ok = false;
        report.violations.emplace_back(u, a);
      }
    }
  }
  return report;
}

bool CrispCheckReport::all_passed() const {
  return roundtrip_identity && predicate_prefix_closed && quotient_composition &&
         prompted_equals_quotient_all && minimization_agreement && minimal_idempotent &&
         congruence_refines_quotients && morphism.ok();
}

CrispCheckReport run_crisp_checks(const Dfa& dfa, int k) {
  dfa.validate();
  CrispCheckReport report;
  report.k = k;

  CrispLanguage lang{dfa, k};
  CrispGenerator gen = generator_of_predicate(lang);

  report.roundtrip_identity =
      generators_equal(generator_of_predicate(predicate_of_generator(gen, k)), gen, k);
  report.predicate_prefix_closed = prefix_closed(predicate_of_generator(gen, k), k);

  report.quotient_composition = true;
  for (const Word& u : enumerate_words(dfa.symbol_count(), 2)) {
    for (const Word& v : enumerate_words(dfa.symbol_count(), 2)) {
      Word uv = u;
      uv.insert(uv.end(), v.begin(), v.end());
      if (!languages_equal(left_quotient(lang, uv),
                           left_quotient(left_quotient(lang, u), v), k)) {
        report.quotient_composition = false;
      }
    }
  }

  report.prompted_equals_quotient_all = true;
  for (const Word& u : enumerate_words(dfa.symbol_count(), 3)) {
    auto result = prompted_equals_quotient(gen, u, k);
    switch (result.status) {
      case QuotientCheckStatus::holds:
        ++report.feasible_prompts_checked;
        break;
      case QuotientCheckStatus::hypothesis_violated:
        ++report.infeasible_prompts_seen;
        break;
      case QuotientCheckStatus::fails:
        report.prompted_equals_quotient_all = false;
        break;
    }
  }

  Dfa minimal = minimal_automaton(lang, k);
  Dfa hopcroft = hopcroft_minimize(dfa);
  report.minimal_states = reachable_state_count(minimal);
  report.hopcroft_states = reachable_state_count(hopcroft);
  report.minimization_agreement = report.minimal_states == report.hopcroft_states;
  report.minimal_idempotent =
      reachable_state_count(minimal_automaton(CrispLanguage{minimal, k}, k)) ==
      report.minimal_states;

  SyntacticPartition partition = syntactic_classes(lang, std::min(k, 4));
  report.syntactic_class_count = static_cast<int>(partition.classes.size());
  report.congruence_refines_quotients = true;
  for (const auto& cls : partition.classes) {
    int quotient_state = -1;
    for (const Word& w : cls) {
      int s = minimal.run(minimal.start, w);
      if (quotient_state < 0) quotient_state = s;
      if (s != quotient_state) report.congruence_refines_quotients = false;
    }
  }

  report.morphism = universal_interpretation(gen, std::min(k, 4));
  return report;
}

}  // namespace trajsem
