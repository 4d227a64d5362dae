#include "trajsem/dfa.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "trajsem/errors.hpp"

namespace trajsem {

int Dfa::run(int state, std::span<const int> word) const {
  for (int sym : word) state = next[state][sym];
  return state;
}

bool Dfa::accepts(std::span<const int> word) const {
  return accepting[run(start, word)];
}

std::optional<int> Dfa::symbol(std::string_view surface) const {
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (alphabet[i] == surface) return static_cast<int>(i);
  }
  return std::nullopt;
}

void Dfa::validate() const {
  const int n = state_count();
  const int k = symbol_count();
  if (n == 0) throw Error("dfa has no states");
  if (start < 0 || start >= n) throw Error("dfa start state out of range");
  if (sink < 0 || sink >= n) throw Error("dfa sink state out of range");
  if (static_cast<int>(accepting.size()) != n) throw Error("dfa accepting size mismatch");
  if (accepting[sink]) throw Error("dfa sink must be non-accepting");
  for (int s = 0; s < n; ++s) {
    if (static_cast<int>(next[s].size()) != k) throw Error("dfa transition row size mismatch");
    for (int a = 0; a < k; ++a) {
      if (next[s][a] < 0 || next[s][a] >= n) throw Error("dfa transition target out of range");
    }
  }
  for (int a = 0; a < k; ++a) {
    if (next[sink][a] != sink) throw Error("dfa sink must be absorbing");
  }
}

Dfa make_dfa(std::vector<std::string> alphabet, int user_states, int start,
             std::span<const int> accepting,
             std::span<const std::tuple<int, std::string, int>> transitions) {
  if (user_states < 1) throw Error("dfa needs at least one state");
  Dfa dfa;
  dfa.alphabet = std::move(alphabet);
  const int n = user_states + 1;  // implicit sink appended last
  dfa.sink = user_states;
  dfa.start = start;
  dfa.next.assign(n, std::vector<int>(dfa.alphabet.size(), dfa.sink));
  dfa.accepting.assign(n, false);
  for (int s : accepting) {
    if (s < 0 || s >= user_states) throw Error("accepting state out of range");
    dfa.accepting[s] = true;
  }
  for (const auto& [from, sym, to] : transitions) {
    auto a = dfa.symbol(sym);
    if (!a) throw Error("unknown alphabet token '" + sym + "'");
    if (from < 0 || from >= user_states || to < 0 || to >= user_states) {
      throw Error("transition state out of range");
    }
    dfa.next[from][*a] = to;
  }
  dfa.validate();
  return dfa;
}

namespace {

bool skippable(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Dfa parse_dfa(std::istream& in, const std::string& source_name) {
  std::string line;
  int line_no = 0;
  auto next_content_line = [&](bool required) -> std::optional<std::pair<std::string, int>> {
    while (std::getline(in, line)) {
      ++line_no;
      if (!skippable(line)) return std::make_pair(line, line_no);
    }
    if (required) throw ParseError(source_name, line_no, "unexpected end of file");
    return std::nullopt;
  };

  auto [alpha_line, alpha_no] = *next_content_line(true);
  std::vector<std::string> alphabet;
  {
    std::istringstream ss(alpha_line);
    std::string tok;
    while (ss >> tok) alphabet.push_back(tok);
    if (alphabet.empty()) throw ParseError(source_name, alpha_no, "empty alphabet");
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
      for (std::size_t j = i + 1; j < alphabet.size(); ++j) {
        if (alphabet[i] == alphabet[j]) {
          throw ParseError(source_name, alpha_no, "duplicate alphabet token '" + alphabet[i] + "'");
        }
      }
    }
  }

  auto [head_line, head_no] = *next_content_line(true);
  int user_states = 0;
  int start = 0;
  {
    std::istringstream ss(head_line);
    if (!(ss >> user_states >> start)) {
      throw ParseError(source_name, head_no, "expected `state_count start_index`");
    }
    std::string extra;
    if (ss >> extra) throw ParseError(source_name, head_no, "trailing tokens after start index");
    if (user_states < 1) throw ParseError(source_name, head_no, "state count must be >= 1");
    if (start < 0 || start >= user_states) {
      throw ParseError(source_name, head_no, "start index out of range");
    }
  }

  // Line 3 holds the accepting set and may legitimately be blank, so it is
  // read raw rather than through the comment/blank skipper.
  if (!std::getline(in, line)) throw ParseError(source_name, line_no, "missing accepting line");
  ++line_no;
  std::vector<int> accepting;
  {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (tok[0] == '#') break;
      try {
        std::size_t pos = 0;
        int s = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        if (s < 0 || s >= user_states) {
          throw ParseError(source_name, line_no, "accepting state out of range: " + tok);
        }
        accepting.push_back(s);
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        throw ParseError(source_name, line_no, "bad accepting state index '" + tok + "'");
      }
    }
  }

  std::vector<std::tuple<int, std::string, int>> transitions;
  while (auto content = next_content_line(false)) {
    auto [tline, tno] = *content;
    std::istringstream ss(tline);
    int from = 0, to = 0;
    std::string sym;
    if (!(ss >> from >> sym >> to)) {
      throw ParseError(source_name, tno, "expected `state token state`");
    }
    std::string extra;
    if (ss >> extra && extra[0] != '#') {
      throw ParseError(source_name, tno, "trailing tokens after transition");
    }
    bool known = false;
    for (const auto& a : alphabet) known = known || a == sym;
    if (!known) throw ParseError(source_name, tno, "unknown alphabet token '" + sym + "'");
    if (from < 0 || from >= user_states || to < 0 || to >= user_states) {
      throw ParseError(source_name, tno, "transition state out of range");
    }
    transitions.emplace_back(from, sym, to);
  }

  return make_dfa(std::move(alphabet), user_states, start, accepting, transitions);
}

Dfa load_dfa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dfa file: " + path);
  return parse_dfa(in, path);
}

std::string dfa_to_text(const Dfa& dfa) {
  std::ostringstream out;
  for (std::size_t i = 0; i < dfa.alphabet.size(); ++i) {
    out << (i ? " " : "") << dfa.alphabet[i];
  }
  out << "\n" << dfa.state_count() - 1 << " " << dfa.start << "\n";
  // The canonical sink is written implicitly, so it must be last.
  bool first = true;
  for (int s = 0; s < dfa.state_count(); ++s) {
    if (dfa.accepting[s]) {
      out << (first ? "" : " ") << s;
      first = false;
    }
  }
  out << "\n";
  for (int s = 0; s < dfa.state_count(); ++s) {
    if (s == dfa.sink) continue;
    for (int a = 0; a < dfa.symbol_count(); ++a) {
      if (dfa.next[s][a] != dfa.sink) {
        out << s << " " << dfa.alphabet[a] << " " << dfa.next[s][a] << "\n";
      }
    }
  }
  return out.str();
}

std::vector<bool> reachable_states(const Dfa& dfa) {
  std::vector<bool> seen(dfa.state_count(), false);
  std::deque<int> queue{dfa.start};
  seen[dfa.start] = true;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < dfa.symbol_count(); ++a) {
      int t = dfa.next[s][a];
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
    }
  }
  return seen;
}

int reachable_state_count(const Dfa& dfa) {
  auto seen = reachable_states(dfa);
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

Dfa trim_dead_states(const Dfa& dfa) {
  // Reverse reachability from accepting states.
  std::vector<bool> alive(dfa.state_count(), false);
  std::deque<int> queue;
  for (int s = 0; s < dfa.state_count(); ++s) {
    if (dfa.accepting[s]) {
      alive[s] = true;
      queue.push_back(s);
    }
  }
  std::vector<std::vector<int>> preimage(dfa.state_count());
  for (int s = 0; s < dfa.state_count(); ++s) {
    for (int a = 0; a < dfa.symbol_count(); ++a) preimage[dfa.next[s][a]].push_back(s);
  }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int p : preimage[s]) {
      if (!alive[p]) {
        alive[p] = true;
        queue.push_back(p);
      }
    }
  }

  Dfa out = dfa;
  for (int s = 0; s < out.state_count(); ++s) {
    for (int a = 0; a < out.symbol_count(); ++a) {
      if (!alive[out.next[s][a]]) out.next[s][a] = out.sink;
    }
  }
  out.validate();
  return out;
}

Dfa hopcroft_minimize(const Dfa& dfa) {
  auto reach = reachable_states(dfa);
  std::vector<int> states;
  for (int s = 0; s < dfa.state_count(); ++s) {
    if (reach[s]) states.push_back(s);
  }

  // block id per original state; -1 for unreachable.
  std::vector<int> block(dfa.state_count(), -1);
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> acc, rej;
    for (int s : states) (dfa.accepting[s] ? acc : rej).push_back(s);
    if (!acc.empty()) blocks.push_back(acc);
    if (!rej.empty()) blocks.push_back(rej);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (int s : blocks[b]) block[s] = static_cast<int>(b);
    }
  }

  std::vector<std::vector<std::vector<int>>> preimage(
      dfa.state_count(), std::vector<std::vector<int>>(dfa.symbol_count()));
  for (int s : states) {
    for (int a = 0; a < dfa.symbol_count(); ++a) preimage[dfa.next[s][a]][a].push_back(s);
  }

  std::deque<std::pair<int, int>> work;  // (block id, symbol)
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (int a = 0; a < dfa.symbol_count(); ++a) work.emplace_back(static_cast<int>(b), a);
  }

  while (!work.empty()) {
    auto [splitter, sym] = work.front();
    work.pop_front();

    // X = states whose `sym` transition lands in the splitter block.
    std::vector<int> x;
    for (int t : blocks[splitter]) {
      for (int s : preimage[t][sym]) x.push_back(s);
    }
    if (x.empty()) continue;

    std::unordered_map<int, std::vector<int>> hit;  // block id -> members of X
    for (int s : x) hit[block[s]].push_back(s);

    for (auto& [b, members] : hit) {
      if (members.size() == blocks[b].size()) continue;  // block fully inside X
      // Split block b into (members, rest).
      std::vector<int> rest;
      std::vector<bool> in_members(dfa.state_count(), false);
      for (int s : members) in_members[s] = true;
      for (int s : blocks[b]) {
        if (!in_members[s]) rest.push_back(s);
      }
      int new_b = static_cast<int>(blocks.size());
      blocks[b] = members;
      blocks.push_back(rest);
      for (int s : rest) block[s] = new_b;
      for (int a = 0; a < dfa.symbol_count(); ++a) work.emplace_back(new_b, a);
    }
  }

  Dfa out;
  out.alphabet = dfa.alphabet;
  int sink_block = reach[dfa.sink] ? block[dfa.sink] : -1;
  int n = static_cast<int>(blocks.size());
  bool append_sink = sink_block < 0;
  out.sink = append_sink ? n : sink_block;
  int total = n + (append_sink ? 1 : 0);
  out.next.assign(total, std::vector<int>(dfa.symbol_count(), out.sink));
  out.accepting.assign(total, false);
  out.start = block[dfa.start];
  for (int b = 0; b < n; ++b) {
    int rep = blocks[b].front();
    out.accepting[b] = dfa.accepting[rep];
    for (int a = 0; a < dfa.symbol_count(); ++a) out.next[b][a] = block[dfa.next[rep][a]];
  }
  out.validate();
  return out;
}

}  // namespace trajsem
