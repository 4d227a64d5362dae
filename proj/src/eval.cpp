#include "trajsem/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trajsem/errors.hpp"
#include "trajsem/parallel.hpp"
#include "trajsem/rng.hpp"

namespace trajsem {

using nlohmann::json;

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_x100(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) {
    throw Error("spearman inputs differ in length: " + std::to_string(pred.size()) + " vs " +
                std::to_string(gold.size()));
  }
  const std::size_t n = pred.size();
  if (n < 2) throw Error("spearman needs at least two points");
  auto constant = [](std::span<const double> v) {
    for (double x : v) {
      if (x != v[0]) return false;
    }
    return true;
  };
  if (constant(pred) || constant(gold)) {
    throw Error("spearman undefined for constant input");
  }

  std::vector<double> ra = average_ranks(pred);
  std::vector<double> rb = average_ranks(gold);

  bool identical = true, reversed = true;
  for (std::size_t i = 0; i < n; ++i) {
    identical = identical && ra[i] == rb[i];
    reversed = reversed && ra[i] + rb[i] == static_cast<double>(n) + 1.0;
  }
  if (identical) return 100.0;
  if (reversed) return -100.0;

  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double da = ra[i] - ma;
    double db = rb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return 100.0 * sab / std::sqrt(saa * sbb);
}

const std::vector<std::string>& sts_method_names() {
  static const std::vector<std::string> names{"ours", "cond_likelihood", "joint_likelihood",
                                              "last_token", "mean_token"};
  return names;
}

SimResult similarity(const Backend& backend, std::string_view u, std::string_view v,
                     const SamplingConfig& cfg, const DistanceSpec& spec, int parallelism) {
  cfg.validate();
  std::vector<TokenId> pu = prepare_prompt(backend, u, cfg);
  std::vector<TokenId> pv = prepare_prompt(backend, v, cfg);
  std::vector<Trajectory> pool = sample_trajectories(backend, pu, cfg, 0, parallelism);
  std::vector<Trajectory> tv = sample_trajectories(backend, pv, cfg, 1, parallelism);
  pool.insert(pool.end(), std::make_move_iterator(tv.begin()),
              std::make_move_iterator(tv.end()));
  SimResult result;
  result.meaning_u = build_meaning_sample(backend, pu, pool, cfg, parallelism);
  result.meaning_v = build_meaning_sample(backend, pv, std::move(pool), cfg, parallelism);
  result.distance = distance(result.meaning_u, result.meaning_v, spec);
  return result;
}

namespace {

std::vector<TokenId> tokens_for(const Backend& backend, std::string_view text, bool fullstop) {
  return backend.tokenize(fullstop ? complete_sentence(text) : std::string(text));
}

double cond_one_way(const Backend& backend, std::string_view cont_text,
                    std::string_view prompt_text, bool fullstop) {
  std::vector<TokenId> cont = tokens_for(backend, cont_text, fullstop);
  if (cont.empty()) throw Error("conditional likelihood of an empty continuation");
  std::vector<TokenId> prompt = tokens_for(backend, prompt_text, fullstop);
  if (prompt.empty()) {
    Vocabulary vocab = backend.vocabulary();
    if (vocab.bos_id) prompt.push_back(*vocab.bos_id);
  }
  Trajectory t;
  t.tokens = std::move(cont);
  return score_continuation(backend, prompt, t);
}

}  // namespace

double baseline_cond_likelihood(const Backend& backend, std::string_view u,
                                std::string_view v, bool fullstop, bool symmetric) {
  double uv = cond_one_way(backend, u, v, fullstop);
  if (!symmetric) return uv;
  return std::max(uv, cond_one_way(backend, v, u, fullstop));
}

double baseline_joint_likelihood(const Backend& backend, std::string_view u,
                                 std::string_view v, bool fullstop) {
  std::vector<TokenId> concat = tokens_for(backend, u, fullstop);
  std::vector<TokenId> tv = tokens_for(backend, v, fullstop);
  concat.insert(concat.end(), tv.begin(), tv.end());
  if (concat.empty()) throw Error("joint likelihood of empty inputs");

  Vocabulary vocab = backend.vocabulary();
  std::vector<TokenId> prompt;
  std::span<const TokenId> cont(concat);
  if (vocab.bos_id) {
    prompt.push_back(*vocab.bos_id);
  } else {
    // No BOS: condition on the first token and score the rest.
    prompt.push_back(concat.front());
    cont = cont.subspan(1);
    if (cont.empty()) throw Error("joint likelihood needs at least two tokens without BOS");
  }
  Trajectory t;
  t.tokens.assign(cont.begin(), cont.end());
  return score_continuation(backend, prompt, t);
}

namespace {

// token -> probability, averaged over positions for mean mode. Tokens a
// position did not report contribute floor mass, so vectors over top-K
// unions stay comparable.
std::map<TokenId, double> next_token_prob_vector(const Backend& backend,
                                                 std::span<const TokenId> tokens,
                                                 TokenCosineMode mode) {
  const double floor_p = std::exp(kLogFloor);
  std::map<TokenId, std::pair<double, int>> acc;  // token -> (prob sum, positions present)
  auto add_position = [&](std::span<const TokenId> prefix) {
    NextTokenDistribution dist = backend.next_token_logprobs(prefix);
    for (const auto& [id, lp] : dist.entries) {
      auto& slot = acc[id];
      slot.first += std::exp(lp);
      slot.second += 1;
    }
  };

  int positions = 0;
  if (mode == TokenCosineMode::last) {
    add_position(tokens);
    positions = 1;
  } else {
    for (std::size_t i = 1; i <= tokens.size(); ++i) {
      add_position(tokens.subspan(0, i));
      ++positions;
    }
    if (positions == 0) {
      add_position(tokens);
      positions = 1;
    }
  }

  std::map<TokenId, double> out;
  for (const auto& [id, slot] : acc) {
    out[id] = (slot.first + floor_p * static_cast<double>(positions - slot.second)) /
              static_cast<double>(positions);
  }
  return out;
}

}  // namespace

double baseline_token_cosine(const Backend& backend, std::string_view u, std::string_view v,
                             TokenCosineMode mode, bool fullstop) {
  std::vector<TokenId> tu = tokens_for(backend, u, fullstop);
  std::vector<TokenId> tv = tokens_for(backend, v, fullstop);
  auto pu = next_token_prob_vector(backend, tu, mode);
  auto pv = next_token_prob_vector(backend, tv, mode);

  const double floor_p = std::exp(kLogFloor);
  std::set<TokenId> keys;
  for (const auto& [id, _] : pu) keys.insert(id);
  for (const auto& [id, _] : pv) keys.insert(id);

  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (TokenId id : keys) {
    auto iu = pu.find(id);
    auto iv = pv.find(id);
    double x = iu == pu.end() ? floor_p : iu->second;
    double y = iv == pv.end() ? floor_p : iv->second;
    dot += x * y;
    nu += x * x;
    nv += y * y;
  }
  return dot / std::sqrt(nu * nv);
}

// --- dataset parsing -------------------------------------------------------

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

struct StsRow {
  std::string a, b;
  double score;
};

std::vector<StsRow> parse_sts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);
  std::vector<StsRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(path, line_no,
                       "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    try {
      std::size_t used = 0;
      double score = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument(fields[2]);
      rows.push_back({fields[0], fields[1], score});
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "bad score '" + fields[2] + "'");
    }
  }
  if (rows.empty()) throw ParseError(path, line_no, "dataset is empty");
  return rows;
}

}  // namespace

StsReport run_sts(const Backend& backend, const std::string& dataset_path,
                  std::span<const std::string> methods, const SamplingConfig& cfg,
                  const DistanceSpec& spec, int parallelism) {
  cfg.validate();
  for (const auto& m : methods) {
    const auto& names = sts_method_names();
    if (std::find(names.begin(), names.end(), m) == names.end()) {
      throw ConfigError("unknown method: " + m);
    }
  }

  std::vector<StsRow> rows = parse_sts(dataset_path);
  StsReport report;
  report.records.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    report.records[i].id = "pair-" + std::to_string(i + 1);
    report.records[i].input_a = rows[i].a;
    report.records[i].input_b = rows[i].b;
    report.records[i].gold_score = rows[i].score;
  }
  std::vector<double> gold(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) gold[i] = rows[i].score;

  for (const auto& method : methods) {
    if (method == "ours") {
      std::vector<double> pred(rows.size());
      parallel_for(rows.size(), parallelism, [&](std::size_t i) {
        SamplingConfig pair_cfg = cfg;
        pair_cfg.seed = split_seed(cfg.seed, i);
        pair_cfg.complete_with_fullstop = true;  // our method always completes
        SimResult sim = similarity(backend, rows[i].a, rows[i].b, pair_cfg, spec, 1);
        pred[i] = -sim.distance;  // higher = more similar
      });
      for (std::size_t i = 0; i < rows.size(); ++i) report.records[i].predictions["ours"] = pred[i];
      report.spearman["ours"] = spearman_x100(pred, gold);
      continue;
    }

    // Baselines run with and without full-stop completion; the better
    // Spearman is reported.
    std::vector<double> with_fs(rows.size()), without_fs(rows.size());
    parallel_for(rows.size(), parallelism, [&](std::size_t i) {
      auto value = [&](bool fs) {
        if (method == "cond_likelihood") {
          return baseline_cond_likelihood(backend, rows[i].a, rows[i].b, fs);
        }
        if (method == "joint_likelihood") {
          return baseline_joint_likelihood(backend, rows[i].a, rows[i].b, fs);
        }
        if (method == "last_token") {
          return baseline_token_cosine(backend, rows[i].a, rows[i].b, TokenCosineMode::last, fs);
        }
        return baseline_token_cosine(backend, rows[i].a, rows[i].b, TokenCosineMode::mean, fs);
      };
      with_fs[i] = value(true);
      without_fs[i] = value(false);
    });
    double s_with = spearman_x100(with_fs, gold);
    double s_without = spearman_x100(without_fs, gold);
    bool use_fs = s_with >= s_without;
    report.fullstop_chosen[method] = use_fs;
    report.spearman[method] = use_fs ? s_with : s_without;
    const auto& chosen = use_fs ? with_fs : without_fs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      report.records[i].predictions[method] = chosen[i];
    }
  }
  return report;
}

namespace {

json records_to_json(const std::vector<EvalRecord>& records, bool with_direction) {
  json arr = json::array();
  for (const auto& r : records) {
    json item{{"id", r.id}, {"input_a", r.input_a}, {"input_b", r.input_b}};
    if (with_direction) item["gold_direction"] = r.gold_direction;
    else item["gold_score"] = r.gold_score;
    item["predictions"] = r.predictions;
    arr.push_back(std::move(item));
  }
  return arr;
}

}  // namespace

std::string StsReport::to_json_text() const {
  json j;
  j["task"] = "sts";
  json methods = json::object();
  for (const auto& [m, s] : spearman) {
    json entry{{"spearman_x100", s}};
    auto fs = fullstop_chosen.find(m);
    if (fs != fullstop_chosen.end()) entry["fullstop"] = fs->second;
    methods[m] = std::move(entry);
  }
  j["methods"] = std::move(methods);
  j["pairs"] = records.size();
  j["records"] = records_to_json(records, false);
  return j.dump(2);
}

std::string StsReport::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(20) << "method" << std::right << std::setw(16)
      << "spearman_x100" << "\n";
  for (const auto& [m, s] : spearman) {
    out << std::left << std::setw(20) << m << std::right << std::setw(16) << std::fixed
        << std::setprecision(2) << s << "\n";
  }
  return out.str();
}

EntailmentReport run_entailment_eval(const Backend& backend, const std::string& dataset_path,
                                     const SamplingConfig& cfg, const DistanceSpec& spec,
                                     int parallelism) {
  cfg.validate();
  std::ifstream in(dataset_path);
  if (!in) throw Error("cannot open dataset file: " + dataset_path);

  struct Row {
    std::string u, v;
    bool forward;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::string dir = j.at("direction").get<std::string>();
      if (dir != "forward" && dir != "backward") {
        throw ParseError(dataset_path, line_no, "direction must be forward or backward");
      }
      rows.push_back({j.at("u").get<std::string>(), j.at("v").get<std::string>(),
                      dir == "forward"});
    } catch (const json::exception& e) {
      throw ParseError(dataset_path, line_no, e.what());
    }
  }
  if (rows.empty()) throw ParseError(dataset_path, line_no, "dataset is empty");

  EntailmentReport report;
  report.total = static_cast<int>(rows.size());
  report.records.resize(rows.size());

  std::vector<double> ours_margin(rows.size()), cond_margin(rows.size()),
      joint_margin(rows.size());
  parallel_for(rows.size(), parallelism, [&](std::size_t i) {
    SamplingConfig pair_cfg = cfg;
    pair_cfg.seed = split_seed(cfg.seed, i);
    RelationVerdict verdict =
        entailment_test(backend, rows[i].u, rows[i].v, pair_cfg, spec, 1);
    ours_margin[i] = verdict.margin;
    // u => v if M(v|u) > M(u|v).
    cond_margin[i] = baseline_cond_likelihood(backend, rows[i].v, rows[i].u, true) -
                     baseline_cond_likelihood(backend, rows[i].u, rows[i].v, true);
    // u => v if M(uv) > M(vu).
    joint_margin[i] = baseline_joint_likelihood(backend, rows[i].u, rows[i].v, true) -
                      baseline_joint_likelihood(backend, rows[i].v, rows[i].u, true);
  });

  int ours_hits = 0, cond_hits = 0, joint_hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EvalRecord& rec = report.records[i];
    rec.id = "pair-" + std::to_string(i + 1);
    rec.input_a = rows[i].u;
    rec.input_b = rows[i].v;
    rec.gold_direction = rows[i].forward ? "forward" : "backward";
    rec.predictions["ours"] = ours_margin[i];
    rec.predictions["cond_likelihood"] = cond_margin[i];
    rec.predictions["joint_likelihood"] = joint_margin[i];
    // Margin 0 ties break forward for our test; baselines use a strict
    // comparison, so their ties fall backward.
    ours_hits += (ours_margin[i] >= 0.0) == rows[i].forward;
    cond_hits += (cond_margin[i] > 0.0) == rows[i].forward;
    joint_hits += (joint_margin[i] > 0.0) == rows[i].forward;
  }
  report.accuracy["ours"] = static_cast<double>(ours_hits) / static_cast<double>(rows.size());
  report.accuracy["cond_likelihood"] =
      static_cast<double>(cond_hits) / static_cast<double>(rows.size());
  report.accuracy["joint_likelihood"] =
      static_cast<double>(joint_hits) / static_cast<double>(rows.size());
  return report;
}

std::string EntailmentReport::to_json_text() const {
  json j;
  j["task"] = "entailment";
  j["accuracy"] = accuracy;
  j["pairs"] = total;
  j["records"] = records_to_json(records, true);
  return j.dump(2);
}

std::string EntailmentReport::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(20) << "method" << std::right << std::setw(12) << "accuracy"
      << "\n";
  for (const auto& [m, a] : accuracy) {
    out << std::left << std::setw(20) << m << std::right << std::setw(12) << std::fixed
        << std::setprecision(4) << a << "\n";
  }
  return out.str();
}

WordnetReport run_wordnet_eval(const Backend& backend, const std::string& pairs_path,
                               const std::string& corpus_path, const DistanceSpec& spec,
                               int max_contexts, bool case_insensitive, int parallelism) {
  std::ifstream in(pairs_path);
  if (!in) throw Error("cannot open pairs file: " + pairs_path);

  struct Row {
    std::string u, v;
    bool forward;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string u, v, dir;
    if (!std::getline(ss, u, '\t') || !std::getline(ss, v, '\t') || !std::getline(ss, dir)) {
      throw ParseError(pairs_path, line_no, "expected `u<TAB>v<TAB>direction`");
    }
    if (dir != "forward" && dir != "backward") {
      throw ParseError(pairs_path, line_no, "direction must be forward or backward");
    }
    rows.push_back({u, v, dir == "forward"});
  }
  if (rows.empty()) throw ParseError(pairs_path, line_no, "pairs file is empty");

  // Index words and retrieve each word's contexts once.
  std::vector<std::string> words;
  std::map<std::string, int> word_id;
  for (const auto& r : rows) {
    for (const auto& w : {r.u, r.v}) {
      if (word_id.emplace(w, static_cast<int>(words.size())).second) words.push_back(w);
    }
  }
  std::vector<std::vector<ContextPair>> contexts(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    contexts[i] = retrieve_contexts(corpus_path, words[i], max_contexts, case_insensitive);
    if (contexts[i].empty()) {
      throw Error("no corpus contexts found for word '" + words[i] + "'");
    }
  }

  WordnetReport report;
  report.total = static_cast<int>(rows.size());
  report.records.resize(rows.size());
  std::vector<RelationVerdict> verdicts(rows.size());
  parallel_for(rows.size(), parallelism, [&](std::size_t i) {
    const auto& cu = contexts[word_id.at(rows[i].u)];
    const auto& cv = contexts[word_id.at(rows[i].v)];
    std::vector<ContextPair> pooled;
    pooled.reserve(cu.size() + cv.size());
    pooled.insert(pooled.end(), cu.begin(), cu.end());
    pooled.insert(pooled.end(), cv.begin(), cv.end());
    verdicts[i] = hyponym_test_with_contexts(backend, rows[i].u, rows[i].v, pooled, spec, 1);
  });

  int hits = 0;
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EvalRecord& rec = report.records[i];
    rec.id = "pair-" + std::to_string(i + 1);
    rec.input_a = rows[i].u;
    rec.input_b = rows[i].v;
    rec.gold_direction = rows[i].forward ? "forward" : "backward";
    rec.predictions["ours"] = verdicts[i].margin;
    bool predicted_forward = verdicts[i].direction == Direction::forward;
    hits += predicted_forward == rows[i].forward;
    int ui = word_id.at(rows[i].u);
    int vi = word_id.at(rows[i].v);
    edges.emplace_back(predicted_forward ? ui : vi, predicted_forward ? vi : ui);
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(rows.size());
  auto [acyclic, violations] = analyze_edges(static_cast<int>(words.size()), edges);
  report.acyclic = acyclic;
  report.transitivity_violations = violations;
  return report;
}

std::string WordnetReport::to_json_text() const {
  json j;
  j["task"] = "wordnet";
  j["accuracy"] = accuracy;
  j["pairs"] = total;
  j["acyclic"] = acyclic;
  j["transitivity_violations"] = transitivity_violations;
  j["records"] = records_to_json(records, true);
  return j.dump(2);
}

std::string WordnetReport::to_table() const {
  std::ostringstream out;
  out << "pairs: " << total << "\n"
      << "accuracy: " << std::fixed << std::setprecision(4) << accuracy << "\n"
      << "acyclic: " << (acyclic ? "yes" : "no") << "\n"
      << "transitivity_violations: " << transitivity_violations << "\n";
  return out.str();
}

// --- fixed-trajectory search ------------------------------------------------

TrajectoryBank build_bank(const Backend& backend, std::span<const std::string> items,
                          int bank_size, const SamplingConfig& cfg, int parallelism) {
  cfg.validate();
  if (items.empty()) throw Error("cannot build a bank from an empty database");
  if (bank_size < 1) throw ConfigError("bank size must be >= 1");
  if (bank_size > static_cast<int>(items.size())) {
    throw ConfigError("bank size exceeds database size");
  }

  TrajectoryBank bank;
  bank.item_texts.assign(items.begin(), items.end());
  bank.config = cfg;
  bank.backend_id = backend.id();

  // Pick bank_size source items uniformly at random (partial Fisher-Yates).
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(split_seed(cfg.seed, 0x5eedba3cULL));
  for (int i = 0; i < bank_size; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.next_double() *
                                                 static_cast<double>(order.size() - i));
    std::swap(order[i], order[j]);
  }

  bank.trajectories.resize(static_cast<std::size_t>(bank_size));
  bank.trajectory_sources.resize(static_cast<std::size_t>(bank_size));
  parallel_for(static_cast<std::size_t>(bank_size), parallelism, [&](std::size_t s) {
    const std::string& source = bank.item_texts[order[s]];
    SamplingConfig one = cfg;
    one.trajectory_count = 1;
    one.seed = split_seed(cfg.seed, 0xba3c0ULL, s);
    std::vector<TokenId> prompt = prepare_prompt(backend, source, one);
    std::vector<Trajectory> t =
        sample_trajectories(backend, prompt, one, static_cast<std::int64_t>(s), 1);
    bank.trajectories[s] = std::move(t.front());
    bank.trajectory_sources[s] = source;
  });

  bank.item_vectors.assign(items.size(), {});
  parallel_for(items.size(), parallelism, [&](std::size_t i) {
    std::vector<TokenId> prompt = prepare_prompt(backend, bank.item_texts[i], cfg);
    std::vector<double> scores(bank.trajectories.size());
    for (std::size_t j = 0; j < bank.trajectories.size(); ++j) {
      scores[j] = score_continuation(backend, prompt, bank.trajectories[j]);
    }
    bank.item_vectors[i] = std::move(scores);
  });
  bank.frozen = true;
  return bank;
}

std::vector<SearchResult> search_fixed(const TrajectoryBank& bank, std::string_view query,
                                       const Backend& backend, const DistanceSpec& spec,
                                       int parallelism) {
  if (!bank.frozen || bank.trajectories.empty() || bank.item_texts.empty()) {
    throw Error("search requires a frozen, non-empty trajectory bank");
  }
  std::vector<TokenId> prompt = prepare_prompt(backend, query, bank.config);
  std::vector<double> query_scores(bank.trajectories.size());
  parallel_for(bank.trajectories.size(), parallelism, [&](std::size_t j) {
    query_scores[j] = score_continuation(backend, prompt, bank.trajectories[j]);
  });

  MeaningView query_view(bank.trajectories, query_scores);
  std::vector<SearchResult> results(bank.item_texts.size());
  for (std::size_t i = 0; i < bank.item_texts.size(); ++i) {
    MeaningView item_view(bank.trajectories, bank.item_vectors[i]);
    results[i] = {i, bank.item_texts[i], distance(query_view, item_view, spec)};
  }
  std::sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.text < b.text;  // stable under database insertion order
  });
  return results;
}

std::string TrajectoryBank::to_json_text() const {
  json j;
  j["backend_id"] = backend_id;
  j["items"] = item_texts;
  json trajs = json::array();
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    trajs.push_back({{"tokens", trajectories[s].tokens},
                     {"terminated_by", to_string(trajectories[s].terminated_by)},
                     {"origin_prompt_id", trajectories[s].origin_prompt_id},
                     {"source", trajectory_sources[s]}});
  }
  j["trajectories"] = std::move(trajs);
  j["item_vectors"] = item_vectors;
  j["config"] = {{"trajectory_count", config.trajectory_count},
                 {"max_length", config.max_length},
                 {"temperature", config.temperature},
                 {"seed", config.seed},
                 {"prompt_prefix", config.prompt_prefix},
                 {"prompt_suffix", config.prompt_suffix},
                 {"complete_with_fullstop", config.complete_with_fullstop}};
  return j.dump(2);
}

TrajectoryBank TrajectoryBank::from_json_text(const std::string& text) {
  try {
    json j = json::parse(text);
    TrajectoryBank bank;
    bank.backend_id = j.at("backend_id").get<std::string>();
    bank.item_texts = j.at("items").get<std::vector<std::string>>();
    for (const auto& t : j.at("trajectories")) {
      Trajectory traj;
      traj.tokens = t.at("tokens").get<std::vector<TokenId>>();
      traj.terminated_by = termination_from_string(t.at("terminated_by").get<std::string>());
      traj.origin_prompt_id = t.at("origin_prompt_id").get<std::int64_t>();
      bank.trajectories.push_back(std::move(traj));
      bank.trajectory_sources.push_back(t.at("source").get<std::string>());
    }
    bank.item_vectors = j.at("item_vectors").get<std::vector<std::vector<double>>>();
    const json& cfg = j.at("config");
    bank.config.trajectory_count = cfg.at("trajectory_count").get<int>();
    bank.config.max_length = cfg.at("max_length").get<int>();
    bank.config.temperature = cfg.at("temperature").get<double>();
    bank.config.seed = cfg.at("seed").get<std::uint64_t>();
    bank.config.prompt_prefix = cfg.at("prompt_prefix").get<std::string>();
    bank.config.prompt_suffix = cfg.at("prompt_suffix").get<std::string>();
    bank.config.complete_with_fullstop = cfg.at("complete_with_fullstop").get<bool>();
    for (const auto& vec : bank.item_vectors) {
      if (vec.size() != bank.trajectories.size()) {
        throw Error("bank item vector length does not match bank size");
      }
    }
    bank.frozen = true;
    return bank;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed trajectory bank json: ") + e.what());
  }
}

}  // namespace trajsem
