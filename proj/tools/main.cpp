// trajsem: meanings of strings as score distributions over sampled
// continuation trajectories. See README.md for the command reference.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trajsem/crisp.hpp"
#include "trajsem/crisp_backend.hpp"
#include "trajsem/engine.hpp"
#include "trajsem/errors.hpp"
#include "trajsem/eval.hpp"
#include "trajsem/http_backend.hpp"
#include "trajsem/meaning.hpp"
#include "trajsem/ngram.hpp"
#include "trajsem/relations.hpp"
#include "trajsem/uniform_backend.hpp"

namespace {

using nlohmann::json;
using namespace trajsem;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;  // `automata check` with failing properties
constexpr int kExitUsage = 2;        // bad flags, bad config, unreadable/malformed files
constexpr int kExitBackend = 3;      // transport or model errors

struct RunConfig {
  // backend selection
  std::string backend = "uniform";
  std::string corpus;
  std::string model_file;
  std::string dfa_path;
  std::string url;
  std::string model;
  std::vector<std::string> tokens{"a", "b", "c", "d"};
  bool uniform_eos = false;
  int order = 1;
  double smoothing = 0.0;
  int logprobs = 20;
  std::string eos_text;
  std::size_t max_context = 4096;
  int http_parallelism = 4;

  // sampling (paper defaults)
  SamplingConfig sampling;

  // distance
  std::string distance = "log_l1";
  double tau = 0.5;

  // run
  int parallelism = 1;
  std::string output = "table";
  std::string out_path;
  std::string config_path;

  DistanceSpec spec() const { return DistanceSpec{distance_kind_from_string(distance), tau}; }
};

struct CommonOpts {
  RunConfig rc;
  bool no_fullstop = false;
  std::map<std::string, CLI::Option*> options;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  auto& rc = o.rc;
  auto track = [&](const std::string& key, CLI::Option* opt) { o.options[key] = opt; };

  track("backend", cmd->add_option("--backend", rc.backend, "Backend kind")
                       ->check(CLI::IsMember({"uniform", "ngram", "crisp", "http"})));
  track("corpus", cmd->add_option("--corpus", rc.corpus, "Training corpus (ngram backend)"));
  track("model_file",
        cmd->add_option("--model-file", rc.model_file, "Saved ngram model JSON"));
  track("dfa", cmd->add_option("--dfa", rc.dfa_path, "DFA description file (crisp backend)"));
  track("url", cmd->add_option("--url", rc.url, "Base URL of an OpenAI-compatible server"));
  track("model", cmd->add_option("--model", rc.model, "Model name for the http backend"));
  track("tokens",
        cmd->add_option("--tokens", rc.tokens, "Token inventory for the uniform backend"));
  track("uniform_eos",
        cmd->add_flag("--uniform-eos", rc.uniform_eos, "Give the uniform backend an EOS token"));
  track("order", cmd->add_option("--order", rc.order, "ngram history length"));
  track("smoothing", cmd->add_option("--smoothing", rc.smoothing, "ngram additive smoothing"));
  track("logprobs", cmd->add_option("--logprobs", rc.logprobs, "Top-K logprobs requested"));
  track("eos_text", cmd->add_option("--eos-text", rc.eos_text,
                                    "Token surface treated as EOS by the http backend"));
  track("max_context", cmd->add_option("--max-context", rc.max_context,
                                       "Context window of the http backend"));
  track("http_parallelism", cmd->add_option("--http-parallelism", rc.http_parallelism,
                                            "Max concurrent http requests"));

  track("n", cmd->add_option("-n,--trajectories", rc.sampling.trajectory_count,
                             "Trajectories per prompt"));
  track("m", cmd->add_option("-m,--max-length", rc.sampling.max_length,
                             "Max trajectory length"));
  track("temperature",
        cmd->add_option("--temperature", rc.sampling.temperature, "Sampling temperature"));
  track("seed", cmd->add_option("--seed", rc.sampling.seed, "Random seed"));
  track("prompt_prefix",
        cmd->add_option("--prompt-prefix", rc.sampling.prompt_prefix, "Template prefix"));
  track("prompt_suffix",
        cmd->add_option("--prompt-suffix", rc.sampling.prompt_suffix, "Template suffix"));
  track("no_fullstop",
        cmd->add_flag("--no-fullstop", o.no_fullstop, "Skip full-stop completion"));

  track("distance", cmd->add_option("--distance", rc.distance, "Distance kind")
                        ->check(CLI::IsMember(
                            {"log_l1", "log_l2", "hellinger", "total_variation", "sym_kl"})));
  track("tau", cmd->add_option("--tau", rc.tau, "Likelihood-to-probability exponent"));

  track("parallelism", cmd->add_option("--parallelism", rc.parallelism, "Worker threads"));
  track("output", cmd->add_option("--output", rc.output, "Output format")
                      ->check(CLI::IsMember({"json", "table"})));
  track("out", cmd->add_option("--out", rc.out_path, "Write the JSON report to this file"));
  cmd->add_option("--config", rc.config_path, "JSON config file (flags take precedence)");
}

/// Applies config-file values for every option the user did not pass on
/// the command line. Unknown keys are rejected.
void apply_config_file(CommonOpts& o) {
  if (o.rc.config_path.empty()) return;
  std::ifstream in(o.rc.config_path);
  if (!in) throw ConfigError("cannot open config file: " + o.rc.config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("bad config file: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

  auto& rc = o.rc;
  for (const auto& [key, value] : j.items()) {
    auto it = o.options.find(key);
    if (it == o.options.end()) throw ConfigError("unknown config key: " + key);
    if (it->second->count() > 0) continue;  // flag wins over config file
    try {
      if (key == "backend") rc.backend = value.get<std::string>();
      else if (key == "corpus") rc.corpus = value.get<std::string>();
      else if (key == "model_file") rc.model_file = value.get<std::string>();
      else if (key == "dfa") rc.dfa_path = value.get<std::string>();
      else if (key == "url") rc.url = value.get<std::string>();
      else if (key == "model") rc.model = value.get<std::string>();
      else if (key == "tokens") rc.tokens = value.get<std::vector<std::string>>();
      else if (key == "uniform_eos") rc.uniform_eos = value.get<bool>();
      else if (key == "order") rc.order = value.get<int>();
      else if (key == "smoothing") rc.smoothing = value.get<double>();
      else if (key == "logprobs") rc.logprobs = value.get<int>();
      else if (key == "eos_text") rc.eos_text = value.get<std::string>();
      else if (key == "max_context") rc.max_context = value.get<std::size_t>();
      else if (key == "http_parallelism") rc.http_parallelism = value.get<int>();
      else if (key == "n") rc.sampling.trajectory_count = value.get<int>();
      else if (key == "m") rc.sampling.max_length = value.get<int>();
      else if (key == "temperature") rc.sampling.temperature = value.get<double>();
      else if (key == "seed") rc.sampling.seed = value.get<std::uint64_t>();
      else if (key == "prompt_prefix") rc.sampling.prompt_prefix = value.get<std::string>();
      else if (key == "prompt_suffix") rc.sampling.prompt_suffix = value.get<std::string>();
      else if (key == "no_fullstop") o.no_fullstop = value.get<bool>();
      else if (key == "distance") rc.distance = value.get<std::string>();
      else if (key == "tau") rc.tau = value.get<double>();
      else if (key == "parallelism") rc.parallelism = value.get<int>();
      else if (key == "output") rc.output = value.get<std::string>();
      else if (key == "out") rc.out_path = value.get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for config key '" + key + "': " + e.what());
    }
  }
}

void finalize(CommonOpts& o) {
  apply_config_file(o);
  o.rc.sampling.complete_with_fullstop = !o.no_fullstop;
  o.rc.sampling.validate();
  if (o.rc.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  o.rc.spec();  // validates the distance kind
  if (o.rc.tau <= 0.0) throw ConfigError("tau must be positive");
}

BackendPtr make_backend(const RunConfig& rc) {
  if (rc.backend == "uniform") {
    Vocabulary vocab;
    vocab.tokens = rc.tokens;
    if (rc.uniform_eos) {
      vocab.tokens.push_back(kEosSurface);
      vocab.eos_id = static_cast<TokenId>(vocab.tokens.size() - 1);
    }
    return std::make_shared<UniformBackend>(std::move(vocab));
  }
  if (rc.backend == "ngram") {
    if (!rc.model_file.empty()) return load_ngram_file(rc.model_file);
    if (rc.corpus.empty()) throw ConfigError("ngram backend needs --corpus or --model-file");
    return train_ngram(rc.corpus, rc.order, rc.smoothing);
  }
  if (rc.backend == "crisp") {
    if (rc.dfa_path.empty()) throw ConfigError("crisp backend needs --dfa");
    return load_crisp_backend(rc.dfa_path);
  }
  if (rc.backend == "http") {
    HttpBackendConfig config;
    config.base_url = rc.url;
    config.model = rc.model;
    config.logprobs = rc.logprobs;
    config.parallelism = rc.http_parallelism;
    if (!rc.eos_text.empty()) config.eos_text = rc.eos_text;
    config.max_context = rc.max_context;
    config.seed = rc.sampling.seed;
    return std::make_shared<HttpBackend>(std::move(config));
  }
  throw ConfigError("unknown backend kind: " + rc.backend);
}

void emit(const RunConfig& rc, const std::string& table_text, const std::string& json_text) {
  if (rc.output == "json") std::cout << json_text << "\n";
  else std::cout << table_text;
  if (!rc.out_path.empty()) {
    std::ofstream out(rc.out_path);
    if (!out) throw Error("cannot write report file: " + rc.out_path);
    out << json_text << "\n";
  }
}

// --- subcommands -----------------------------------------------------------

int cmd_sim(const CommonOpts& o, const std::string& u, const std::string& v) {
  const RunConfig& rc = o.rc;
  BackendPtr backend = make_backend(rc);
  SimResult sim = similarity(*backend, u, v, rc.sampling, rc.spec(), rc.parallelism);

  json j;
  j["u"] = u;
  j["v"] = v;
  j["distance"] = sim.distance;
  j["kind"] = rc.distance;
  json trajs = json::array();
  for (std::size_t i = 0; i < sim.meaning_u.support.size(); ++i) {
    const Trajectory& t = sim.meaning_u.support[i];
    trajs.push_back({{"text", backend->detokenize(t.tokens)},
                     {"tokens", t.tokens},
                     {"origin_prompt_id", t.origin_prompt_id},
                     {"terminated_by", to_string(t.terminated_by)},
                     {"log_score_u", sim.meaning_u.log_scores[i]},
                     {"log_score_v", sim.meaning_v.log_scores[i]}});
  }
  j["trajectories"] = std::move(trajs);

  std::ostringstream table;
  table << "distance (" << rc.distance << "): " << sim.distance << "\n";
  table << "trajectory\tlog M_u\tlog M_v\n";
  for (std::size_t i = 0; i < sim.meaning_u.support.size(); ++i) {
    table << backend->detokenize(sim.meaning_u.support[i].tokens) << "\t"
          << sim.meaning_u.log_scores[i] << "\t" << sim.meaning_v.log_scores[i] << "\n";
  }
  emit(rc, table.str(), j.dump(2));
  return kExitOk;
}

json verdict_json(const RelationVerdict& v, const char* kind) {
  return json{{"kind", kind},
              {"u", v.pair_a},
              {"v", v.pair_b},
              {"direction", to_string(v.direction)},
              {"margin", v.margin},
              {"notes", v.notes}};
}

int cmd_entail(const CommonOpts& o, const std::string& u, const std::string& v) {
  const RunConfig& rc = o.rc;
  BackendPtr backend = make_backend(rc);
  RelationVerdict verdict =
      entailment_test(*backend, u, v, rc.sampling, rc.spec(), rc.parallelism);
  std::ostringstream table;
  table << (verdict.direction == Direction::forward ? "u => v" : "v => u")
        << "  (margin " << verdict.margin << ")\n";
  for (const auto& note : verdict.notes) table << "note: " << note << "\n";
  emit(rc, table.str(), verdict_json(verdict, "entailment").dump(2));
  return kExitOk;
}

int cmd_hyponym(const CommonOpts& o, const std::string& u, const std::string& v,
                int max_contexts, bool case_insensitive) {
  const RunConfig& rc = o.rc;
  if (rc.corpus.empty()) throw ConfigError("hyponym needs --corpus");
  BackendPtr backend = make_backend(rc);
  RelationVerdict verdict = hyponym_test(*backend, u, v, rc.corpus, rc.spec(), max_contexts,
                                         case_insensitive, rc.parallelism);
  std::ostringstream table;
  table << (verdict.direction == Direction::forward ? "'" + u + "' is a hyponym of '" + v + "'"
                                                    : "'" + v + "' is a hyponym of '" + u + "'")
        << "  (margin " << verdict.margin << ")\n";
  for (const auto& note : verdict.notes) table << "note: " << note << "\n";
  emit(rc, table.str(), verdict_json(verdict, "hyponym").dump(2));
  return kExitOk;
}

int cmd_eval_sts(const CommonOpts& o, const std::string& data,
                 std::vector<std::string> methods) {
  const RunConfig& rc = o.rc;
  BackendPtr backend = make_backend(rc);
  if (methods.empty()) methods = sts_method_names();
  StsReport report = run_sts(*backend, data, methods, rc.sampling, rc.spec(), rc.parallelism);
  emit(rc, report.to_table(), report.to_json_text());
  return kExitOk;
}

int cmd_eval_entail(const CommonOpts& o, const std::string& data) {
  const RunConfig& rc = o.rc;
  BackendPtr backend = make_backend(rc);
  EntailmentReport report =
      run_entailment_eval(*backend, data, rc.sampling, rc.spec(), rc.parallelism);
  emit(rc, report.to_table(), report.to_json_text());
  return kExitOk;
}

int cmd_eval_wordnet(const CommonOpts& o, const std::string& data, int max_contexts,
                     bool case_insensitive) {
  const RunConfig& rc = o.rc;
  if (rc.corpus.empty()) throw ConfigError("wordnet eval needs --corpus");
  BackendPtr backend = make_backend(rc);
  WordnetReport report = run_wordnet_eval(*backend, data, rc.corpus, rc.spec(), max_contexts,
                                          case_insensitive, rc.parallelism);
  emit(rc, report.to_table(), report.to_json_text());
  return kExitOk;
}

int cmd_search(const CommonOpts& o, const std::string& db_path, const std::string& query,
               int bank_size, const std::string& save_bank, const std::string& load_bank,
               int top) {
  const RunConfig& rc = o.rc;
  BackendPtr backend = make_backend(rc);

  TrajectoryBank bank;
  if (!load_bank.empty()) {
    std::ifstream in(load_bank);
    if (!in) throw Error("cannot open bank file: " + load_bank);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    bank = TrajectoryBank::from_json_text(buffer.str());
  } else {
    std::ifstream in(db_path);
    if (!in) throw Error("cannot open database file: " + db_path);
    std::vector<std::string> items;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) items.push_back(line);
    }
    if (bank_size <= 0) bank_size = std::min<int>(20, static_cast<int>(items.size()));
    bank = build_bank(*backend, items, bank_size, rc.sampling, rc.parallelism);
  }
  if (!save_bank.empty()) {
    std::ofstream out(save_bank);
    if (!out) throw Error("cannot write bank file: " + save_bank);
    out << bank.to_json_text() << "\n";
  }
  if (query.empty()) return kExitOk;  // bank-building run

  auto results = search_fixed(bank, query, *backend, rc.spec(), rc.parallelism);
  if (top > 0 && static_cast<std::size_t>(top) < results.size()) results.resize(top);

  json j;
  j["query"] = query;
  j["kind"] = rc.distance;
  json ranked = json::array();
  std::ostringstream table;
  table << "rank\tdistance\ttext\n";
  for (std::size_t r = 0; r < results.size(); ++r) {
    ranked.push_back({{"rank", r + 1},
                      {"distance", results[r].distance},
                      {"text", results[r].text},
                      {"item_index", results[r].item_index}});
    table << r + 1 << "\t" << results[r].distance << "\t" << results[r].text << "\n";
  }
  j["results"] = std::move(ranked);
  emit(rc, table.str(), j.dump(2));
  return kExitOk;
}

json crisp_report_json(const CrispCheckReport& r) {
  json morphism{{"prefixes_checked", r.morphism.prefixes_checked},
                {"transition_ok", r.morphism.transition_ok},
                {"observation_ok", r.morphism.observation_ok},
                {"violations", json::array()}};
  for (const auto& [word, symbol] : r.morphism.violations) {
    morphism["violations"].push_back({{"prefix", word}, {"symbol", symbol}});
  }
  return json{{"k", r.k},
              {"roundtrip_identity", r.roundtrip_identity},
              {"predicate_prefix_closed", r.predicate_prefix_closed},
              {"quotient_composition", r.quotient_composition},
              {"feasible_prompts_checked", r.feasible_prompts_checked},
              {"infeasible_prompts_seen", r.infeasible_prompts_seen},
              {"prompted_equals_quotient", r.prompted_equals_quotient_all},
              {"minimal_states", r.minimal_states},
              {"hopcroft_states", r.hopcroft_states},
              {"minimization_agreement", r.minimization_agreement},
              {"minimal_idempotent", r.minimal_idempotent},
              {"syntactic_class_count", r.syntactic_class_count},
              {"congruence_refines_quotients", r.congruence_refines_quotients},
              {"universal_morphism_ok", r.morphism.ok()},
              {"all_passed", r.all_passed()}};
}

int cmd_automata_check(const CommonOpts& o, const std::string& dfa_path, int k) {
  Dfa dfa = load_dfa_file(dfa_path);
  CrispCheckReport report = run_crisp_checks(dfa, k);
  json j = crisp_report_json(report);
  std::cout << j.dump(2) << "\n";
  if (!o.rc.out_path.empty()) {
    std::ofstream out(o.rc.out_path);
    if (!out) throw Error("cannot write report file: " + o.rc.out_path);
    out << j.dump(2) << "\n";
  }
  return report.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_ngram_train(const CommonOpts& o, const std::string& out_path) {
  const RunConfig& rc = o.rc;
  if (rc.corpus.empty()) throw ConfigError("ngram train needs --corpus");
  auto backend = train_ngram(rc.corpus, rc.order, rc.smoothing);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write model file: " + out_path);
  out << backend->to_json_text() << "\n";
  Vocabulary vocab = backend->vocabulary();
  std::cout << "trained order-" << rc.order << " model on " << rc.corpus << "\n"
            << "vocabulary: " << vocab.size() << " tokens\n"
            << "saved to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meaning representations from continuation-trajectory scores"};
  app.require_subcommand(1);

  CommonOpts sim_opts, entail_opts, hypo_opts, sts_opts, entail_eval_opts, wordnet_opts,
      search_opts, automata_opts, train_opts;

  std::string arg_u, arg_v, arg_data, arg_db, arg_query, arg_save_bank, arg_load_bank,
      arg_dfa, arg_model_out;
  std::vector<std::string> arg_methods;
  int arg_max_contexts = 100;
  int arg_k = 6;
  int arg_bank_size = 0;
  int arg_top = 0;
  bool arg_ci = false;

  CLI::App* sim = app.add_subcommand("sim", "Similarity between two strings");
  sim->add_option("u", arg_u, "First string")->required();
  sim->add_option("v", arg_v, "Second string")->required();
  add_common(sim, sim_opts);

  CLI::App* entail = app.add_subcommand("entail", "Entailment direction between two strings");
  entail->add_option("u", arg_u, "First string")->required();
  entail->add_option("v", arg_v, "Second string")->required();
  add_common(entail, entail_opts);

  CLI::App* hyponym = app.add_subcommand("hyponym", "Hyponym direction between two words");
  hyponym->add_option("u", arg_u, "First word")->required();
  hyponym->add_option("v", arg_v, "Second word")->required();
  hyponym->add_option("--max-contexts", arg_max_contexts, "Contexts retrieved per word");
  hyponym->add_flag("--case-insensitive", arg_ci, "Case-insensitive word matching");
  add_common(hyponym, hypo_opts);

  CLI::App* eval = app.add_subcommand("eval", "Benchmark runners");
  eval->require_subcommand(1);
  CLI::App* eval_sts = eval->add_subcommand("sts", "Semantic textual similarity (TSV)");
  eval_sts->add_option("--data", arg_data, "TSV dataset")->required();
  eval_sts->add_option("--methods", arg_methods, "Methods to evaluate");
  add_common(eval_sts, sts_opts);
  CLI::App* eval_entail = eval->add_subcommand("entail", "Entailment direction (JSONL)");
  eval_entail->add_option("--data", arg_data, "JSONL dataset")->required();
  add_common(eval_entail, entail_eval_opts);
  CLI::App* eval_wordnet = eval->add_subcommand("wordnet", "Hyponym/hypernym pairs (TSV)");
  eval_wordnet->add_option("--data", arg_data, "Pairs file")->required();
  eval_wordnet->add_option("--max-contexts", arg_max_contexts, "Contexts retrieved per word");
  eval_wordnet->add_flag("--case-insensitive", arg_ci, "Case-insensitive word matching");
  add_common(eval_wordnet, wordnet_opts);

  CLI::App* search = app.add_subcommand("search", "Fixed-trajectory semantic search");
  search->add_option("--db", arg_db, "Database file, one item per line");
  search->add_option("--query", arg_query, "Query string");
  search->add_option("--bank-size", arg_bank_size, "Trajectories in the fixed bank");
  search->add_option("--save-bank", arg_save_bank, "Write the frozen bank JSON here");
  search->add_option("--load-bank", arg_load_bank, "Load a frozen bank instead of building");
  search->add_option("--top", arg_top, "Keep only the best K results");
  add_common(search, search_opts);

  CLI::App* automata = app.add_subcommand("automata", "Crisp-automata tools");
  automata->require_subcommand(1);
  CLI::App* check = automata->add_subcommand("check", "Run the crisp property suite");
  check->add_option("--k", arg_k, "Enumeration bound");
  add_common(check, automata_opts);  // supplies --dfa

  CLI::App* ngram = app.add_subcommand("ngram", "ngram model tools");
  ngram->require_subcommand(1);
  CLI::App* train = ngram->add_subcommand("train", "Train and save an ngram model");
  train->add_option("--out", arg_model_out, "Output model JSON")->required();
  add_common(train, train_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      finalize(sim_opts);
      return cmd_sim(sim_opts, arg_u, arg_v);
    }
    if (entail->parsed()) {
      finalize(entail_opts);
      return cmd_entail(entail_opts, arg_u, arg_v);
    }
    if (hyponym->parsed()) {
      finalize(hypo_opts);
      return cmd_hyponym(hypo_opts, arg_u, arg_v, arg_max_contexts, arg_ci);
    }
    if (eval_sts->parsed()) {
      finalize(sts_opts);
      return cmd_eval_sts(sts_opts, arg_data, arg_methods);
    }
    if (eval_entail->parsed()) {
      finalize(entail_eval_opts);
      return cmd_eval_entail(entail_eval_opts, arg_data);
    }
    if (eval_wordnet->parsed()) {
      finalize(wordnet_opts);
      return cmd_eval_wordnet(wordnet_opts, arg_data, arg_max_contexts, arg_ci);
    }
    if (search->parsed()) {
      finalize(search_opts);
      if (arg_db.empty() && arg_load_bank.empty()) {
        throw ConfigError("search needs --db or --load-bank");
      }
      return cmd_search(search_opts, arg_db, arg_query, arg_bank_size, arg_save_bank,
                        arg_load_bank, arg_top);
    }
    if (check->parsed()) {
      finalize(automata_opts);
      if (arg_k < 1) throw ConfigError("--k must be >= 1");
      if (automata_opts.rc.dfa_path.empty()) throw ConfigError("automata check needs --dfa");
      return cmd_automata_check(automata_opts, automata_opts.rc.dfa_path, arg_k);
    }
    if (train->parsed()) {
      finalize(train_opts);
      return cmd_ngram_train(train_opts, arg_model_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    // Unreadable input files are usage errors; model-side failures are not.
    return std::string(e.what()).find("cannot open") == 0 ? kExitUsage : kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  }
  return kExitUsage;
}
