#include "trajsem/engine.hpp"

#include <numeric>

#include <nlohmann/json.hpp>

#include "trajsem/errors.hpp"
#include "trajsem/parallel.hpp"
#include "trajsem/rng.hpp"

namespace trajsem {

using nlohmann::json;

std::string to_string(Termination t) {
  return t == Termination::eos ? "eos" : "max_length";
}

Termination termination_from_string(const std::string& s) {
  if (s == "eos") return Termination::eos;
  if (s == "max_length") return Termination::max_length;
  throw Error("unknown termination reason: " + s);
}

void SamplingConfig::validate() const {
  if (trajectory_count < 1) throw ConfigError("trajectory count must be >= 1");
  if (max_length < 1) throw ConfigError("max trajectory length must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
}

std::string complete_sentence(std::string_view s) {
  if (!s.empty()) {
    char last = s.back();
    if (last == '.' || last == '!' || last == '?') return std::string(s);
  }
  return std::string(s) + ".";
}

std::vector<TokenId> prepare_prompt(const Backend& backend, std::string_view text,
                                    const SamplingConfig& cfg) {
  std::string completed =
      cfg.complete_with_fullstop ? complete_sentence(text) : std::string(text);
  std::string full = cfg.prompt_prefix + completed + cfg.prompt_suffix;
  std::vector<TokenId> tokens = backend.tokenize(full);
  if (tokens.empty()) {
    Vocabulary vocab = backend.vocabulary();
    if (vocab.bos_id) tokens.push_back(*vocab.bos_id);
  }
  return tokens;
}

std::vector<Trajectory> sample_trajectories(const Backend& backend,
                                            std::span<const TokenId> prompt,
                                            const SamplingConfig& cfg,
                                            std::int64_t origin_prompt_id,
                                            int parallelism) {
  cfg.validate();
  if (!backend.capabilities().sampling) {
    throw Error("backend '" + backend.id() + "' does not support sampling");
  }
  std::optional<TokenId> eos = backend.vocabulary().eos_id;

  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.trajectory_count));
  parallel_for(out.size(), parallelism, [&](std::size_t i) {
    Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(origin_prompt_id), i));
    Trajectory traj;
    traj.origin_prompt_id = origin_prompt_id;
    std::vector<TokenId> ctx(prompt.begin(), prompt.end());
    for (int step = 0; step < cfg.max_length; ++step) {
      TokenId tok = sample_next(backend, ctx, cfg.temperature, rng);
      traj.tokens.push_back(tok);
      ctx.push_back(tok);
      if (eos && tok == *eos) {
        traj.terminated_by = Termination::eos;
        break;
      }
    }
    out[i] = std::move(traj);
  });
  return out;
}

double score_continuation(const Backend& backend, std::span<const TokenId> prompt,
                          const Trajectory& trajectory) {
  if (trajectory.tokens.empty()) throw Error("cannot score an empty trajectory");
  std::vector<double> logs = backend.continuation_logprobs(prompt, trajectory.tokens);
  double sum = std::accumulate(logs.begin(), logs.end(), 0.0);
  return sum / static_cast<double>(logs.size());
}

MeaningSample build_meaning_sample(const Backend& backend, std::span<const TokenId> prompt,
                                   std::vector<Trajectory> pool, const SamplingConfig& cfg,
                                   int parallelism) {
  MeaningSample sample;
  sample.prompt.assign(prompt.begin(), prompt.end());
  sample.prompt_text = backend.detokenize(prompt);
  sample.log_scores.assign(pool.size(), 0.0);
  parallel_for(pool.size(), parallelism, [&](std::size_t i) {
    sample.log_scores[i] = score_continuation(backend, prompt, pool[i]);
  });
  sample.support = std::move(pool);
  sample.meta.config = cfg;
  sample.meta.backend_id = backend.id();
  return sample;
}

std::string meaning_sample_to_json(const MeaningSample& sample) {
  json j;
  j["prompt_text"] = sample.prompt_text;
  j["prompt_tokens"] = sample.prompt;
  json entries = json::array();
  for (std::size_t i = 0; i < sample.support.size(); ++i) {
    entries.push_back({{"tokens", sample.support[i].tokens},
                       {"terminated_by", to_string(sample.support[i].terminated_by)},
                       {"origin_prompt_id", sample.support[i].origin_prompt_id},
                       {"log_score", sample.log_scores[i]}});
  }
  j["entries"] = std::move(entries);
  const SamplingConfig& cfg = sample.meta.config;
  j["config"] = {{"trajectory_count", cfg.trajectory_count},
                 {"max_length", cfg.max_length},
                 {"temperature", cfg.temperature},
                 {"seed", cfg.seed},
                 {"prompt_prefix", cfg.prompt_prefix},
                 {"prompt_suffix", cfg.prompt_suffix},
                 {"complete_with_fullstop", cfg.complete_with_fullstop}};
  j["backend_id"] = sample.meta.backend_id;
  return j.dump(2);
}

MeaningSample meaning_sample_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    MeaningSample sample;
    sample.prompt_text = j.at("prompt_text").get<std::string>();
    sample.prompt = j.at("prompt_tokens").get<std::vector<TokenId>>();
    for (const auto& e : j.at("entries")) {
      Trajectory traj;
      traj.tokens = e.at("tokens").get<std::vector<TokenId>>();
      traj.terminated_by = termination_from_string(e.at("terminated_by").get<std::string>());
      traj.origin_prompt_id = e.at("origin_prompt_id").get<std::int64_t>();
      sample.support.push_back(std::move(traj));
      sample.log_scores.push_back(e.at("log_score").get<double>());
    }
    const json& cfg = j.at("config");
    sample.meta.config.trajectory_count = cfg.at("trajectory_count").get<int>();
    sample.meta.config.max_length = cfg.at("max_length").get<int>();
    sample.meta.config.temperature = cfg.at("temperature").get<double>();
    sample.meta.config.seed = cfg.at("seed").get<std::uint64_t>();
    sample.meta.config.prompt_prefix = cfg.at("prompt_prefix").get<std::string>();
    sample.meta.config.prompt_suffix = cfg.at("prompt_suffix").get<std::string>();
    sample.meta.config.complete_with_fullstop = cfg.at("complete_with_fullstop").get<bool>();
    sample.meta.backend_id = j.at("backend_id").get<std::string>();
    return sample;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed meaning sample json: ") + e.what());
  }
}

}  // namespace trajsem
