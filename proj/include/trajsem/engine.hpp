#pragma once

#include <span>
#include <string_view>

#include "trajsem/backend.hpp"
#include "trajsem/trajectory.hpp"

namespace trajsem {

/// Appends "." unless the string already ends in '.', '!' or '?'.
/// The empty string completes to ".".
std::string complete_sentence(std::string_view s);

/// Applies full-stop completion and the configured prompt prefix/suffix,
/// then tokenizes. An empty result becomes [BOS] when the backend has
/// one, else the empty token sequence.
std::vector<TokenId> prepare_prompt(const Backend& backend, std::string_view text,
                                    const SamplingConfig& cfg);

/**
 * Samples cfg.trajectory_count continuations of `prompt`, each ending at
 * EOS or cfg.max_length, whichever comes first. Per-trajectory random
 * streams are split from (cfg.seed, origin_prompt_id, index), so results
 * are identical for any parallelism.
 */
std::vector<Trajectory> sample_trajectories(const Backend& backend,
                                            std::span<const TokenId> prompt,
                                            const SamplingConfig& cfg,
                                            std::int64_t origin_prompt_id = 0,
                                            int parallelism = 1);

/// Mean floor-clamped per-token log-probability of the trajectory's
/// tokens after `prompt` (EOS, when present, scores like any token).
double score_continuation(const Backend& backend, std::span<const TokenId> prompt,
                          const Trajectory& trajectory);

/// Scores every trajectory of `pool` under `prompt`, preserving pool
/// order and multiplicity.
MeaningSample build_meaning_sample(const Backend& backend, std::span<const TokenId> prompt,
                                   std::vector<Trajectory> pool, const SamplingConfig& cfg,
                                   int parallelism = 1);

/// JSON round-trip for cache reuse and the fixed-trajectory search mode.
std::string meaning_sample_to_json(const MeaningSample& sample);
MeaningSample meaning_sample_from_json(const std::string& text);

}  // namespace trajsem
