#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajsem/vocabulary.hpp"

namespace trajsem {

enum class Termination { eos, max_length };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

/// One sampled continuation. Identity (all three fields) is what aligns
/// the supports of two meanings evaluated on the same pool, so duplicate
/// token sequences sampled from different prompts stay distinct entries.
struct Trajectory {
  std::vector<TokenId> tokens;
  Termination terminated_by = Termination::max_length;
  std::int64_t origin_prompt_id = 0;

  bool operator==(const Trajectory&) const = default;
};

struct SamplingConfig {
  int trajectory_count = 20;  // n
  int max_length = 20;        // m
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string prompt_prefix;
  std::string prompt_suffix;
  bool complete_with_fullstop = true;

  void validate() const;
};

struct SampleMetadata {
  SamplingConfig config;
  std::string backend_id;
};

/// Finite Monte Carlo stand-in for a meaning representation: log-scores
/// (mean per-token log-probability, floor-clamped) over a trajectory
/// multiset. `support` and `log_scores` are index-aligned.
struct MeaningSample {
  std::vector<TokenId> prompt;
  std::string prompt_text;
  std::vector<Trajectory> support;
  std::vector<double> log_scores;
  SampleMetadata meta;
};

}  // namespace trajsem
