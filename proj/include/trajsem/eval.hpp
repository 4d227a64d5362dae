#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "trajsem/backend.hpp"
#include "trajsem/engine.hpp"
#include "trajsem/meaning.hpp"
#include "trajsem/relations.hpp"

namespace trajsem {

/// One benchmark item; `predictions` maps method name to its score.
struct EvalRecord {
  std::string id;
  std::string input_a;
  std::string input_b;
  double gold_score = 0.0;
  std::string gold_direction;  // entailment/wordnet tasks
  std::map<std::string, double> predictions;
};

/// Spearman rank correlation (average ranks on ties), scaled by 100.
/// Throws on length mismatch, n < 2, or constant input.
double spearman_x100(std::span<const double> pred, std::span<const double> gold);

/// Registered similarity methods for run_sts.
const std::vector<std::string>& sts_method_names();

/// Our pipeline for one pair: full-stop completion, trajectory sampling
/// from both prompts, scoring on the pooled support, spec distance.
struct SimResult {
  double distance = 0.0;
  MeaningSample meaning_u;
  MeaningSample meaning_v;
};

SimResult similarity(const Backend& backend, std::string_view u, std::string_view v,
                     const SamplingConfig& cfg, const DistanceSpec& spec = {},
                     int parallelism = 1);

// --- baselines -----------------------------------------------------------

/// M(u|v): mean log-probability of u as a continuation of v.
/// With `symmetric`, max(M(u|v), M(v|u)).
double baseline_cond_likelihood(const Backend& backend, std::string_view u,
                                std::string_view v, bool fullstop = true,
                                bool symmetric = false);

/// Per-token-normalized log-score of the concatenation uv, scored from
/// BOS when available, else conditioned on the first token.
double baseline_joint_likelihood(const Backend& backend, std::string_view u,
                                 std::string_view v, bool fullstop = true);

enum class TokenCosineMode { last, mean };

/// Cosine similarity between next-token probability vectors (mode=last)
/// or mean next-token vectors over input positions (mode=mean), over the
/// union of reported entries with floor mass for the missing ones.
double baseline_token_cosine(const Backend& backend, std::string_view u, std::string_view v,
                             TokenCosineMode mode, bool fullstop = true);

// --- benchmark runners ---------------------------------------------------

struct StsReport {
  std::vector<EvalRecord> records;
  std::map<std::string, double> spearman;             // method -> Spearman x100
  std::map<std::string, bool> fullstop_chosen;        // baselines: which variant won
  std::string to_json_text() const;
  std::string to_table() const;
};

/// Dataset: TSV `sentence1<TAB>sentence2<TAB>score`. Unknown method names
/// are rejected. Baselines are scored with and without full-stop
/// completion and the better Spearman is reported; ours always completes.
StsReport run_sts(const Backend& backend, const std::string& dataset_path,
                  std::span<const std::string> methods, const SamplingConfig& cfg,
                  const DistanceSpec& spec = {}, int parallelism = 1);

struct EntailmentReport {
  std::vector<EvalRecord> records;
  std::map<std::string, double> accuracy;
  int total = 0;
  std::string to_json_text() const;
  std::string to_table() const;
};

/// Dataset: JSONL {"u": ..., "v": ..., "direction": "forward"|"backward"}.
/// Scores the Entailment Test plus both likelihood baselines.
EntailmentReport run_entailment_eval(const Backend& backend, const std::string& dataset_path,
                                     const SamplingConfig& cfg, const DistanceSpec& spec = {},
                                     int parallelism = 1);

struct WordnetReport {
  std::vector<EvalRecord> records;
  double accuracy = 0.0;
  int total = 0;
  bool acyclic = true;
  int transitivity_violations = 0;
  std::string to_json_text() const;
  std::string to_table() const;
};

/// Pairs file: `u<TAB>v<TAB>gold_direction` with forward = "u is a
/// hyponym of v". Contexts come from the corpus; the predicted edge set
/// is checked for cycles.
WordnetReport run_wordnet_eval(const Backend& backend, const std::string& pairs_path,
                               const std::string& corpus_path, const DistanceSpec& spec = {},
                               int max_contexts = 100, bool case_insensitive = false,
                               int parallelism = 1);

// --- fixed-trajectory semantic search -------------------------------------

/// Frozen support for constant-cost query scoring: one trajectory per
/// sampled database item, with every item's score vector precomputed.
struct TrajectoryBank {
  std::vector<std::string> item_texts;
  std::vector<Trajectory> trajectories;
  std::vector<std::string> trajectory_sources;       // item each trajectory extends
  std::vector<std::vector<double>> item_vectors;     // [item][trajectory]
  SamplingConfig config;
  std::string backend_id;
  bool frozen = false;

  std::string to_json_text() const;
  static TrajectoryBank from_json_text(const std::string& text);
};

TrajectoryBank build_bank(const Backend& backend, std::span<const std::string> items,
                          int bank_size, const SamplingConfig& cfg, int parallelism = 1);

struct SearchResult {
  std::size_t item_index = 0;
  std::string text;
  double distance = 0.0;
};

/// Scores the query once over the bank support and ranks items by spec
/// distance (ties by text, so ranking ignores insertion order).
std::vector<SearchResult> search_fixed(const TrajectoryBank& bank, std::string_view query,
                                       const Backend& backend, const DistanceSpec& spec = {},
                                       int parallelism = 1);

}  // namespace trajsem
