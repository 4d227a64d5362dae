#pragma once

#include <span>
#include <string>
#include <vector>

#include "trajsem/trajectory.hpp"

namespace trajsem {

enum class DistanceKind { log_l1, log_l2, hellinger, total_variation, sym_kl };

std::string to_string(DistanceKind k);
DistanceKind distance_kind_from_string(const std::string& s);

struct DistanceSpec {
  DistanceKind kind = DistanceKind::log_l1;
  double tau = 0.5;  // used by the probability-space kinds
};

enum class LatticeOp { meet, join };

/// Entrywise min/max of two meanings over their shared support.
struct ComposedMeaning {
  std::vector<Trajectory> support;
  std::vector<double> log_scores;
  std::string parent_a;
  std::string parent_b;
  LatticeOp op = LatticeOp::meet;
};

/// Non-owning view over any meaning-like object (sampled or composed):
/// an index-aligned (support, log-scores) pair.
class MeaningView {
public:
  MeaningView(const MeaningSample& sample)
      : support_(sample.support), log_scores_(sample.log_scores) {}
  MeaningView(const ComposedMeaning& composed)
      : support_(composed.support), log_scores_(composed.log_scores) {}
  MeaningView(std::span<const Trajectory> support, std::span<const double> log_scores)
      : support_(support), log_scores_(log_scores) {}

  std::span<const Trajectory> support() const { return support_; }
  std::span<const double> log_scores() const { return log_scores_; }
  std::size_t size() const { return support_.size(); }

private:
  std::span<const Trajectory> support_;
  std::span<const double> log_scores_;
};

/// Throws SupportMismatchError unless both views carry the same
/// trajectory multiset in the same order; throws on empty supports.
void require_shared_support(MeaningView a, MeaningView b);

/**
 * Distance between two meanings evaluated on a shared support.
 *
 * log_l1 is the Monte Carlo estimator of the expected absolute
 * log-likelihood difference (the mean |Δ| over the pool); log_l2 is the
 * root-mean-square analogue. The probability-space kinds first apply
 * normalize_tau, then the named divergence restricted to the support.
 */
double distance(MeaningView a, MeaningView b, const DistanceSpec& spec = {});

/// p(t) = exp(tau * logscore(t)) / sum over the support; sums to 1.
std::vector<double> normalize_tau(std::span<const double> log_scores, double tau);

ComposedMeaning meet(MeaningView a, MeaningView b, std::string parent_a = "",
                     std::string parent_b = "");
ComposedMeaning join(MeaningView a, MeaningView b, std::string parent_a = "",
                     std::string parent_b = "");

/// d(a∧b, a) - d(a∧b, b): negative when a is the more contained side.
double containment_score(MeaningView a, MeaningView b, const DistanceSpec& spec = {});

}  // namespace trajsem
