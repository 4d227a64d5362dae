#include "trajsem/meaning.hpp"

#include <algorithm>
#include <cmath>

#include "trajsem/backend.hpp"
#include "trajsem/errors.hpp"

namespace trajsem {

std::string to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::log_l1: return "log_l1";
    case DistanceKind::log_l2: return "log_l2";
    case DistanceKind::hellinger: return "hellinger";
    case DistanceKind::total_variation: return "total_variation";
    case DistanceKind::sym_kl: return "sym_kl";
  }
  return "unknown";
}

DistanceKind distance_kind_from_string(const std::string& s) {
  if (s == "log_l1") return DistanceKind::log_l1;
  if (s == "log_l2") return DistanceKind::log_l2;
  if (s == "hellinger") return DistanceKind::hellinger;
  if (s == "total_variation" || s == "tv") return DistanceKind::total_variation;
  if (s == "sym_kl") return DistanceKind::sym_kl;
  throw ConfigError("unknown distance kind: " + s);
}

void require_shared_support(MeaningView a, MeaningView b) {
  if (a.size() == 0 || b.size() == 0) {
    throw SupportMismatchError("meaning support is empty");
  }
  if (a.size() != b.size()) {
    throw SupportMismatchError("support sizes differ: " + std::to_string(a.size()) +
                               " vs " + std::to_string(b.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.support()[i] == b.support()[i])) {
      throw SupportMismatchError("supports differ at entry " + std::to_string(i));
    }
  }
}

std::vector<double> normalize_tau(std::span<const double> log_scores, double tau) {
  if (log_scores.empty()) throw SupportMismatchError("cannot normalize an empty support");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  double max_v = log_scores[0] * tau;
  for (double x : log_scores) max_v = std::max(max_v, x * tau);
  double total = 0.0;
  std::vector<double> out(log_scores.size());
  for (std::size_t i = 0; i < log_scores.size(); ++i) {
    out[i] = std::exp(log_scores[i] * tau - max_v);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

namespace {

double probability_space_distance(MeaningView a, MeaningView b, const DistanceSpec& spec) {
  std::vector<double> p = normalize_tau(a.log_scores(), spec.tau);
  std::vector<double> q = normalize_tau(b.log_scores(), spec.tau);
  switch (spec.kind) {
    case DistanceKind::hellinger: {
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        acc += d * d;
      }
      return std::sqrt(0.5 * acc);
    }
    case DistanceKind::total_variation: {
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
      return 0.5 * acc;
    }
    case DistanceKind::sym_kl: {
      // 1/2 (KL(p||q) + KL(q||p)) with floor-clamped logs, which keeps the
      // value finite and the per-entry terms nonnegative.
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        double lp = clamp_logprob(std::log(p[i]));
        double lq = clamp_logprob(std::log(q[i]));
        acc += 0.5 * (p[i] - q[i]) * (lp - lq);
      }
      return acc;
    }
    default: throw Error("not a probability-space distance");
  }
}

}  // namespace

double distance(MeaningView a, MeaningView b, const DistanceSpec& spec) {
  require_shared_support(a, b);
  switch (spec.kind) {
    case DistanceKind::log_l1: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::abs(a.log_scores()[i] - b.log_scores()[i]);
      }
      return acc / static_cast<double>(a.size());
    }
    case DistanceKind::log_l2: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a.log_scores()[i] - b.log_scores()[i];
        acc += d * d;
      }
      return std::sqrt(acc / static_cast<double>(a.size()));
    }
    default: return probability_space_distance(a, b, spec);
  }
}

namespace {

ComposedMeaning compose(MeaningView a, MeaningView b, LatticeOp op, std::string parent_a,
                        std::string parent_b) {
  require_shared_support(a, b);
  ComposedMeaning out;
  out.support.assign(a.support().begin(), a.support().end());
  out.log_scores.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a.log_scores()[i];
    double y = b.log_scores()[i];
    out.log_scores[i] = op == LatticeOp::meet ? std::min(x, y) : std::max(x, y);
  }
  out.parent_a = std::move(parent_a);
  out.parent_b = std::move(parent_b);
  out.op = op;
  return out;
}

}  // namespace

ComposedMeaning meet(MeaningView a, MeaningView b, std::string parent_a,
                     std::string parent_b) {
  return compose(a, b, LatticeOp::meet, std::move(parent_a), std::move(parent_b));
}

ComposedMeaning join(MeaningView a, MeaningView b, std::string parent_a,
                     std::string parent_b) {
  return compose(a, b, LatticeOp::join, std::move(parent_a), std::move(parent_b));
}

double containment_score(MeaningView a, MeaningView b, const DistanceSpec& spec) {
  ComposedMeaning m = meet(a, b);
  return distance(m, a, spec) - distance(m, b, spec);
}

}  // namespace trajsem
