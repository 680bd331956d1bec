#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qdecomp/effects.hpp"
#include "qdecomp/sample.hpp"

namespace qdecomp {

inline constexpr std::size_t kDefaultQuantileReplications = 1999;
inline constexpr std::size_t kDefaultAverageReplications = 499;

enum class ResampleScheme {
  kPooled,      // n draws with replacement from the whole sample
  kStratified,  // draws within each (treatment, group) cell, cell sizes fixed
};

enum class SignificanceRule {
  kNormalRatio,         // |estimate| / se against 1.645, 1.960, 2.576
  kPercentileInterval,  // zero outside the equal-tailed bootstrap interval
};

struct BootstrapConfig {
  std::size_t replications = kDefaultQuantileReplications;
  std::uint64_t seed = 0;
  ResampleScheme scheme = ResampleScheme::kPooled;
  std::size_t threads = 0;  // 0: hardware concurrency
  double max_failure_share = 0.01;

  void validate() const;
};

// Flat vector of estimates; NaN marks an excluded entry.
using Estimates = std::vector<double>;
using Estimator = std::function<Estimates(const WeightedSample&)>;

struct Replications {
  std::vector<Estimates> draws;  // empty vector for a failed replication
  std::vector<char> failed;  // not vector<bool>: written concurrently
  std::size_t failures = 0;

  std::size_t size() const { return draws.size(); }
};

// Row indices of replication `index`. Depends only on (seed, index, scheme,
// sample layout), so any prefix of the replication sequence is reproducible
// on its own and the thread schedule does not matter.
std::vector<std::size_t> resample_rows(const WeightedSample& sample, const BootstrapConfig& config,
                                       std::size_t index);

// Runs the estimator on every replication. A replication whose estimator
// throws DataError or EstimationError counts as failed; more than
// max_failure_share failures raises EstimationError.
Replications replicate(const WeightedSample& sample, const Estimator& estimator,
                       const BootstrapConfig& config);

struct EntryInference {
  double se = 0.0;  // NaN if excluded or fewer than two usable draws
  SigCode sig = SigCode::kNone;
};

SigCode normal_ratio_code(double estimate, double se);

std::vector<EntryInference> summarize(std::span<const double> point, const Replications& reps,
                                      SignificanceRule rule = SignificanceRule::kNormalRatio);

struct BootstrapResult {
  Estimates point;
  Replications reps;
  std::vector<EntryInference> entries;
};

BootstrapResult bootstrap_se(const WeightedSample& sample, const Estimator& estimator,
                             const BootstrapConfig& config,
                             SignificanceRule rule = SignificanceRule::kNormalRatio);

struct KsResult {
  double ks = 0.0;   // sqrt(n) sup |d|
  double psd = 0.0;  // sqrt(n) sup d
  double nsd = 0.0;  // sqrt(n) inf d
  double p_ks = 1.0;
  double p_psd = 1.0;
  double p_nsd = 1.0;
  std::size_t retained = 0;
  std::size_t replications_used = 0;
};

// Kolmogorov-Smirnov statistics of an effect series over its retained
// entries, with p-values from the recentered replications d*_b - d:
//   p_ks  = share of b with sqrt(n) sup|d*_b - d| >= ks
//   p_psd = share of b with sqrt(n) sup(d*_b - d) >= psd
//   p_nsd = share of b with sqrt(n) inf(d*_b - d) <= nsd
// `offset` selects where the series starts inside each replication vector.
KsResult ks_test(std::span<const double> point, const Replications& reps, double n,
                 std::size_t offset = 0);

KsResult ks_tests(const WeightedSample& sample, const Estimator& series_estimator,
                  const BootstrapConfig& config, double n);

}  // namespace qdecomp
