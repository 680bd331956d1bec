#include "qdecomp/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "qdecomp/errors.hpp"
#include "qdecomp/rng.hpp"
#include "qdecomp/wstat.hpp"

namespace qdecomp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void BootstrapConfig::validate() const {
  if (replications < 1) throw ConfigError("bootstrap needs at least one replication");
  if (!(max_failure_share >= 0.0 && max_failure_share < 1.0)) {
    throw ConfigError("max_failure_share must lie in [0, 1)");
  }
}

std::vector<std::size_t> resample_rows(const WeightedSample& sample, const BootstrapConfig& config,
                                       std::size_t index) {
  const CounterStream stream(config.seed, index);
  const std::size_t n = sample.size();
  std::vector<std::size_t> rows(n);
  if (config.scheme == ResampleScheme::kPooled) {
    for (std::size_t i = 0; i < n; ++i) rows[i] = stream.below(i, n);
    return rows;
  }
  // Cells in (group, treatment) order; each cell keeps its size.
  const std::size_t groups = sample.group_levels().size();
  std::vector<std::vector<std::size_t>> cells(groups * 2);
  for (std::size_t i = 0; i < n; ++i) {
    cells[sample[i].group * 2 + sample[i].treatment].push_back(i);
  }
  std::size_t k = 0;
  for (const auto& cell : cells) {
    for (std::size_t j = 0; j < cell.size(); ++j, ++k) {
      rows[k] = cell[stream.below(k, cell.size())];
    }
  }
  return rows;
}

Replications replicate(const WeightedSample& sample, const Estimator& estimator,
                       const BootstrapConfig& config) {
  config.validate();
  Replications reps;
  reps.draws.resize(config.replications);
  reps.failed.assign(config.replications, 0);

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, config.replications);

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (std::size_t b = next++; b < config.replications; b = next++) {
      try {
        const auto rows = resample_rows(sample, config, b);
        reps.draws[b] = estimator(sample.take(rows));
      } catch (const EstimationError&) {
        reps.failed[b] = 1;
      } catch (const DataError&) {
        reps.failed[b] = 1;
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  reps.failures = static_cast<std::size_t>(std::count(reps.failed.begin(), reps.failed.end(), 1));
  const double share = static_cast<double>(reps.failures) / static_cast<double>(config.replications);
  if (share > config.max_failure_share) {
    throw EstimationError("bootstrap aborted: " + std::to_string(reps.failures) + " of " +
                          std::to_string(config.replications) +
                          " replications failed (empty estimation cell); consider the "
                          "stratified resampling scheme");
  }
  return reps;
}

SigCode normal_ratio_code(double estimate, double se) {
  if (!(se > 0.0) || !std::isfinite(estimate)) return SigCode::kNone;
  const double t = std::abs(estimate) / se;
  if (t >= 2.576) return SigCode::kP1;
  if (t >= 1.960) return SigCode::kP5;
  if (t >= 1.645) return SigCode::kP10;
  return SigCode::kNone;
}

namespace {

SigCode percentile_code(std::vector<double> draws) {
  if (draws.size() < 2) return SigCode::kNone;
  std::sort(draws.begin(), draws.end());
  const std::vector<double> ones(draws.size(), 1.0);
  const Ecdf ecdf(draws, ones);
  auto excludes_zero = [&](double alpha) {
    const double lo = ecdf.quantile(alpha / 2.0);
    const double hi = ecdf.quantile(1.0 - alpha / 2.0);
    return lo > 0.0 || hi < 0.0;
  };
  if (excludes_zero(0.01)) return SigCode::kP1;
  if (excludes_zero(0.05)) return SigCode::kP5;
  if (excludes_zero(0.10)) return SigCode::kP10;
  return SigCode::kNone;
}

}  // namespace

std::vector<EntryInference> summarize(std::span<const double> point, const Replications& reps,
                                      SignificanceRule rule) {
  std::vector<EntryInference> out(point.size());
  std::vector<double> column;
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (!std::isfinite(point[j])) {
      out[j] = {kNaN, SigCode::kNone};
      continue;
    }
    column.clear();
    for (std::size_t b = 0; b < reps.size(); ++b) {
      if (reps.failed[b]) continue;
      const double v = reps.draws[b][j];
      if (std::isfinite(v)) column.push_back(v);
    }
    if (column.size() < 2) {
      out[j] = {kNaN, SigCode::kNone};
      continue;
    }
    CompensatedSum sum;
    for (double v : column) sum.add(v);
    const double mean = sum.value() / static_cast<double>(column.size());
    CompensatedSum ss;
    for (double v : column) ss.add((v - mean) * (v - mean));
    const double se = std::sqrt(ss.value() / static_cast<double>(column.size() - 1));
    out[j].se = se;
    out[j].sig = rule == SignificanceRule::kNormalRatio ? normal_ratio_code(point[j], se)
                                                        : percentile_code(column);
  }
  return out;
}

BootstrapResult bootstrap_se(const WeightedSample& sample, const Estimator& estimator,
                             const BootstrapConfig& config, SignificanceRule rule) {
  BootstrapResult result;
  result.point = estimator(sample);
  result.reps = replicate(sample, estimator, config);
  result.entries = summarize(result.point, result.reps, rule);
  return result;
}

KsResult ks_test(std::span<const double> point, const Replications& reps, double n,
                 std::size_t offset) {
  std::vector<std::size_t> retained;
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (std::isfinite(point[j])) retained.push_back(j);
  }
  if (retained.empty()) throw EstimationError("KS test on a series with no retained entries");

  const double root_n = std::sqrt(n);
  KsResult r;
  r.retained = retained.size();
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j : retained) {
    sup = std::max(sup, point[j]);
    inf = std::min(inf, point[j]);
  }
  r.psd = root_n * sup;
  r.nsd = root_n * inf;
  r.ks = std::max(r.psd, -r.nsd);

  std::size_t used = 0;
  std::size_t hits_ks = 0;
  std::size_t hits_psd = 0;
  std::size_t hits_nsd = 0;
  for (std::size_t b = 0; b < reps.size(); ++b) {
    if (reps.failed[b]) continue;
    const Estimates& draw = reps.draws[b];
    double bsup = -std::numeric_limits<double>::infinity();
    double binf = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j : retained) {
      const double v = draw[offset + j];
      if (!std::isfinite(v)) continue;
      const double centered = v - point[j];
      bsup = std::max(bsup, centered);
      binf = std::min(binf, centered);
      any = true;
    }
    if (!any) continue;
    ++used;
    const double t_psd = root_n * bsup;
    const double t_nsd = root_n * binf;
    hits_ks += std::max(t_psd, -t_nsd) >= r.ks;
    hits_psd += t_psd >= r.psd;
    hits_nsd += t_nsd <= r.nsd;
  }
  if (used == 0) throw EstimationError("KS test has no usable bootstrap replications");
  const double denom = static_cast<double>(used);
  r.p_ks = static_cast<double>(hits_ks) / denom;
  r.p_psd = static_cast<double>(hits_psd) / denom;
  r.p_nsd = static_cast<double>(hits_nsd) / denom;
  r.replications_used = used;
  return r;
}

KsResult ks_tests(const WeightedSample& sample, const Estimator& series_estimator,
                  const BootstrapConfig& config, double n) {
  const Estimates point = series_estimator(sample);
  const Replications reps = replicate(sample, series_estimator, config);
  return ks_test(point, reps, n);
}

}  // namespace qdecomp
