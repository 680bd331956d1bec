#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdecomp/averages.hpp"
#include "qdecomp/effects.hpp"
#include "qdecomp/inference.hpp"
#include "qdecomp/sample.hpp"

namespace qdecomp {

inline constexpr std::string_view kVersion = "0.1.0";

struct DecomposeOptions {
  RankConfig rank;
  std::vector<double> grid = percentile_grid(99);
  BootstrapConfig quantile_bootstrap{kDefaultQuantileReplications};
  BootstrapConfig average_bootstrap{kDefaultAverageReplications};
  SignificanceRule significance = SignificanceRule::kNormalRatio;
};

// All effect series in a fixed order: QTE; then CQTE, TQTE, SQTE for each
// group level; then CQTE, TQTE, SQTE differences for every pair of levels
// (i < j, level order).
std::vector<EffectSeries> estimate_series(const WeightedSample& sample,
                                          std::span<const double> grid, const RankConfig& rank);

struct AverageEntry {
  std::string effect;  // ATE, CATE, TATE, SATE, MEAN_Y1, MEAN_Y0
  std::string group;
  double estimate = 0.0;
  double se = 0.0;
  SigCode sig = SigCode::kNone;
  std::optional<double> dropped_share;  // TATE rows only
};

// Flat list ATE, MEAN_Y1, MEAN_Y0 (pooled), then per group CATE, TATE,
// SATE, MEAN_Y1, MEAN_Y0.
std::vector<AverageEntry> average_entries(const AverageDecomp& decomp);

struct KsRow {
  std::string effect;  // series kind label, e.g. "CQTE" or "CQTE_DIFF"
  std::string group;
  double n = 0.0;
  KsResult result;
};

struct DecompReport {
  std::vector<EffectSeries> series;
  std::vector<AverageEntry> averages;
  std::vector<KsRow> ks;
  std::size_t quantile_failures = 0;
  std::size_t average_failures = 0;
};

std::string series_label(const EffectSeries& s);

DecompReport run_decomposition(const WeightedSample& sample, const DecomposeOptions& options);

// ---- diagnostics --------------------------------------------------------------

struct BalanceRow {
  std::string variable;
  Moments treated;
  Moments control;
  double std_diff = 0.0;
};

struct ComplierRow {
  std::string subset;  // "all", "group=<label>", "control_outcome_quartile=<k>"
  double share = 0.0;
};

struct DiagnoseReport {
  std::vector<BalanceRow> balance;
  std::vector<ComplierRow> compliers;  // empty without an enrollment column
};

DiagnoseReport run_diagnostics(const WeightedSample& sample,
                               const std::vector<std::string>& variables);

// ---- output -----------------------------------------------------------------

enum class OutputFormat { kCsv, kJson };

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view text);

void write_series(const DecompReport& report, std::ostream& out, OutputFormat format,
                  std::string_view run_hash);
void write_deciles(const DecompReport& report, std::ostream& out, OutputFormat format,
                   std::string_view run_hash);
void write_averages(const DecompReport& report, std::ostream& out, OutputFormat format,
                    std::string_view run_hash);
void write_ks(const DecompReport& report, std::ostream& out, OutputFormat format,
              std::string_view run_hash);
void write_balance(const DiagnoseReport& report, std::ostream& out, OutputFormat format,
                   std::string_view run_hash);
void write_compliers(const DiagnoseReport& report, std::ostream& out, OutputFormat format,
                     std::string_view run_hash);

}  // namespace qdecomp
