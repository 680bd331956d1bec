#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qdecomp/effects.hpp"
#include "qdecomp/inference.hpp"
#include "qdecomp/report.hpp"
#include "qdecomp/sample.hpp"

namespace qdecomp {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitEstimation = 4,
};

// Key/value settings; repeatable keys (group, covariate) keep every value.
using KeyValues = std::map<std::string, std::vector<std::string>>;

// Parses "key = value" lines; '#' starts a comment.
KeyValues parse_key_values(std::istream& in);
std::string format_key_values(const KeyValues& values);

// Resolved settings for decompose and diagnose.
struct RunConfig {
  std::string input;
  CsvSchema schema;
  RankConfig rank;
  std::vector<double> grid = percentile_grid(99);
  std::string grid_text = "99";
  std::size_t reps_quantile = kDefaultQuantileReplications;
  std::size_t reps_average = kDefaultAverageReplications;
  std::uint64_t seed = 20240101;
  ResampleScheme scheme = ResampleScheme::kPooled;
  SignificanceRule significance = SignificanceRule::kNormalRatio;
  std::size_t threads = 0;
  std::string out = "qdecomp-out";
  OutputFormat format = OutputFormat::kCsv;

  // Every setting with its effective value, in a fixed key order.
  KeyValues echo() const;
};

// Builds a RunConfig from merged settings (unknown keys are a ConfigError).
RunConfig resolve_run_config(const KeyValues& settings);

Reference parse_reference(std::string_view text);
std::string format_reference(const Reference& ref);
std::vector<double> parse_grid(std::string_view text);

// Entry point shared by the qdecomp executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qdecomp
