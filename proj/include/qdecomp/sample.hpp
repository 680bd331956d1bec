#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qdecomp {

struct Observation {
  double outcome = 0.0;
  int treatment = 0;
  double weight = 1.0;
  std::size_t group = 0;  // index into WeightedSample::group_levels()
  std::optional<int> enrolled;
};

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

// Immutable validated sample of weighted observations.
//
// Weights are kept as supplied; every estimator in the library is a ratio of
// weighted sums and therefore invariant to a common rescaling. normalized()
// only records whether weights were rescaled to sum to the sample size.
class WeightedSample {
 public:
  WeightedSample(std::vector<Observation> observations, std::vector<std::string> group_levels,
                 std::vector<NamedColumn> covariates = {}, bool normalized = false);

  std::span<const Observation> observations() const { return observations_; }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  std::size_t size() const { return observations_.size(); }

  std::span<const std::string> group_levels() const { return group_levels_; }
  std::optional<std::size_t> group_index(std::string_view label) const;
  // Throws DataError for labels outside group_levels().
  std::size_t require_group(std::string_view label) const;
  const std::string& group_label(std::size_t index) const { return group_levels_[index]; }

  bool has_enrollment() const { return has_enrollment_; }
  bool normalized() const { return normalized_; }

  std::span<const NamedColumn> covariates() const { return covariates_; }
  // Looks up a covariate, or the outcome/treatment/enrolled columns by the
  // reserved names "outcome", "treatment", "enrolled".
  std::vector<double> column(std::string_view name) const;

  std::size_t cell_count(int treatment, std::optional<std::size_t> group = std::nullopt) const;
  double total_weight() const;

  // New sample made of the given rows (repeats allowed), same group levels.
  WeightedSample take(std::span<const std::size_t> rows) const;
  // Copy with weights rescaled to sum to size().
  WeightedSample normalized_copy() const;

 private:
  std::vector<Observation> observations_;
  std::vector<std::string> group_levels_;
  std::vector<NamedColumn> covariates_;
  bool has_enrollment_ = false;
  bool normalized_ = false;
};

// Column mapping for CSV ingestion. Several group columns are crossed into a
// single label joined with ':' (e.g. "f:1" for gender x parenthood).
struct CsvSchema {
  std::string outcome = "outcome";
  std::string treatment = "treatment";
  std::optional<std::string> weight;
  std::vector<std::string> groups;
  std::optional<std::string> enrolled;
  std::vector<std::string> covariates;
  // When set, any other group label is a data error.
  std::optional<std::vector<std::string>> declared_levels;
};

inline constexpr char kGroupSeparator = ':';
inline constexpr std::string_view kPooledGroupLabel = "all";

struct LoadResult {
  WeightedSample sample;
  std::size_t dropped_rows = 0;
};

// Rows with an empty, "NA" or "." value in any mapped column are dropped and
// counted. Other violations raise DataError naming the line and column.
LoadResult read_csv(std::istream& in, const CsvSchema& schema);
LoadResult load_csv(const std::string& path, const CsvSchema& schema);

// Writes columns outcome,treatment,weight,group[,enrolled][,covariates...].
void write_csv(const WeightedSample& sample, std::ostream& out);
// Schema that reads back what write_csv produced.
CsvSchema written_schema(const WeightedSample& sample);

// ---- diagnostics ----------------------------------------------------------

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

struct ArmSplit {};  // D = 1 versus D = 0
struct GroupSplit {
  std::string first;
  std::string second;
};
using Split = std::variant<ArmSplit, GroupSplit>;

// |mean_a - mean_b| / sqrt((var_a + var_b) / 2) * 100, with weighted
// population moments. Zero pooled variance gives 0 for equal means and
// +infinity otherwise.
double standardized_difference(const Moments& a, const Moments& b);
double standardized_difference(const WeightedSample& sample, std::string_view variable,
                               const Split& split);

// Weighted moments of a column within the rows selected by `keep`.
Moments weighted_moments(const WeightedSample& sample, std::string_view variable,
                         const std::function<bool(const Observation&)>& keep);

// First-stage difference P(enrolled | D=1) - P(enrolled | D=0), weighted.
double complier_share(const WeightedSample& sample,
                      std::optional<std::string_view> group = std::nullopt);
double complier_share_where(const WeightedSample& sample,
                            const std::function<bool(const Observation&)>& keep);

}  // namespace qdecomp
