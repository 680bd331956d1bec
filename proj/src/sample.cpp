#include "qdecomp/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "qdecomp/errors.hpp"
#include "qdecomp/format.hpp"
#include "qdecomp/wstat.hpp"

namespace qdecomp {

WeightedSample::WeightedSample(std::vector<Observation> observations,
                               std::vector<std::string> group_levels,
                               std::vector<NamedColumn> covariates, bool normalized)
    : observations_(std::move(observations)),
      group_levels_(std::move(group_levels)),
      covariates_(std::move(covariates)),
      normalized_(normalized) {
  if (observations_.empty()) throw DataError("sample is empty");
  if (group_levels_.empty()) throw DataError("sample declares no group levels");
  std::set<std::string> seen(group_levels_.begin(), group_levels_.end());
  if (seen.size() != group_levels_.size()) throw DataError("duplicate group level");

  has_enrollment_ = observations_.front().enrolled.has_value();
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const Observation& o = observations_[i];
    const std::string where = "observation " + std::to_string(i) + ": ";
    if (!std::isfinite(o.outcome) || o.outcome < 0.0) {
      throw DataError(where + "outcome must be finite and non-negative");
    }
    if (o.treatment != 0 && o.treatment != 1) throw DataError(where + "treatment must be 0 or 1");
    if (!(o.weight > 0.0) || !std::isfinite(o.weight)) {
      throw DataError(where + "weight must be positive and finite");
    }
    if (o.group >= group_levels_.size()) throw DataError(where + "group index out of range");
    if (o.enrolled.has_value() != has_enrollment_) {
      throw DataError(where + "enrollment must be present for all or no observations");
    }
    if (o.enrolled && *o.enrolled != 0 && *o.enrolled != 1) {
      throw DataError(where + "enrolled must be 0 or 1");
    }
  }
  for (const NamedColumn& c : covariates_) {
    if (c.values.size() != observations_.size()) {
      throw DataError("covariate '" + c.name + "' has the wrong length");
    }
  }
}

std::optional<std::size_t> WeightedSample::group_index(std::string_view label) const {
  const auto it = std::find(group_levels_.begin(), group_levels_.end(), label);
  if (it == group_levels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - group_levels_.begin());
}

std::size_t WeightedSample::require_group(std::string_view label) const {
  if (auto g = group_index(label)) return *g;
  throw DataError("unknown group label '" + std::string(label) + "'");
}

std::vector<double> WeightedSample::column(std::string_view name) const {
  std::vector<double> out;
  out.reserve(size());
  if (name == "outcome") {
    for (const auto& o : observations_) out.push_back(o.outcome);
  } else if (name == "treatment") {
    for (const auto& o : observations_) out.push_back(o.treatment);
  } else if (name == "enrolled") {
    if (!has_enrollment_) throw UnsupportedError("sample has no enrollment column");
    for (const auto& o : observations_) out.push_back(*o.enrolled);
  } else {
    const auto it = std::find_if(covariates_.begin(), covariates_.end(),
                                 [&](const NamedColumn& c) { return c.name == name; });
    if (it == covariates_.end()) throw ConfigError("unknown variable '" + std::string(name) + "'");
    out = it->values;
  }
  return out;
}

std::size_t WeightedSample::cell_count(int treatment, std::optional<std::size_t> group) const {
  return static_cast<std::size_t>(std::count_if(
      observations_.begin(), observations_.end(), [&](const Observation& o) {
        return o.treatment == treatment && (!group || o.group == *group);
      }));
}

double WeightedSample::total_weight() const {
  CompensatedSum s;
  for (const auto& o : observations_) s.add(o.weight);
  return s.value();
}

WeightedSample WeightedSample::take(std::span<const std::size_t> rows) const {
  std::vector<Observation> obs;
  obs.reserve(rows.size());
  for (std::size_t r : rows) obs.push_back(observations_[r]);
  std::vector<NamedColumn> cov;
  cov.reserve(covariates_.size());
  for (const auto& c : covariates_) {
    NamedColumn nc{c.name, {}};
    nc.values.reserve(rows.size());
    for (std::size_t r : rows) nc.values.push_back(c.values[r]);
    cov.push_back(std::move(nc));
  }
  return WeightedSample(std::move(obs), group_levels_, std::move(cov), false);
}

WeightedSample WeightedSample::normalized_copy() const {
  const double scale = static_cast<double>(size()) / total_weight();
  std::vector<Observation> obs(observations_.begin(), observations_.end());
  for (auto& o : obs) o.weight *= scale;
  return WeightedSample(std::move(obs), group_levels_, covariates_, true);
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one CSV record; handles double-quoted fields with "" escapes.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!std::string(trim(field)).empty()) {
        throw DataError("line " + std::to_string(line_no) + ": stray quote in field");
      }
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

bool is_missing(std::string_view v) { return v.empty() || v == "NA" || v == "."; }

double parse_number(std::string_view text, std::size_t line_no, const std::string& column) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": column '" + column +
                    "' is not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

int parse_binary(std::string_view text, std::size_t line_no, const std::string& column) {
  const double v = parse_number(text, line_no, column);
  if (v != 0.0 && v != 1.0) {
    throw DataError("line " + std::to_string(line_no) + ": column '" + column +
                    "' must be 0 or 1, got '" + std::string(text) + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

LoadResult read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty() && line.front() != '#') {
      header = split_record(line, line_no);
      break;
    }
  }
  if (header.empty()) throw DataError("CSV input has no header row");
  if (line_no == 1 && header.front().rfind("\xEF\xBB\xBF", 0) == 0) header.front().erase(0, 3);

  auto locate = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("column '" + name + "' not found in CSV header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t outcome_col = locate(schema.outcome);
  const std::size_t treatment_col = locate(schema.treatment);
  const std::optional<std::size_t> weight_col =
      schema.weight ? std::optional(locate(*schema.weight)) : std::nullopt;
  const std::optional<std::size_t> enrolled_col =
      schema.enrolled ? std::optional(locate(*schema.enrolled)) : std::nullopt;
  std::vector<std::size_t> group_cols;
  for (const auto& g : schema.groups) group_cols.push_back(locate(g));
  std::vector<std::size_t> covariate_cols;
  for (const auto& c : schema.covariates) covariate_cols.push_back(locate(c));

  std::vector<std::size_t> mapped{outcome_col, treatment_col};
  if (weight_col) mapped.push_back(*weight_col);
  if (enrolled_col) mapped.push_back(*enrolled_col);
  mapped.insert(mapped.end(), group_cols.begin(), group_cols.end());
  mapped.insert(mapped.end(), covariate_cols.begin(), covariate_cols.end());

  struct RawRow {
    Observation obs;
    std::string label;
    std::vector<double> covariates;
    std::size_t line_no;
  };
  std::vector<RawRow> rows;
  std::size_t dropped = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, line_no);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    if (std::any_of(mapped.begin(), mapped.end(),
                    [&](std::size_t c) { return is_missing(fields[c]); })) {
      ++dropped;
      continue;
    }
    RawRow row;
    row.line_no = line_no;
    row.obs.outcome = parse_number(fields[outcome_col], line_no, schema.outcome);
    if (row.obs.outcome < 0.0) {
      throw DataError("line " + std::to_string(line_no) + ": column '" + schema.outcome +
                      "' must be non-negative");
    }
    row.obs.treatment = parse_binary(fields[treatment_col], line_no, schema.treatment);
    if (weight_col) {
      row.obs.weight = parse_number(fields[*weight_col], line_no, *schema.weight);
      if (!(row.obs.weight > 0.0)) {
        throw DataError("line " + std::to_string(line_no) + ": column '" + *schema.weight +
                        "' must be positive, got '" + fields[*weight_col] + "'");
      }
    }
    if (enrolled_col) {
      row.obs.enrolled = parse_binary(fields[*enrolled_col], line_no, *schema.enrolled);
    }
    if (group_cols.empty()) {
      row.label = std::string(kPooledGroupLabel);
    } else {
      for (std::size_t k = 0; k < group_cols.size(); ++k) {
        if (k > 0) row.label.push_back(kGroupSeparator);
        row.label += fields[group_cols[k]];
      }
    }
    for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
      row.covariates.push_back(
          parse_number(fields[covariate_cols[k]], line_no, schema.covariates[k]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV input has no complete data rows");

  std::vector<std::string> levels;
  if (schema.declared_levels) {
    levels = *schema.declared_levels;
  } else {
    std::set<std::string> distinct;
    for (const auto& r : rows) distinct.insert(r.label);
    levels.assign(distinct.begin(), distinct.end());
  }
  std::map<std::string, std::size_t> level_index;
  for (std::size_t i = 0; i < levels.size(); ++i) level_index.emplace(levels[i], i);

  std::vector<Observation> observations;
  observations.reserve(rows.size());
  std::vector<NamedColumn> covariates;
  for (const auto& c : schema.covariates) covariates.push_back({c, {}});
  for (auto& r : rows) {
    const auto it = level_index.find(r.label);
    if (it == level_index.end()) {
      throw DataError("line " + std::to_string(r.line_no) + ": unknown group label '" + r.label +
                      "'");
    }
    r.obs.group = it->second;
    observations.push_back(r.obs);
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      covariates[k].values.push_back(r.covariates[k]);
    }
  }
  return {WeightedSample(std::move(observations), std::move(levels), std::move(covariates)),
          dropped};
}

LoadResult load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, schema);
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void write_csv(const WeightedSample& sample, std::ostream& out) {
  out << "outcome,treatment,weight,group";
  if (sample.has_enrollment()) out << ",enrolled";
  for (const auto& c : sample.covariates()) out << ',' << csv_field(c.name);
  out << '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Observation& o = sample[i];
    out << format_number(o.outcome) << ',' << o.treatment << ',' << format_number(o.weight) << ','
        << csv_field(sample.group_label(o.group));
    if (o.enrolled) out << ',' << *o.enrolled;
    for (const auto& c : sample.covariates()) out << ',' << format_number(c.values[i]);
    out << '\n';
  }
}

CsvSchema written_schema(const WeightedSample& sample) {
  CsvSchema schema;
  schema.weight = "weight";
  schema.groups = {"group"};
  if (sample.has_enrollment()) schema.enrolled = "enrolled";
  for (const auto& c : sample.covariates()) schema.covariates.push_back(c.name);
  return schema;
}

// ---- diagnostics ----------------------------------------------------------

double standardized_difference(const Moments& a, const Moments& b) {
  const double gap = std::abs(a.mean - b.mean);
  const double pooled = 0.5 * (a.variance + b.variance);
  if (pooled <= 0.0) return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return gap / std::sqrt(pooled) * 100.0;
}

Moments weighted_moments(const WeightedSample& sample, std::string_view variable,
                         const std::function<bool(const Observation&)>& keep) {
  const std::vector<double> column = sample.column(variable);
  std::vector<double> values;
  std::vector<double> weights;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (keep(sample[i])) {
      values.push_back(column[i]);
      weights.push_back(sample[i].weight);
    }
  }
  if (values.empty()) throw EstimationError("empty cell in split of '" + std::string(variable) + "'");
  return {weighted_mean(values, weights), weighted_variance(values, weights)};
}

double standardized_difference(const WeightedSample& sample, std::string_view variable,
                               const Split& split) {
  std::function<bool(const Observation&)> first;
  std::function<bool(const Observation&)> second;
  if (std::holds_alternative<ArmSplit>(split)) {
    first = [](const Observation& o) { return o.treatment == 1; };
    second = [](const Observation& o) { return o.treatment == 0; };
  } else {
    const auto& gs = std::get<GroupSplit>(split);
    const std::size_t a = sample.require_group(gs.first);
    const std::size_t b = sample.require_group(gs.second);
    first = [a](const Observation& o) { return o.group == a; };
    second = [b](const Observation& o) { return o.group == b; };
  }
  return standardized_difference(weighted_moments(sample, variable, first),
                                 weighted_moments(sample, variable, second));
}

double complier_share_where(const WeightedSample& sample,
                            const std::function<bool(const Observation&)>& keep) {
  if (!sample.has_enrollment()) throw UnsupportedError("complier share needs an enrollment column");
  CompensatedSum enrolled[2];
  CompensatedSum total[2];
  for (const auto& o : sample.observations()) {
    if (!keep(o)) continue;
    enrolled[o.treatment].add(o.weight * *o.enrolled);
    total[o.treatment].add(o.weight);
  }
  if (total[0].value() <= 0.0 || total[1].value() <= 0.0) {
    throw EstimationError("complier share needs both treatment arms");
  }
  return enrolled[1].value() / total[1].value() - enrolled[0].value() / total[0].value();
}

double complier_share(const WeightedSample& sample, std::optional<std::string_view> group) {
  if (!group) return complier_share_where(sample, [](const Observation&) { return true; });
  const std::size_t g = sample.require_group(*group);
  return complier_share_where(sample, [g](const Observation& o) { return o.group == g; });
}

}  // namespace qdecomp
