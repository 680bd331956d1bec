#include "qdecomp/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "qdecomp/errors.hpp"
#include "qdecomp/format.hpp"
#include "qdecomp/wstat.hpp"

namespace qdecomp {

using nlohmann::ordered_json;

std::vector<EffectSeries> estimate_series(const WeightedSample& sample,
                                          std::span<const double> grid, const RankConfig& rank) {
  const DistributionSet dist(sample);
  std::vector<EffectSeries> out;
  out.push_back(qte(dist, grid));
  const std::size_t groups = sample.group_levels().size();
  std::vector<GroupDecomposition> parts;
  parts.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    parts.push_back(decompose_group(dist, g, grid, rank));
    out.push_back(parts.back().cqte);
    out.push_back(parts.back().tqte);
    out.push_back(parts.back().sqte);
  }
  for (std::size_t a = 0; a < groups; ++a) {
    for (std::size_t b = a + 1; b < groups; ++b) {
      out.push_back(series_difference(parts[a].cqte, parts[b].cqte));
      out.push_back(series_difference(parts[a].tqte, parts[b].tqte));
      out.push_back(series_difference(parts[a].sqte, parts[b].sqte));
    }
  }
  return out;
}

std::vector<AverageEntry> average_entries(const AverageDecomp& decomp) {
  std::vector<AverageEntry> out;
  const std::string all(kPooledGroupLabel);
  out.push_back({"ATE", all, decomp.ate});
  out.push_back({"MEAN_Y1", all, decomp.mean_treated});
  out.push_back({"MEAN_Y0", all, decomp.mean_control});
  for (const AverageRow& row : decomp.groups) {
    out.push_back({"CATE", row.group, row.cate});
    AverageEntry t{"TATE", row.group, row.tate};
    t.dropped_share = row.tate_dropped_share;
    out.push_back(t);
    out.push_back({"SATE", row.group, row.sate});
    out.push_back({"MEAN_Y1", row.group, row.mean_treated});
    out.push_back({"MEAN_Y0", row.group, row.mean_control});
  }
  for (auto& e : out) e.se = std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::string series_label(const EffectSeries& s) {
  if (s.kind == EffectKind::kDiff) return std::string(to_string(s.base_kind)) + "_DIFF";
  return std::string(to_string(s.kind));
}

namespace {

Estimates flatten(const std::vector<EffectSeries>& series) {
  Estimates flat;
  for (const auto& s : series) flat.insert(flat.end(), s.estimates.begin(), s.estimates.end());
  return flat;
}

Estimates flatten(const std::vector<AverageEntry>& entries) {
  Estimates flat;
  for (const auto& e : entries) flat.push_back(e.estimate);
  return flat;
}

// Observations entering each series, in estimate_series() order.
std::vector<double> series_sizes(const WeightedSample& sample, const DistributionSet& dist) {
  std::vector<double> sizes{static_cast<double>(sample.size())};
  const std::size_t groups = sample.group_levels().size();
  for (std::size_t g = 0; g < groups; ++g) {
    sizes.insert(sizes.end(), 3, static_cast<double>(dist.group_size(g)));
  }
  for (std::size_t a = 0; a < groups; ++a) {
    for (std::size_t b = a + 1; b < groups; ++b) {
      sizes.insert(sizes.end(), 3, static_cast<double>(dist.group_size(a) + dist.group_size(b)));
    }
  }
  return sizes;
}

}  // namespace

DecompReport run_decomposition(const WeightedSample& sample, const DecomposeOptions& options) {
  options.rank.validate();
  validate_grid(options.grid);
  DecompReport report;
  const Estimator series_estimator = [&](const WeightedSample& s) {
    return flatten(estimate_series(s, options.grid, options.rank));
  };
  const Estimator average_estimator = [&](const WeightedSample& s) {
    return flatten(average_entries(decompose_averages(s, options.rank)));
  };

  report.series = estimate_series(sample, options.grid, options.rank);
  const Estimates series_point = flatten(report.series);
  const Replications series_reps = replicate(sample, series_estimator, options.quantile_bootstrap);
  report.quantile_failures = series_reps.failures;
  const auto series_inf = summarize(series_point, series_reps, options.significance);

  const DistributionSet dist(sample);
  const std::vector<double> sizes = series_sizes(sample, dist);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < report.series.size(); ++k) {
    EffectSeries& s = report.series[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      s.se[i] = series_inf[offset + i].se;
      s.sig[i] = series_inf[offset + i].sig;
    }
    if (s.retained_count() > 0) {
      const double n = sizes[k];
      report.ks.push_back({series_label(s), s.group, n,
                           ks_test(std::span(series_point).subspan(offset, s.size()),
                                   series_reps, n, offset)});
    }
    offset += s.size();
  }

  report.averages = average_entries(decompose_averages(sample, options.rank));
  const Estimates average_point = flatten(report.averages);
  const Replications average_reps = replicate(sample, average_estimator, options.average_bootstrap);
  report.average_failures = average_reps.failures;
  const auto average_inf = summarize(average_point, average_reps, options.significance);
  for (std::size_t i = 0; i < report.averages.size(); ++i) {
    report.averages[i].se = average_inf[i].se;
    report.averages[i].sig = average_inf[i].sig;
  }
  return report;
}

// ---- diagnostics --------------------------------------------------------------

DiagnoseReport run_diagnostics(const WeightedSample& sample,
                               const std::vector<std::string>& variables) {
  DiagnoseReport report;
  const auto treated = [](const Observation& o) { return o.treatment == 1; };
  const auto control = [](const Observation& o) { return o.treatment == 0; };
  for (const auto& v : variables) {
    BalanceRow row;
    row.variable = v;
    row.treated = weighted_moments(sample, v, treated);
    row.control = weighted_moments(sample, v, control);
    row.std_diff = standardized_difference(row.treated, row.control);
    report.balance.push_back(row);
  }
  if (!sample.has_enrollment()) return report;

  report.compliers.push_back({"all", complier_share(sample)});
  for (const auto& label : sample.group_levels()) {
    report.compliers.push_back({"group=" + label, complier_share(sample, label)});
  }
  const DistributionSet dist(sample);
  const Ecdf& control_outcome = dist.arm(0);
  const double cuts[3] = {control_outcome.quantile(0.25), control_outcome.quantile(0.5),
                          control_outcome.quantile(0.75)};
  for (int k = 0; k < 4; ++k) {
    const auto in_quartile = [&cuts, k](const Observation& o) {
      int q = 0;
      while (q < 3 && o.outcome > cuts[q]) ++q;
      return q == k;
    };
    std::string subset = "control_outcome_quartile=" + std::to_string(k + 1);
    try {
      report.compliers.push_back({subset, complier_share_where(sample, in_quartile)});
    } catch (const EstimationError&) {
      // Ties at a mass point can leave a quartile without one of the arms.
      report.compliers.push_back({subset, std::numeric_limits<double>::quiet_NaN()});
    }
  }
  return report;
}

// ---- output -----------------------------------------------------------------

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string cell(double x) { return std::isnan(x) ? "" : format_number(x); }

ordered_json json_number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

void emit_json(std::ostream& out, std::string_view run_hash, std::string_view table,
               ordered_json rows) {
  ordered_json doc;
  doc["run"] = run_hash;
  doc["table"] = table;
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

bool is_decile(double tau) {
  const double scaled = tau * 10.0;
  return std::abs(scaled - std::round(scaled)) < 1e-9;
}

void write_series_rows(const DecompReport& report, std::ostream& out, OutputFormat format,
                       std::string_view run_hash, std::string_view table, bool deciles_only) {
  ordered_json rows = ordered_json::array();
  if (format == OutputFormat::kCsv) {
    out << "# run " << run_hash << '\n';
    out << "tau,kind,group,estimate,se,sig_code,excluded_reason\n";
  }
  for (const auto& s : report.series) {
    const std::string kind = series_label(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (deciles_only && !is_decile(s.grid[i])) continue;
      if (format == OutputFormat::kCsv) {
        out << format_number(s.grid[i]) << ',' << kind << ',' << s.group << ','
            << cell(s.estimates[i]) << ',' << cell(s.se[i]) << ',' << stars(s.sig[i]) << ','
            << to_string(s.excluded[i]) << '\n';
      } else {
        rows.push_back({{"tau", s.grid[i]},
                        {"kind", kind},
                        {"group", s.group},
                        {"estimate", json_number(s.estimates[i])},
                        {"se", json_number(s.se[i])},
                        {"sig_code", stars(s.sig[i])},
                        {"excluded_reason", to_string(s.excluded[i])}});
      }
    }
  }
  if (format == OutputFormat::kJson) emit_json(out, run_hash, table, std::move(rows));
}

}  // namespace

void write_series(const DecompReport& report, std::ostream& out, OutputFormat format,
                  std::string_view run_hash) {
  write_series_rows(report, out, format, run_hash, "series", false);
}

void write_deciles(const DecompReport& report, std::ostream& out, OutputFormat format,
                   std::string_view run_hash) {
  write_series_rows(report, out, format, run_hash, "deciles", true);
}

void write_averages(const DecompReport& report, std::ostream& out, OutputFormat format,
                    std::string_view run_hash) {
  ordered_json rows = ordered_json::array();
  if (format == OutputFormat::kCsv) {
    out << "# run " << run_hash << '\n';
    out << "effect,group,estimate,se,sig_code,tate_dropped_share\n";
  }
  for (const auto& e : report.averages) {
    const double dropped = e.dropped_share.value_or(std::numeric_limits<double>::quiet_NaN());
    if (format == OutputFormat::kCsv) {
      out << e.effect << ',' << e.group << ',' << cell(e.estimate) << ',' << cell(e.se) << ','
          << stars(e.sig) << ',' << cell(dropped) << '\n';
    } else {
      rows.push_back({{"effect", e.effect},
                      {"group", e.group},
                      {"estimate", json_number(e.estimate)},
                      {"se", json_number(e.se)},
                      {"sig_code", stars(e.sig)},
                      {"tate_dropped_share", json_number(dropped)}});
    }
  }
  if (format == OutputFormat::kJson) emit_json(out, run_hash, "averages", std::move(rows));
}

void write_ks(const DecompReport& report, std::ostream& out, OutputFormat format,
              std::string_view run_hash) {
  ordered_json rows = ordered_json::array();
  if (format == OutputFormat::kCsv) {
    out << "# run " << run_hash << '\n';
    out << "effect,group,n,ks,p_ks,psd,p_psd,nsd,p_nsd,retained,replications\n";
  }
  for (const auto& row : report.ks) {
    const KsResult& r = row.result;
    if (format == OutputFormat::kCsv) {
      out << row.effect << ',' << row.group << ',' << format_number(row.n) << ','
          << format_number(r.ks) << ',' << format_number(r.p_ks) << ',' << format_number(r.psd)
          << ',' << format_number(r.p_psd) << ',' << format_number(r.nsd) << ','
          << format_number(r.p_nsd) << ',' << r.retained << ',' << r.replications_used << '\n';
    } else {
      rows.push_back({{"effect", row.effect},
                      {"group", row.group},
                      {"n", row.n},
                      {"ks", r.ks},
                      {"p_ks", r.p_ks},
                      {"psd", r.psd},
                      {"p_psd", r.p_psd},
                      {"nsd", r.nsd},
                      {"p_nsd", r.p_nsd},
                      {"retained", r.retained},
                      {"replications", r.replications_used}});
    }
  }
  if (format == OutputFormat::kJson) emit_json(out, run_hash, "ks", std::move(rows));
}

void write_balance(const DiagnoseReport& report, std::ostream& out, OutputFormat format,
                   std::string_view run_hash) {
  ordered_json rows = ordered_json::array();
  if (format == OutputFormat::kCsv) {
    out << "# run " << run_hash << '\n';
    out << "variable,mean_treated,sd_treated,mean_control,sd_control,std_diff\n";
  }
  for (const auto& b : report.balance) {
    const double sd1 = std::sqrt(b.treated.variance);
    const double sd0 = std::sqrt(b.control.variance);
    if (format == OutputFormat::kCsv) {
      out << b.variable << ',' << format_number(b.treated.mean) << ',' << format_number(sd1) << ','
          << format_number(b.control.mean) << ',' << format_number(sd0) << ','
          << format_number(b.std_diff) << '\n';
    } else {
      rows.push_back({{"variable", b.variable},
                      {"mean_treated", b.treated.mean},
                      {"sd_treated", sd1},
                      {"mean_control", b.control.mean},
                      {"sd_control", sd0},
                      {"std_diff", json_number(b.std_diff)}});
    }
  }
  if (format == OutputFormat::kJson) emit_json(out, run_hash, "balance", std::move(rows));
}

void write_compliers(const DiagnoseReport& report, std::ostream& out, OutputFormat format,
                     std::string_view run_hash) {
  ordered_json rows = ordered_json::array();
  if (format == OutputFormat::kCsv) {
    out << "# run " << run_hash << '\n';
    out << "subset,complier_share\n";
  }
  for (const auto& c : report.compliers) {
    if (format == OutputFormat::kCsv) {
      out << c.subset << ',' << cell(c.share) << '\n';
    } else {
      rows.push_back({{"subset", c.subset}, {"complier_share", json_number(c.share)}});
    }
  }
  if (format == OutputFormat::kJson) emit_json(out, run_hash, "compliers", std::move(rows));
}

}  // namespace qdecomp
