#include "qdecomp/effects.hpp"

#include <cmath>
#include <limits>

#include "qdecomp/errors.hpp"

namespace qdecomp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Ecdf build_ecdf(const WeightedSample& sample, auto&& keep) {
  std::vector<double> values;
  std::vector<double> weights;
  for (const Observation& o : sample.observations()) {
    if (keep(o)) {
      values.push_back(o.outcome);
      weights.push_back(o.weight);
    }
  }
  if (values.empty()) return Ecdf{};
  return Ecdf(values, weights);
}

const Ecdf& nonempty(const Ecdf& e, const char* what) {
  if (e.empty()) throw EstimationError(std::string("empty estimation cell: ") + what);
  return e;
}

EffectSeries make_series(EffectKind kind, std::string group, std::span<const double> grid) {
  EffectSeries s;
  s.kind = kind;
  s.base_kind = kind;
  s.group = std::move(group);
  s.grid.assign(grid.begin(), grid.end());
  s.estimates.assign(grid.size(), kNaN);
  s.excluded.assign(grid.size(), Exclusion::kNone);
  s.se.assign(grid.size(), kNaN);
  s.sig.assign(grid.size(), SigCode::kNone);
  return s;
}

}  // namespace

void RankConfig::validate() const {
  if (!(0.0 < clip_lo && clip_lo < clip_hi && clip_hi < 1.0)) {
    throw ConfigError("clip interval must satisfy 0 < lo < hi < 1");
  }
  const bool group_ref = reference.kind == ReferenceKind::kGroupUntreated ||
                         reference.kind == ReferenceKind::kGroupTreated;
  if (group_ref && reference.group.empty()) {
    throw ConfigError("group reference needs a group label");
  }
}

std::string_view to_string(EffectKind kind) {
  switch (kind) {
    case EffectKind::kQte: return "QTE";
    case EffectKind::kCqte: return "CQTE";
    case EffectKind::kTqte: return "TQTE";
    case EffectKind::kSqte: return "SQTE";
    case EffectKind::kDiff: return "DIFF";
  }
  return "?";
}

std::string_view to_string(Exclusion reason) {
  switch (reason) {
    case Exclusion::kNone: return "";
    case Exclusion::kClipped: return "clipped";
    case Exclusion::kBelowMassPoint: return "below_mass_point";
  }
  return "?";
}

std::string_view stars(SigCode code) {
  switch (code) {
    case SigCode::kNone: return "";
    case SigCode::kP10: return "*";
    case SigCode::kP5: return "**";
    case SigCode::kP1: return "***";
  }
  return "";
}

std::size_t EffectSeries::retained_count() const {
  std::size_t n = 0;
  for (auto e : excluded) n += e == Exclusion::kNone;
  return n;
}

std::vector<double> percentile_grid(std::size_t points) {
  if (points == 0) throw ConfigError("grid needs at least one point");
  std::vector<double> grid;
  grid.reserve(points);
  const double denom = static_cast<double>(points + 1);
  for (std::size_t k = 1; k <= points; ++k) grid.push_back(static_cast<double>(k) / denom);
  return grid;
}

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("empty tau grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw ConfigError("tau grid must lie in (0, 1)");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("tau grid must be strictly increasing");
  }
}

// ---- DistributionSet --------------------------------------------------------

DistributionSet::DistributionSet(const WeightedSample& sample) : sample_(&sample) {
  for (int d = 0; d < 2; ++d) {
    arms_[d] = build_ecdf(sample, [d](const Observation& o) { return o.treatment == d; });
    cells_[d].reserve(sample.group_levels().size());
    for (std::size_t g = 0; g < sample.group_levels().size(); ++g) {
      cells_[d].push_back(build_ecdf(
          sample, [d, g](const Observation& o) { return o.treatment == d && o.group == g; }));
    }
  }
  observed_ = build_ecdf(sample, [](const Observation&) { return true; });
}

const Ecdf& DistributionSet::arm(int treatment) const {
  return nonempty(arms_[treatment], treatment == 1 ? "treated arm" : "control arm");
}

const Ecdf& DistributionSet::observed() const { return nonempty(observed_, "sample"); }

const Ecdf& DistributionSet::cell(int treatment, std::size_t group) const {
  if (group >= group_count()) throw EstimationError("group index out of range");
  if (cells_[treatment][group].empty()) {
    throw EstimationError("empty estimation cell: group '" + sample_->group_label(group) +
                          (treatment == 1 ? "', treated arm" : "', control arm"));
  }
  return cells_[treatment][group];
}

const Ecdf& DistributionSet::reference(const Reference& ref) const {
  switch (ref.kind) {
    case ReferenceKind::kPooledUntreated: return arm(0);
    case ReferenceKind::kPooledTreated: return arm(1);
    case ReferenceKind::kPooledObserved: return observed();
    case ReferenceKind::kGroupUntreated: return cell(0, sample_->require_group(ref.group));
    case ReferenceKind::kGroupTreated: return cell(1, sample_->require_group(ref.group));
  }
  throw ConfigError("invalid reference");
}

std::size_t DistributionSet::group_size(std::size_t group) const {
  return cells_[0][group].count() + cells_[1][group].count();
}

// ---- estimands --------------------------------------------------------------

RankResult relative_rank(const DistributionSet& dist, std::size_t group, double tau,
                         const RankConfig& config) {
  const Ecdf& ref = dist.reference(config.reference);
  if (config.mass_point_exclusion && tau < ref.cdf(0.0)) {
    return {kNaN, Exclusion::kBelowMassPoint};
  }
  const int side = config.rank_side == RankSide::kTreated ? 1 : 0;
  const double rank = dist.cell(side, group).cdf(ref.quantile(tau));
  if (rank < config.clip_lo) return {kNaN, Exclusion::kClipped};
  return {rank > config.clip_hi ? config.clip_hi : rank, Exclusion::kNone};
}

RankResult relative_rank(const WeightedSample& sample, std::string_view group, double tau,
                         const RankConfig& config) {
  config.validate();
  const DistributionSet dist(sample);
  return relative_rank(dist, sample.require_group(group), tau, config);
}

EffectSeries qte(const DistributionSet& dist, std::span<const double> grid) {
  validate_grid(grid);
  EffectSeries s = make_series(EffectKind::kQte, std::string(kPooledGroupLabel), grid);
  const Ecdf& treated = dist.arm(1);
  const Ecdf& control = dist.arm(0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s.estimates[i] = treated.quantile(grid[i]) - control.quantile(grid[i]);
  }
  return s;
}

EffectSeries cqte(const DistributionSet& dist, std::size_t group, std::span<const double> grid) {
  validate_grid(grid);
  EffectSeries s = make_series(EffectKind::kCqte, dist.sample().group_label(group), grid);
  const Ecdf& treated = dist.cell(1, group);
  const Ecdf& control = dist.cell(0, group);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s.estimates[i] = treated.quantile(grid[i]) - control.quantile(grid[i]);
  }
  return s;
}

GroupDecomposition decompose_group(const DistributionSet& dist, std::size_t group,
                                   std::span<const double> grid, const RankConfig& config) {
  config.validate();
  validate_grid(grid);
  const std::string& label = dist.sample().group_label(group);
  GroupDecomposition out{make_series(EffectKind::kCqte, label, grid),
                         make_series(EffectKind::kTqte, label, grid),
                         make_series(EffectKind::kSqte, label, grid)};
  const Ecdf& treated = dist.cell(1, group);
  const Ecdf& control = dist.cell(0, group);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double conditional = treated.quantile(grid[i]) - control.quantile(grid[i]);
    out.cqte.estimates[i] = conditional;
    const RankResult r = relative_rank(dist, group, grid[i], config);
    if (r.reason != Exclusion::kNone) {
      out.tqte.excluded[i] = r.reason;
      out.sqte.excluded[i] = r.reason;
      continue;
    }
    const double translated = treated.quantile(r.rank) - control.quantile(r.rank);
    out.tqte.estimates[i] = translated;
    out.sqte.estimates[i] = conditional - translated;
  }
  return out;
}

EffectSeries tqte(const DistributionSet& dist, std::size_t group, std::span<const double> grid,
                  const RankConfig& config) {
  return decompose_group(dist, group, grid, config).tqte;
}

EffectSeries sqte(const DistributionSet& dist, std::size_t group, std::span<const double> grid,
                  const RankConfig& config) {
  return decompose_group(dist, group, grid, config).sqte;
}

EffectSeries qte(const WeightedSample& sample, std::span<const double> grid) {
  return qte(DistributionSet(sample), grid);
}

EffectSeries cqte(const WeightedSample& sample, std::string_view group,
                  std::span<const double> grid) {
  return cqte(DistributionSet(sample), sample.require_group(group), grid);
}

EffectSeries tqte(const WeightedSample& sample, std::string_view group,
                  std::span<const double> grid, const RankConfig& config) {
  return tqte(DistributionSet(sample), sample.require_group(group), grid, config);
}

EffectSeries sqte(const WeightedSample& sample, std::string_view group,
                  std::span<const double> grid, const RankConfig& config) {
  return sqte(DistributionSet(sample), sample.require_group(group), grid, config);
}

EffectSeries series_difference(const EffectSeries& a, const EffectSeries& b) {
  if (a.grid != b.grid) throw EstimationError("series differ in tau grid");
  if (a.kind != b.kind || a.base_kind != b.base_kind) {
    throw EstimationError("series differ in kind");
  }
  EffectSeries s = make_series(EffectKind::kDiff, a.group + "-" + b.group, a.grid);
  s.base_kind = a.base_kind;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.retained(i)) {
      s.excluded[i] = a.excluded[i];
    } else if (!b.retained(i)) {
      s.excluded[i] = b.excluded[i];
    } else {
      s.estimates[i] = a.estimates[i] - b.estimates[i];
    }
  }
  return s;
}

}  // namespace qdecomp
