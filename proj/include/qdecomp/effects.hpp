#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdecomp/sample.hpp"
#include "qdecomp/wstat.hpp"

namespace qdecomp {

// Which distribution supplies the reference quantiles Q_ref(tau).
enum class ReferenceKind {
  kPooledUntreated,  // Y(0), all groups
  kPooledTreated,    // Y(1), all groups
  kPooledObserved,   // observed Y, both arms
  kGroupUntreated,   // Y(0) of one group
  kGroupTreated,     // Y(1) of one group
};

struct Reference {
  ReferenceKind kind = ReferenceKind::kPooledUntreated;
  std::string group;  // only for the kGroup* kinds

  bool operator==(const Reference&) const = default;
};

// Arm whose within-group distribution maps Q_ref(tau) to a relative rank.
enum class RankSide { kUntreated, kTreated };

struct RankConfig {
  Reference reference;
  RankSide rank_side = RankSide::kUntreated;
  double clip_lo = 0.01;
  double clip_hi = 0.99;
  bool mass_point_exclusion = true;

  void validate() const;
};

enum class EffectKind { kQte, kCqte, kTqte, kSqte, kDiff };
enum class Exclusion { kNone, kClipped, kBelowMassPoint };
enum class SigCode { kNone, kP10, kP5, kP1 };

std::string_view to_string(EffectKind kind);
std::string_view to_string(Exclusion reason);
// "", "*", "**", "***"
std::string_view stars(SigCode code);

// Percentile-indexed estimates of one effect. Excluded entries carry NaN and
// a reason; standard errors and codes are filled in by inference.
struct EffectSeries {
  EffectKind kind = EffectKind::kQte;
  EffectKind base_kind = EffectKind::kQte;  // for kDiff: kind of the operands
  std::string group;
  std::vector<double> grid;
  std::vector<double> estimates;
  std::vector<Exclusion> excluded;
  std::vector<double> se;  // NaN until inference runs
  std::vector<SigCode> sig;

  std::size_t size() const { return grid.size(); }
  bool retained(std::size_t i) const { return excluded[i] == Exclusion::kNone; }
  std::size_t retained_count() const;
};

// tau = k / (points + 1), k = 1..points. The default 99 gives percentiles.
std::vector<double> percentile_grid(std::size_t points = 99);
void validate_grid(std::span<const double> grid);

// Weighted ECDFs of a sample split by arm and group, built once and shared by
// all estimators evaluated on that sample. Empty cells stay empty and raise
// EstimationError when used.
class DistributionSet {
 public:
  explicit DistributionSet(const WeightedSample& sample);

  const WeightedSample& sample() const { return *sample_; }
  const Ecdf& arm(int treatment) const;
  const Ecdf& observed() const;
  const Ecdf& cell(int treatment, std::size_t group) const;
  const Ecdf& reference(const Reference& ref) const;
  std::size_t group_count() const { return cells_[0].size(); }
  // Number of observations in a group, both arms.
  std::size_t group_size(std::size_t group) const;

 private:
  const WeightedSample* sample_;
  Ecdf arms_[2];
  Ecdf observed_;
  std::vector<Ecdf> cells_[2];
};

struct RankResult {
  double rank = 0.0;  // NaN when excluded
  Exclusion reason = Exclusion::kNone;
};

RankResult relative_rank(const DistributionSet& dist, std::size_t group, double tau,
                         const RankConfig& config);
RankResult relative_rank(const WeightedSample& sample, std::string_view group, double tau,
                         const RankConfig& config);

EffectSeries qte(const DistributionSet& dist, std::span<const double> grid);
EffectSeries cqte(const DistributionSet& dist, std::size_t group, std::span<const double> grid);
EffectSeries tqte(const DistributionSet& dist, std::size_t group, std::span<const double> grid,
                  const RankConfig& config);
EffectSeries sqte(const DistributionSet& dist, std::size_t group, std::span<const double> grid,
                  const RankConfig& config);

// Convenience overloads that build the distribution set themselves.
EffectSeries qte(const WeightedSample& sample, std::span<const double> grid);
EffectSeries cqte(const WeightedSample& sample, std::string_view group,
                  std::span<const double> grid);
EffectSeries tqte(const WeightedSample& sample, std::string_view group,
                  std::span<const double> grid, const RankConfig& config);
EffectSeries sqte(const WeightedSample& sample, std::string_view group,
                  std::span<const double> grid, const RankConfig& config);

struct GroupDecomposition {
  EffectSeries cqte;
  EffectSeries tqte;
  EffectSeries sqte;
};

// CQTE, TQTE and SQTE of one group from a single pass; SQTE is computed as
// cqte - tqte from the same two doubles that populate the other series.
GroupDecomposition decompose_group(const DistributionSet& dist, std::size_t group,
                                   std::span<const double> grid, const RankConfig& config);

// Pointwise a - b. Excluded where either side is excluded.
EffectSeries series_difference(const EffectSeries& a, const EffectSeries& b);

}  // namespace qdecomp
