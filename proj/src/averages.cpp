#include "qdecomp/averages.hpp"

#include "qdecomp/errors.hpp"
#include "qdecomp/wstat.hpp"

namespace qdecomp {

namespace {

struct ArmMeans {
  double treated = 0.0;
  double control = 0.0;
};

ArmMeans arm_means(const WeightedSample& sample, auto&& keep) {
  CompensatedSum sum[2];
  CompensatedSum weight[2];
  for (const Observation& o : sample.observations()) {
    if (!keep(o)) continue;
    sum[o.treatment].add(o.weight * o.outcome);
    weight[o.treatment].add(o.weight);
  }
  if (weight[0].value() <= 0.0 || weight[1].value() <= 0.0) {
    throw EstimationError("mean difference needs both treatment arms");
  }
  return {sum[1].value() / weight[1].value(), sum[0].value() / weight[0].value()};
}

bool in_reference(const Observation& o, ReferenceKind kind, std::size_t ref_group) {
  switch (kind) {
    case ReferenceKind::kPooledUntreated: return o.treatment == 0;
    case ReferenceKind::kPooledTreated: return o.treatment == 1;
    case ReferenceKind::kPooledObserved: return true;
    case ReferenceKind::kGroupUntreated: return o.treatment == 0 && o.group == ref_group;
    case ReferenceKind::kGroupTreated: return o.treatment == 1 && o.group == ref_group;
  }
  return false;
}

}  // namespace

double ate(const WeightedSample& sample) {
  const ArmMeans m = arm_means(sample, [](const Observation&) { return true; });
  return m.treated - m.control;
}

double cate(const WeightedSample& sample, std::string_view group) {
  const std::size_t g = sample.require_group(group);
  const ArmMeans m = arm_means(sample, [g](const Observation& o) { return o.group == g; });
  return m.treated - m.control;
}

TateResult tate(const DistributionSet& dist, std::size_t group, const RankConfig& config) {
  config.validate();
  const WeightedSample& sample = dist.sample();
  const ReferenceKind kind = config.reference.kind;
  const bool group_ref =
      kind == ReferenceKind::kGroupUntreated || kind == ReferenceKind::kGroupTreated;
  const std::size_t ref_group = group_ref ? sample.require_group(config.reference.group) : 0;

  const bool treated_side = config.rank_side == RankSide::kTreated;
  const Ecdf& rank_cell = dist.cell(treated_side ? 1 : 0, group);
  const Ecdf& other_cell = dist.cell(treated_side ? 0 : 1, group);

  CompensatedSum kept_sum;
  CompensatedSum kept_weight;
  CompensatedSum dropped_weight;
  std::size_t dropped = 0;
  for (const Observation& o : sample.observations()) {
    if (!in_reference(o, kind, ref_group)) continue;
    double rank = rank_cell.cdf(o.outcome);
    if (rank < config.clip_lo) {
      ++dropped;
      dropped_weight.add(o.weight);
      continue;
    }
    if (rank > config.clip_hi) rank = config.clip_hi;
    const double counterpart = other_cell.quantile(rank);
    const double gap = treated_side ? o.outcome - counterpart : counterpart - o.outcome;
    kept_sum.add(o.weight * gap);
    kept_weight.add(o.weight);
  }
  if (kept_weight.value() <= 0.0) {
    throw EstimationError("every reference observation was excluded from the TATE average for "
                          "group '" + sample.group_label(group) + "'");
  }
  TateResult out;
  out.value = kept_sum.value() / kept_weight.value();
  out.dropped_count = dropped;
  out.dropped_weight = dropped_weight.value();
  out.dropped_share = out.dropped_weight / (out.dropped_weight + kept_weight.value());
  return out;
}

TateResult tate(const WeightedSample& sample, std::string_view group, const RankConfig& config) {
  const DistributionSet dist(sample);
  return tate(dist, sample.require_group(group), config);
}

double sate(const WeightedSample& sample, std::string_view group, const RankConfig& config) {
  return cate(sample, group) - tate(sample, group, config).value;
}

AverageDecomp decompose_averages(const WeightedSample& sample, const RankConfig& config) {
  config.validate();
  const DistributionSet dist(sample);
  AverageDecomp out;
  const ArmMeans all = arm_means(sample, [](const Observation&) { return true; });
  out.mean_treated = all.treated;
  out.mean_control = all.control;
  out.ate = all.treated - all.control;
  for (std::size_t g = 0; g < sample.group_levels().size(); ++g) {
    const ArmMeans m = arm_means(sample, [g](const Observation& o) { return o.group == g; });
    const TateResult t = tate(dist, g, config);
    AverageRow row;
    row.group = sample.group_label(g);
    row.mean_treated = m.treated;
    row.mean_control = m.control;
    row.cate = m.treated - m.control;
    row.tate = t.value;
    row.sate = row.cate - row.tate;
    row.tate_dropped_count = t.dropped_count;
    row.tate_dropped_share = t.dropped_share;
    out.groups.push_back(std::move(row));
  }
  return out;
}

}  // namespace qdecomp
