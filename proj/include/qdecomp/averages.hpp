#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qdecomp/effects.hpp"
#include "qdecomp/sample.hpp"

namespace qdecomp {

double ate(const WeightedSample& sample);
double cate(const WeightedSample& sample, std::string_view group);

struct TateResult {
  double value = 0.0;
  // Reference observations whose within-group rank fell below clip_lo.
  std::size_t dropped_count = 0;
  double dropped_weight = 0.0;
  double dropped_share = 0.0;  // dropped_weight / total reference weight
};

// Translated average effect of one group: the weighted sample average over
// the reference observations Y_i of the gap between the group's two arms at
// the rank F_side|g(Y_i). With ranks taken under non-treatment this is
//   sum_i w_i (Q_1|g(F_0|g(Y_i)) - Y_i) / sum_i w_i
// and symmetrically Y_i - Q_0|g(F_1|g(Y_i)) for ranks under treatment. Ranks
// above clip_hi are clamped; ranks below clip_lo drop the observation.
TateResult tate(const DistributionSet& dist, std::size_t group, const RankConfig& config);
TateResult tate(const WeightedSample& sample, std::string_view group, const RankConfig& config);

double sate(const WeightedSample& sample, std::string_view group, const RankConfig& config);

struct AverageRow {
  std::string group;
  double cate = 0.0;
  double tate = 0.0;
  double sate = 0.0;  // cate - tate
  double mean_treated = 0.0;
  double mean_control = 0.0;
  std::size_t tate_dropped_count = 0;
  double tate_dropped_share = 0.0;
};

struct AverageDecomp {
  double ate = 0.0;
  double mean_treated = 0.0;
  double mean_control = 0.0;
  std::vector<AverageRow> groups;
};

AverageDecomp decompose_averages(const WeightedSample& sample, const RankConfig& config);

}  // namespace qdecomp
