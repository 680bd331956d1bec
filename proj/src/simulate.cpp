#include "qdecomp/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "qdecomp/errors.hpp"
#include "qdecomp/rng.hpp"

namespace qdecomp {

IdentityCheck identity_check(const GeneratedSample& data, std::span<const double> grid,
                             const RankConfig& rank, double tolerance_factor) {
  const TruthRecord& truth = data.truth;
  const DistributionSet dist(data.sample);
  IdentityCheck out;
  out.tolerance_factor = tolerance_factor;

  auto record = [&](double deviation, double tolerance) {
    ++out.points;
    out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(deviation));
    out.max_ratio = std::max(out.max_ratio, std::abs(deviation) / tolerance);
  };

  const std::size_t groups = data.sample.group_levels().size();
  switch (truth.spec().kind) {
    case DgpKind::kNullStructural: {
      out.quantity = "max |SQTE|";
      for (std::size_t g = 0; g < groups; ++g) {
        const EffectSeries s = sqte(dist, g, grid, rank);
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (s.retained(i)) record(s.estimates[i], truth.quantile_spacing_tolerance(s.grid[i], g));
        }
      }
      break;
    }
    case DgpKind::kFullyStructural: {
      out.quantity = "max |TQTE - QTE|";
      const EffectSeries pooled = qte(dist, grid);
      for (std::size_t g = 0; g < groups; ++g) {
        const EffectSeries t = tqte(dist, g, grid, rank);
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double true_rank = truth.relative_rank(t.grid[i], g);
          if (!t.retained(i) || true_rank < rank.clip_lo || true_rank > rank.clip_hi) continue;
          record(t.estimates[i] - pooled.estimates[i],
                 truth.quantile_spacing_tolerance(t.grid[i], g));
        }
      }
      break;
    }
    case DgpKind::kShift:
    case DgpKind::kMassPoint: {
      out.quantity = "max |QTE - analytic QTE|";
      const EffectSeries s = qte(dist, grid);
      for (std::size_t i = 0; i < s.size(); ++i) {
        record(s.estimates[i] - truth.qte(s.grid[i]),
               truth.quantile_spacing_tolerance(s.grid[i], std::nullopt));
      }
      break;
    }
  }
  if (out.points == 0) throw EstimationError("identity check has no retained grid points");
  out.pass = out.max_ratio <= tolerance_factor;
  return out;
}

SizeStudy ks_size_study(DgpSpec spec, std::span<const double> grid,
                        const SizeStudyConfig& config) {
  if (config.draws == 0) throw ConfigError("size study needs at least one draw");
  const std::vector<double> tau(grid.begin(), grid.end());
  const Estimator estimator = [&tau](const WeightedSample& s) { return qte(s, tau).estimates; };

  SizeStudy out;
  out.draws = config.draws;
  out.alpha = config.alpha;
  for (std::size_t m = 0; m < config.draws; ++m) {
    spec.seed = splitmix64(config.seed ^ splitmix64(m));
    const GeneratedSample data = generate(spec);
    BootstrapConfig boot;
    boot.replications = config.replications;
    boot.seed = splitmix64(spec.seed + 1);
    boot.threads = 1;
    const KsResult r =
        ks_tests(data.sample, estimator, boot, static_cast<double>(data.sample.size()));
    out.rejections += r.p_ks <= config.alpha;
  }
  out.rate = static_cast<double>(out.rejections) / static_cast<double>(out.draws);
  out.in_band = out.rate >= config.band_lo && out.rate <= config.band_hi;
  return out;
}

}  // namespace qdecomp
