#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qdecomp/dgp.hpp"
#include "qdecomp/effects.hpp"
#include "qdecomp/inference.hpp"

namespace qdecomp {

inline constexpr double kDefaultToleranceFactor = 3.0;

// Largest deviation of an estimated quantity from its analytic value, scaled
// by the truth record's quantile-spacing tolerance at each (tau, group).
//   null_structural:  SQTE(tau, g) against 0
//   fully_structural: TQTE(tau, g) - QTE(tau) against 0, over tau whose true
//                     relative rank lies inside the clip interval
//   shift, mass_point: QTE(tau) against the analytic QTE
struct IdentityCheck {
  std::string quantity;
  std::size_t points = 0;
  double max_abs_deviation = 0.0;
  double max_ratio = 0.0;  // max |deviation| / tolerance
  double tolerance_factor = kDefaultToleranceFactor;
  bool pass = false;
};

IdentityCheck identity_check(const GeneratedSample& data, std::span<const double> grid,
                             const RankConfig& rank,
                             double tolerance_factor = kDefaultToleranceFactor);

struct SizeStudyConfig {
  std::size_t draws = 200;
  std::size_t replications = 199;
  double alpha = 0.10;
  double band_lo = 0.05;
  double band_hi = 0.15;
  std::uint64_t seed = 1;
};

struct SizeStudy {
  std::size_t draws = 0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double alpha = 0.0;
  bool in_band = false;
};

// Monte Carlo size of the recentered-bootstrap KS test applied to the QTE
// series, for data generated from `spec` (which should carry no effect).
// Draw m uses DGP seed splitmix(seed, m) and its own bootstrap stream.
SizeStudy ks_size_study(DgpSpec spec, std::span<const double> grid,
                        const SizeStudyConfig& config);

}  // namespace qdecomp
