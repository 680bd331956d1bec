#include "qdecomp/dgp.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numeric>

#include "qdecomp/errors.hpp"
#include "qdecomp/format.hpp"
#include "qdecomp/rng.hpp"

namespace qdecomp {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

// Draw slots within one observation's counter stream.
enum Slot : std::uint64_t { kGroupDraw, kTreatmentDraw, kNoiseDraw, kZeroDraw, kWeightDraw };

}  // namespace

std::string_view to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::kNullStructural: return "null_structural";
    case DgpKind::kFullyStructural: return "fully_structural";
    case DgpKind::kShift: return "shift";
    case DgpKind::kMassPoint: return "mass_point";
  }
  return "?";
}

DgpKind parse_dgp_kind(std::string_view text) {
  for (DgpKind k : {DgpKind::kNullStructural, DgpKind::kFullyStructural, DgpKind::kShift,
                    DgpKind::kMassPoint}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown DGP kind '" + std::string(text) + "'");
}

void DgpSpec::validate() const {
  if (n < 1) throw ConfigError("DGP sample size must be at least 1");
  if (group_shares.empty()) throw ConfigError("DGP needs at least one group");
  double total = 0.0;
  for (double s : group_shares) {
    if (!(s > 0.0)) throw ConfigError("group shares must be positive");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("group shares must sum to 1");
  if (!(treatment_prob > 0.0 && treatment_prob < 1.0)) {
    throw ConfigError("treatment probability must lie in (0, 1)");
  }
  if (!(log_scale > 0.0)) throw ConfigError("log scale must be positive");
  if (!group_log_shift.empty() && group_log_shift.size() != group_shares.size()) {
    throw ConfigError("group_log_shift needs one entry per group");
  }
  if (kind == DgpKind::kShift && !(shift >= 0.0)) {
    throw ConfigError("shift must be non-negative (outcomes stay non-negative)");
  }
  for (double p : {zero_mass, zero_mass_treated}) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("zero mass must lie in [0, 1)");
  }
}

double DgpSpec::group_offset(std::size_t g) const {
  if (kind == DgpKind::kNullStructural) return 0.0;
  return group_log_shift.empty() ? 0.3 * static_cast<double>(g) : group_log_shift[g];
}

// ---- truth ------------------------------------------------------------------

TruthRecord::TruthRecord(DgpSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

std::string TruthRecord::family() const {
  std::string s = "lognormal(log_location=" + format_number(spec_.log_location) +
                  ", log_scale=" + format_number(spec_.log_scale) + ")";
  if (spec_.kind == DgpKind::kMassPoint) {
    s += " with zero mass " + format_number(spec_.zero_mass) + " (control), " +
         format_number(spec_.zero_mass_treated) + " (treated)";
  }
  return s;
}

double TruthRecord::log_location(int d, std::size_t g) const {
  double loc = spec_.log_location + spec_.group_offset(g);
  if (d == 1 && spec_.kind != DgpKind::kShift) loc += spec_.treatment_log_shift;
  return loc;
}

double TruthRecord::zero_mass(int d) const {
  if (spec_.kind != DgpKind::kMassPoint) return 0.0;
  return d == 1 ? spec_.zero_mass_treated : spec_.zero_mass;
}

double TruthRecord::cdf(int d, std::optional<std::size_t> g, double y) const {
  if (!g) {
    double total = 0.0;
    for (std::size_t k = 0; k < spec_.group_shares.size(); ++k) {
      total += spec_.group_shares[k] * cdf(d, k, y);
    }
    return total;
  }
  if (y < 0.0) return 0.0;
  double continuous_part = y;
  if (spec_.kind == DgpKind::kShift && d == 1) continuous_part = y - spec_.shift;
  double f = 0.0;
  if (continuous_part > 0.0) {
    f = normal_cdf((std::log(continuous_part) - log_location(d, *g)) / spec_.log_scale);
  }
  const double p0 = zero_mass(d);
  return p0 + (1.0 - p0) * f;
}

double TruthRecord::quantile(int d, std::optional<std::size_t> g, double tau) const {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("truth quantile needs tau in (0, 1)");
  if (!g) {
    if (spec_.group_shares.size() == 1) return quantile(d, std::size_t{0}, tau);
    // Mixture over groups: bisection on the pooled CDF.
    double lo = 0.0;
    double hi = 1.0;
    for (std::size_t k = 0; k < spec_.group_shares.size(); ++k) {
      hi = std::max(hi, quantile(d, k, tau));
      lo = std::min(lo, quantile(d, k, tau));
    }
    if (cdf(d, std::nullopt, lo) >= tau) return lo;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(d, std::nullopt, mid) >= tau ? hi : lo) = mid;
    }
    return hi;
  }
  const double p0 = zero_mass(d);
  if (tau <= p0) return 0.0;
  const double u = (tau - p0) / (1.0 - p0);
  double y = std::exp(log_location(d, *g) + spec_.log_scale * normal_quantile(u));
  if (spec_.kind == DgpKind::kShift && d == 1) y += spec_.shift;
  return y;
}

double TruthRecord::mean(int d, std::optional<std::size_t> g) const {
  if (!g) {
    double total = 0.0;
    for (std::size_t k = 0; k < spec_.group_shares.size(); ++k) {
      total += spec_.group_shares[k] * mean(d, k);
    }
    return total;
  }
  const double s2 = spec_.log_scale * spec_.log_scale;
  double m = (1.0 - zero_mass(d)) * std::exp(log_location(d, *g) + 0.5 * s2);
  if (spec_.kind == DgpKind::kShift && d == 1) m += spec_.shift;
  return m;
}

double TruthRecord::variance(int d, std::optional<std::size_t> g) const {
  // E[Y^2] per group, then the mixture variance.
  const double s2 = spec_.log_scale * spec_.log_scale;
  auto second_moment = [&](std::size_t k) {
    const double loc = log_location(d, k);
    const double keep = 1.0 - zero_mass(d);
    double m2 = keep * std::exp(2.0 * loc + 2.0 * s2);
    if (spec_.kind == DgpKind::kShift && d == 1) {
      const double m1 = std::exp(loc + 0.5 * s2);
      m2 += 2.0 * spec_.shift * m1 + spec_.shift * spec_.shift;
    }
    return m2;
  };
  if (g) {
    const double m = mean(d, g);
    return second_moment(*g) - m * m;
  }
  double m2 = 0.0;
  for (std::size_t k = 0; k < spec_.group_shares.size(); ++k) {
    m2 += spec_.group_shares[k] * second_moment(k);
  }
  const double m = mean(d);
  return m2 - m * m;
}

double TruthRecord::qte(double tau) const {
  return quantile(1, std::nullopt, tau) - quantile(0, std::nullopt, tau);
}

double TruthRecord::cqte(double tau, std::size_t g) const {
  return quantile(1, g, tau) - quantile(0, g, tau);
}

double TruthRecord::relative_rank(double tau, std::size_t g) const {
  return cdf(0, g, quantile(0, std::nullopt, tau));
}

double TruthRecord::tqte(double tau, std::size_t g) const {
  const double r = relative_rank(tau, g);
  return quantile(1, g, r) - quantile(0, g, r);
}

double TruthRecord::cell_size(std::optional<std::size_t> g) const {
  const double arm = std::min(spec_.treatment_prob, 1.0 - spec_.treatment_prob);
  const double share = g ? spec_.group_shares[*g] : 1.0;
  return static_cast<double>(spec_.n) * arm * share;
}

double TruthRecord::quantile_spacing_tolerance(double tau, std::optional<std::size_t> g) const {
  const double r = g ? relative_rank(tau, *g) : tau;
  const double s = std::sqrt(r * (1.0 - r) / cell_size(g));
  const double eps = 1e-9;
  const double lo = std::max(r - s, eps);
  const double hi = std::min(r + s, 1.0 - eps);
  double width = 0.0;
  for (int d = 0; d < 2; ++d) width = std::max(width, quantile(d, g, hi) - quantile(d, g, lo));
  return width;
}

// ---- generation -------------------------------------------------------------

GeneratedSample generate(const DgpSpec& spec) {
  spec.validate();
  TruthRecord truth(spec);
  const std::size_t groups = spec.group_shares.size();
  std::vector<double> cumulative(groups);
  std::partial_sum(spec.group_shares.begin(), spec.group_shares.end(), cumulative.begin());

  std::vector<Observation> obs(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const CounterStream stream(spec.seed, i);
    Observation& o = obs[i];
    const double ug = stream.uniform(kGroupDraw);
    o.group = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end() - 1, ug) - cumulative.begin());
    o.treatment = stream.uniform(kTreatmentDraw) < spec.treatment_prob ? 1 : 0;
    o.weight = spec.heterogeneous_weights ? 0.5 + stream.uniform(kWeightDraw) : 1.0;

    const double z = normal_quantile(stream.uniform(kNoiseDraw));
    const double offset = spec.group_offset(o.group);
    const double base = spec.log_location + offset + spec.log_scale * z;
    switch (spec.kind) {
      case DgpKind::kNullStructural:
      case DgpKind::kFullyStructural:
        o.outcome = std::exp(base + (o.treatment ? spec.treatment_log_shift : 0.0));
        break;
      case DgpKind::kShift:
        o.outcome = std::exp(base) + (o.treatment ? spec.shift : 0.0);
        break;
      case DgpKind::kMassPoint: {
        const double p0 = o.treatment ? spec.zero_mass_treated : spec.zero_mass;
        o.outcome = stream.uniform(kZeroDraw) < p0
                        ? 0.0
                        : std::exp(base + (o.treatment ? spec.treatment_log_shift : 0.0));
        break;
      }
    }
  }
  std::vector<std::string> levels;
  for (std::size_t g = 0; g < groups; ++g) levels.push_back("g" + std::to_string(g));
  return {WeightedSample(std::move(obs), std::move(levels)), std::move(truth)};
}

}  // namespace qdecomp
