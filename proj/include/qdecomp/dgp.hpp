#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdecomp/sample.hpp"

namespace qdecomp {

enum class DgpKind {
  kNullStructural,   // groups are random labels: true SQTE = 0
  kFullyStructural,  // Y(d) = phi_d(U), U | g group-specific: true TQTE(tau, g) = QTE(tau)
  kShift,            // Y(1) = Y(0) + shift: every quantile effect equals shift
  kMassPoint,        // atom at zero earnings in both arms
};

std::string_view to_string(DgpKind kind);
DgpKind parse_dgp_kind(std::string_view text);

// Synthetic design. Continuous parts are log-normal:
//   log Y(0) | g ~ N(log_location + group_log_shift[g], log_scale^2)
// with kind-specific treated outcomes (see generate()).
struct DgpSpec {
  DgpKind kind = DgpKind::kNullStructural;
  std::size_t n = 1000;
  std::vector<double> group_shares{0.5, 0.5};
  double treatment_prob = 0.5;
  double log_location = 5.5;
  double log_scale = 0.5;
  // Treated log-location increment (null, fully structural, mass point).
  double treatment_log_shift = 0.1;
  // Per-group log-location offsets; ignored by kNullStructural. Empty means
  // 0, 0.3, 0.6, ... by group index.
  std::vector<double> group_log_shift;
  double shift = 5.0;                // kShift
  double zero_mass = 0.21;           // kMassPoint, control arm
  double zero_mass_treated = 0.16;   // kMassPoint, treated arm
  bool heterogeneous_weights = false;  // weights ~ U(0.5, 1.5) when set
  std::uint64_t seed = 1;

  void validate() const;
  double group_offset(std::size_t g) const;
};

// Closed-form distributions of the generating design.
class TruthRecord {
 public:
  explicit TruthRecord(DgpSpec spec);

  const DgpSpec& spec() const { return spec_; }
  std::string family() const;

  // Potential-outcome CDF / quantile of arm d within group g, or pooled over
  // groups when g is empty.
  double cdf(int d, std::optional<std::size_t> g, double y) const;
  double quantile(int d, std::optional<std::size_t> g, double tau) const;
  double mean(int d, std::optional<std::size_t> g = std::nullopt) const;
  double variance(int d, std::optional<std::size_t> g = std::nullopt) const;

  double qte(double tau) const;
  double cqte(double tau, std::size_t g) const;
  // Relative rank F_0|g(Q_0(tau)) with the pooled untreated reference.
  double relative_rank(double tau, std::size_t g) const;
  double tqte(double tau, std::size_t g) const;
  double sqte(double tau, std::size_t g) const { return cqte(tau, g) - tqte(tau, g); }

  // Expected size of the smallest (arm, group) cell, or arm when g is empty.
  double cell_size(std::optional<std::size_t> g) const;

  // Width of the analytic quantile interval Q(r + s) - Q(r - s), maximised
  // over both arms, where r is the true rank at which the group's
  // quantiles are evaluated and s = sqrt(r (1 - r) / n_cell) is one standard
  // deviation of an empirical rank in the smallest cell. This is the scale of
  // sampling error of an empirical quantile at that rank.
  double quantile_spacing_tolerance(double tau, std::optional<std::size_t> g) const;

 private:
  double log_location(int d, std::size_t g) const;
  double zero_mass(int d) const;

  DgpSpec spec_;
};

struct GeneratedSample {
  WeightedSample sample;
  TruthRecord truth;
};

// Observation i draws its randomness from the counter stream keyed by
// (seed, i), so generation is reproducible and order independent. Group
// labels are "g0", "g1", ...
GeneratedSample generate(const DgpSpec& spec);

}  // namespace qdecomp
