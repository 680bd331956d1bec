#include <cmath>

#include "doctest.h"
#include "qdecomp/dgp.hpp"
#include "qdecomp/effects.hpp"
#include "qdecomp/errors.hpp"
#include "qdecomp/simulate.hpp"

using namespace qdecomp;

TEST_CASE("shift truth has constant QTE") {
  DgpSpec spec;
  spec.kind = DgpKind::kShift;
  spec.shift = 5.0;
  const TruthRecord t(spec);
  for (double tau : {0.05, 0.3, 0.5, 0.9}) CHECK(t.qte(tau) == doctest::Approx(5.0));
  CHECK(t.mean(1) - t.mean(0) == doctest::Approx(5.0));
  CHECK(t.variance(1) == doctest::Approx(t.variance(0)));
}

TEST_CASE("null structural truth has zero SQTE") {
  DgpSpec spec;
  spec.kind = DgpKind::kNullStructural;
  const TruthRecord t(spec);
  for (std::size_t g = 0; g < 2; ++g) {
    for (double tau : {0.1, 0.5, 0.9}) CHECK(std::abs(t.sqte(tau, g)) < 1e-9);
  }
}

TEST_CASE("fully structural truth has TQTE equal to QTE") {
  DgpSpec spec;
  spec.kind = DgpKind::kFullyStructural;
  const TruthRecord t(spec);
  for (double tau : {0.2, 0.5, 0.8}) {
    CHECK(t.tqte(tau, 0) == doctest::Approx(t.qte(tau)).epsilon(1e-6));
    CHECK(t.tqte(tau, 1) == doctest::Approx(t.qte(tau)).epsilon(1e-6));
    CHECK(t.cqte(tau, 1) != doctest::Approx(t.qte(tau)));
  }
}

TEST_CASE("mass point truth") {
  DgpSpec spec;
  spec.kind = DgpKind::kMassPoint;
  const TruthRecord t(spec);
  CHECK(t.cdf(0, std::nullopt, 0.0) == doctest::Approx(0.21));
  CHECK(t.cdf(1, std::nullopt, 0.0) == doctest::Approx(0.16));
  CHECK(t.quantile(0, std::nullopt, 0.2) == 0.0);
  CHECK(t.quantile(0, std::nullopt, 0.5) > 0.0);
  const double q = t.quantile(0, std::nullopt, 0.6);
  CHECK(t.cdf(0, std::nullopt, q) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("generated samples are reproducible and prefix stable") {
  DgpSpec spec;
  spec.kind = DgpKind::kMassPoint;
  spec.heterogeneous_weights = true;
  spec.n = 300;
  spec.seed = 42;
  const auto a = generate(spec);
  const auto b = generate(spec);
  spec.n = 600;
  const auto c = generate(spec);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(a.sample[i].outcome == b.sample[i].outcome);
    CHECK(a.sample[i].outcome == c.sample[i].outcome);
    CHECK(a.sample[i].weight == c.sample[i].weight);
    CHECK(a.sample[i].group == c.sample[i].group);
  }
  spec.seed = 43;
  CHECK(generate(spec).sample[0].outcome != c.sample[0].outcome);
}

TEST_CASE("generated sample matches its truth") {
  DgpSpec spec;
  spec.kind = DgpKind::kMassPoint;
  spec.n = 40000;
  const auto data = generate(spec);
  const DistributionSet dist(data.sample);
  CHECK(dist.arm(0).cdf(0.0) == doctest::Approx(0.21).epsilon(0.05));
  CHECK(dist.arm(1).cdf(0.0) == doctest::Approx(0.16).epsilon(0.07));
  const auto check = identity_check(data, percentile_grid(99), RankConfig{});
  CHECK(check.pass);
}

TEST_CASE("shift identity check passes") {
  DgpSpec spec;
  spec.kind = DgpKind::kShift;
  spec.n = 20000;
  const auto check = identity_check(generate(spec), percentile_grid(99), RankConfig{});
  CHECK(check.pass);
  CHECK(check.points == 99);
}

TEST_CASE("spec validation and names") {
  DgpSpec spec;
  spec.group_shares = {0.5, 0.6};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.group_shares = {1.0};
  spec.treatment_prob = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK(parse_dgp_kind("fully_structural") == DgpKind::kFullyStructural);
  CHECK(to_string(DgpKind::kMassPoint) == "mass_point");
  CHECK_THROWS_AS(parse_dgp_kind("other"), ConfigError);
}
