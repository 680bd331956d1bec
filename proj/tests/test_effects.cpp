#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qdecomp/errors.hpp"
#include "qdecomp/effects.hpp"

using namespace qdecomp;
using testing::eight_point;

TEST_CASE("qte examples") {
  const auto s = testing::arms({10, 20, 30, 40}, {12, 22, 32, 42});
  const std::vector<double> half{0.5};
  CHECK(qte(s, half).estimates[0] == 2.0);

  const auto same = testing::arms({1, 5, 9}, {1, 5, 9});
  for (double e : qte(same, percentile_grid(19)).estimates) CHECK(e == 0.0);
}

TEST_CASE("cqte examples") {
  const auto s = eight_point();
  const std::vector<double> half{0.5};
  CHECK(cqte(s, "f", half).estimates[0] == 5.0);
  CHECK(cqte(s, "m", half).estimates[0] == 5.0);

  const auto pooled = testing::arms({3, 1, 4, 1, 5}, {9, 2, 6, 5});
  const auto grid = percentile_grid(9);
  CHECK(cqte(pooled, "all", grid).estimates == qte(pooled, grid).estimates);
  CHECK_THROWS_AS(cqte(s, "x", half), DataError);
}

TEST_CASE("relative rank examples") {
  const auto s = eight_point();
  const RankConfig cfg;
  const auto f = relative_rank(s, "f", 0.75, cfg);
  CHECK(f.reason == Exclusion::kNone);
  CHECK(f.rank == 0.99);
  const auto m = relative_rank(s, "m", 0.75, cfg);
  CHECK(m.rank == 0.5);
  const auto low = relative_rank(s, "m", 0.25, cfg);
  CHECK(low.reason == Exclusion::kClipped);
  CHECK(std::isnan(low.rank));

  // Self reference at attained levels returns tau.
  RankConfig self;
  self.reference = {ReferenceKind::kGroupUntreated, "f"};
  CHECK(relative_rank(s, "f", 0.5, self).rank == 0.5);
}

TEST_CASE("relative rank below the mass point") {
  const auto s = testing::arms({0, 0, 0, 5, 6, 7, 8, 9}, {0, 3, 4, 5, 6, 7, 8, 9});
  RankConfig cfg;
  const auto r = relative_rank(s, "all", 0.2, cfg);
  CHECK(r.reason == Exclusion::kBelowMassPoint);
  cfg.mass_point_exclusion = false;
  CHECK(relative_rank(s, "all", 0.2, cfg).reason == Exclusion::kNone);
}

TEST_CASE("rank config validation") {
  RankConfig c;
  c.clip_lo = 0.6;
  c.clip_hi = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  RankConfig g;
  g.reference = {ReferenceKind::kGroupTreated, ""};
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("tqte and sqte on the eight point fixture") {
  const auto s = eight_point();
  const RankConfig cfg;
  const std::vector<double> q{0.25};
  const auto tf = tqte(s, "f", q, cfg);
  CHECK(tf.estimates[0] == 5.0);
  CHECK(tf.retained(0));
  const auto tm = tqte(s, "m", q, cfg);
  CHECK_FALSE(tm.retained(0));
  CHECK(tm.excluded[0] == Exclusion::kClipped);
  CHECK(std::isnan(tm.estimates[0]));

  const auto sf = sqte(s, "f", q, cfg);
  CHECK(sf.estimates[0] == 0.0);
  CHECK(cqte(s, "f", q).estimates[0] == 5.0);
  CHECK_FALSE(sqte(s, "m", q, cfg).retained(0));
}

TEST_CASE("degenerate group gives a constant series") {
  const auto s = testing::arms({4, 4, 4}, {9, 9});
  const auto t = tqte(s, "all", percentile_grid(9), RankConfig{});
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.retained(i)) CHECK(t.estimates[i] == 5.0);
  }
  CHECK(t.retained_count() > 0);
}

TEST_CASE("decompose_group shares arithmetic") {
  const auto s = eight_point();
  const DistributionSet dist(s);
  const auto grid = percentile_grid(19);
  const auto d = decompose_group(dist, 0, grid, RankConfig{});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!d.tqte.retained(i)) {
      CHECK_FALSE(d.sqte.retained(i));
      continue;
    }
    CHECK(d.sqte.estimates[i] == d.cqte.estimates[i] - d.tqte.estimates[i]);
  }
}

TEST_CASE("rank side treated and other references") {
  const auto s = eight_point();
  const auto grid = percentile_grid(9);
  for (auto kind : {ReferenceKind::kPooledUntreated, ReferenceKind::kPooledTreated,
                    ReferenceKind::kPooledObserved, ReferenceKind::kGroupUntreated,
                    ReferenceKind::kGroupTreated}) {
    for (auto side : {RankSide::kUntreated, RankSide::kTreated}) {
      RankConfig cfg;
      cfg.reference = {kind, kind >= ReferenceKind::kGroupUntreated ? "m" : ""};
      cfg.rank_side = side;
      const auto t = tqte(s, "f", grid, cfg);
      CHECK(t.size() == grid.size());
    }
  }
  // Treated-side rank against the group's own treated distribution is the identity.
  RankConfig cfg;
  cfg.reference = {ReferenceKind::kGroupTreated, "f"};
  cfg.rank_side = RankSide::kTreated;
  CHECK(relative_rank(s, "f", 0.5, cfg).rank == 0.5);
}

TEST_CASE("series difference") {
  const auto s = eight_point();
  const std::vector<double> half{0.5};
  const auto diff = series_difference(cqte(s, "f", half), cqte(s, "m", half));
  CHECK(diff.estimates[0] == 0.0);
  CHECK(diff.kind == EffectKind::kDiff);
  CHECK(diff.base_kind == EffectKind::kCqte);
  CHECK(diff.group == "f-m");

  const auto a = cqte(s, "f", percentile_grid(9));
  for (double e : series_difference(a, a).estimates) CHECK(e == 0.0);

  const std::vector<double> q{0.25};
  const auto ex = series_difference(tqte(s, "m", q, RankConfig{}), tqte(s, "f", q, RankConfig{}));
  CHECK_FALSE(ex.retained(0));

  CHECK_THROWS_AS(series_difference(a, cqte(s, "m", half)), EstimationError);
  CHECK_THROWS_AS(series_difference(a, qte(s, percentile_grid(9))), EstimationError);
}

TEST_CASE("grid helpers") {
  const auto g = percentile_grid(9);
  REQUIRE(g.size() == 9);
  CHECK(g[0] == 0.1);
  CHECK(g[8] == 0.9);
  CHECK_THROWS_AS(validate_grid(std::vector<double>{0.5, 0.4}), ConfigError);
  CHECK_THROWS_AS(validate_grid(std::vector<double>{0.0}), ConfigError);
  CHECK_THROWS_AS(validate_grid(std::vector<double>{}), ConfigError);
}

TEST_CASE("empty cells fail estimation") {
  std::vector<Observation> obs = {{1, 0, 1, 0, {}}, {2, 1, 1, 0, {}}, {3, 0, 1, 1, {}}};
  const WeightedSample s(obs, {"a", "b"});
  CHECK_THROWS_AS(cqte(s, "b", percentile_grid(9)), EstimationError);
}
