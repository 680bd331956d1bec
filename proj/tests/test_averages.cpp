#include "doctest.h"
#include "fixtures.hpp"
#include "qdecomp/averages.hpp"
#include "qdecomp/errors.hpp"

using namespace qdecomp;
using testing::eight_point;

TEST_CASE("ate and cate on the fixture") {
  const auto s = eight_point();
  CHECK(ate(s) == 5.0);
  CHECK(cate(s, "f") == 5.0);
  CHECK(cate(s, "m") == 5.0);
  const auto same = testing::arms({1, 2, 3}, {3, 2, 1});
  CHECK(ate(same) == 0.0);
  CHECK(cate(same, "all") == ate(same));
}

TEST_CASE("ate shifts linearly") {
  const auto base = testing::arms({1, 4, 9}, {2, 3, 5}, {1, 2, 3}, {0.5, 1, 2});
  const auto moved = testing::arms({1, 4, 9}, {9, 10, 12}, {1, 2, 3}, {0.5, 1, 2});
  CHECK(ate(moved) - ate(base) == doctest::Approx(7.0));
}

TEST_CASE("tate averages over the reference observations") {
  const auto s = eight_point();
  const RankConfig pooled;
  // Pooled control reference {10,20,30,40}: ranks in f are 0.5, 1, 1, 1 -> 0.99.
  const auto tf = tate(s, "f", pooled);
  CHECK(tf.value == -2.5);
  CHECK(tf.dropped_count == 0);
  CHECK(sate(s, "f", pooled) == 7.5);
  // Ranks in m are 0, 0 (dropped), 0.5, 1 -> 0.99.
  const auto tm = tate(s, "m", pooled);
  CHECK(tm.value == 5.0);
  CHECK(tm.dropped_count == 2);
  CHECK(tm.dropped_share == 0.5);
  CHECK(sate(s, "m", pooled) == 0.0);
}

TEST_CASE("tate with the group's own control reference") {
  const auto s = eight_point();
  RankConfig own;
  own.reference = {ReferenceKind::kGroupUntreated, "f"};
  // Y=10 -> rank 0.5 -> 15; Y=20 -> rank 1 -> 0.99 -> 25.
  CHECK(tate(s, "f", own).value == 5.0);
  CHECK(sate(s, "f", own) == 0.0);
}

TEST_CASE("tate of identical arms is zero") {
  const auto s = testing::arms({1, 2, 3, 4}, {1, 2, 3, 4});
  CHECK(tate(s, "all", RankConfig{}).value == 0.0);
}

TEST_CASE("tate with the treated rank side") {
  const auto s = eight_point();
  RankConfig cfg;
  cfg.reference = {ReferenceKind::kGroupTreated, "f"};
  cfg.rank_side = RankSide::kTreated;
  CHECK(tate(s, "f", cfg).value == 5.0);
}

TEST_CASE("decompose averages") {
  const auto s = eight_point();
  const auto d = decompose_averages(s, RankConfig{});
  CHECK(d.ate == 5.0);
  CHECK(d.mean_treated == 30.0);
  CHECK(d.mean_control == 25.0);
  REQUIRE(d.groups.size() == 2);
  for (const auto& row : d.groups) {
    CHECK(row.sate == row.cate - row.tate);
  }
  CHECK(d.groups[1].tate_dropped_share == 0.5);
}

TEST_CASE("one-arm samples cannot give a mean difference") {
  std::vector<Observation> obs = {{1, 0, 1, 0, {}}, {2, 0, 1, 0, {}}};
  CHECK_THROWS_AS(ate(WeightedSample(obs, {"a"})), EstimationError);
}
