#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qdecomp/averages.hpp"
#include "qdecomp/errors.hpp"
#include "qdecomp/inference.hpp"

using namespace qdecomp;

namespace {

WeightedSample spread(std::size_t n) {
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < n; ++i) {
    obs.push_back({static_cast<double>((i * 37) % 101), static_cast<int>(i % 2),
                   1.0 + static_cast<double>(i % 3), i % 4 < 2 ? 0u : 1u, {}});
  }
  return WeightedSample(obs, {"a", "b"});
}

const Estimator kAte = [](const WeightedSample& s) { return Estimates{ate(s)}; };

}  // namespace

TEST_CASE("degenerate outcomes give zero se and no stars") {
  const auto s = testing::arms({3, 3, 3, 3}, {3, 3, 3, 3});
  BootstrapConfig cfg;
  cfg.replications = 50;
  cfg.scheme = ResampleScheme::kStratified;
  const auto r = bootstrap_se(s, kAte, cfg);
  CHECK(r.entries[0].se == 0.0);
  CHECK(r.entries[0].sig == SigCode::kNone);
}

TEST_CASE("replication prefix is reproducible") {
  const auto s = spread(200);
  BootstrapConfig small;
  small.replications = 40;
  small.seed = 5;
  BootstrapConfig large = small;
  large.replications = 80;
  large.threads = 3;
  const auto a = replicate(s, kAte, small);
  const auto b = replicate(s, kAte, large);
  for (std::size_t i = 0; i < 40; ++i) CHECK(a.draws[i] == b.draws[i]);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(resample_rows(s, small, i) == resample_rows(s, large, i));
  }
}

TEST_CASE("thread count does not change results") {
  const auto s = spread(300);
  BootstrapConfig one;
  one.replications = 64;
  one.seed = 17;
  one.threads = 1;
  BootstrapConfig many = one;
  many.threads = 8;
  const auto a = bootstrap_se(s, kAte, one);
  const auto b = bootstrap_se(s, kAte, many);
  CHECK(a.entries[0].se == b.entries[0].se);
}

TEST_CASE("stratified resampling keeps cell sizes") {
  const auto s = spread(100);
  BootstrapConfig cfg;
  cfg.scheme = ResampleScheme::kStratified;
  cfg.seed = 3;
  const auto rows = resample_rows(s, cfg, 7);
  const auto r = s.take(rows);
  for (int d = 0; d < 2; ++d) {
    for (std::size_t g = 0; g < 2; ++g) CHECK(r.cell_count(d, g) == s.cell_count(d, g));
  }
}

TEST_CASE("failures above the threshold abort") {
  const auto s = testing::eight_point();
  BootstrapConfig cfg;
  cfg.replications = 100;
  const Estimator fragile = [](const WeightedSample& x) -> Estimates {
    if (x[0].outcome > 15) throw EstimationError("synthetic");
    return {1.0};
  };
  CHECK_THROWS_AS(bootstrap_se(s, fragile, cfg), EstimationError);
  const Estimator broken = [](const WeightedSample&) -> Estimates {
    throw std::logic_error("bug");
  };
  CHECK_THROWS_AS(bootstrap_se(s, broken, cfg), std::logic_error);
}

TEST_CASE("normal ratio codes") {
  CHECK(normal_ratio_code(1.0, 1.0) == SigCode::kNone);
  CHECK(normal_ratio_code(1.7, 1.0) == SigCode::kP10);
  CHECK(normal_ratio_code(-2.0, 1.0) == SigCode::kP5);
  CHECK(normal_ratio_code(2.6, 1.0) == SigCode::kP1);
  CHECK(normal_ratio_code(1.0, 0.0) == SigCode::kNone);
  CHECK(stars(SigCode::kP1) == "***");
}

TEST_CASE("summarize skips NaN entries and uses n-1") {
  Replications reps;
  reps.draws = {{1.0, NAN}, {3.0, NAN}};
  reps.failed = {0, 0};
  const std::vector<double> point{2.0, NAN};
  const auto e = summarize(point, reps);
  CHECK(e[0].se == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::isnan(e[1].se));
}

TEST_CASE("percentile rule") {
  Replications reps;
  for (int i = 0; i < 100; ++i) {
    reps.draws.push_back({1.0 + i * 0.01, -0.5 + i * 0.01});
    reps.failed.push_back(0);
  }
  const std::vector<double> point{1.5, 0.0};
  const auto e = summarize(point, reps, SignificanceRule::kPercentileInterval);
  CHECK(e[0].sig == SigCode::kP1);
  CHECK(e[1].sig == SigCode::kNone);
}

TEST_CASE("ks statistics of a zero series") {
  Replications reps;
  for (int i = 0; i < 10; ++i) {
    reps.draws.push_back({0.0, 0.0, 0.0});
    reps.failed.push_back(0);
  }
  const std::vector<double> zero{0.0, 0.0, 0.0};
  const auto r = ks_test(zero, reps, 100);
  CHECK(r.ks == 0.0);
  CHECK(r.p_ks == 1.0);
  CHECK(r.p_psd == 1.0);
  CHECK(r.p_nsd == 1.0);
}

TEST_CASE("ks statistics of a constant series") {
  Replications reps;
  for (int i = 0; i < 10; ++i) {
    reps.draws.push_back({2.0 + 0.1 * i, 2.0, 2.0 - 0.1 * i});
    reps.failed.push_back(0);
  }
  const std::vector<double> c{2.0, 2.0, 2.0};
  const auto r = ks_test(c, reps, 25);
  CHECK(r.ks == 10.0);
  CHECK(r.psd == 10.0);
  CHECK(r.nsd == 10.0);
  CHECK(r.retained == 3);
  const std::vector<double> neg{-2.0, -2.0, -2.0};
  const auto rn = ks_test(neg, reps, 25);
  CHECK(rn.ks == 10.0);
  CHECK(rn.psd == -10.0);
  CHECK(rn.nsd == -10.0);
}

TEST_CASE("ks recentring ignores excluded entries") {
  Replications reps;
  for (int i = 0; i < 20; ++i) {
    reps.draws.push_back({1.0 + (i % 5) * 0.1, 100.0 * i});
    reps.failed.push_back(0);
  }
  const std::vector<double> p{1.0, NAN};
  const auto r = ks_test(p, reps, 4);
  CHECK(r.retained == 1);
  CHECK(r.ks == 2.0);
  CHECK(r.p_ks == 0.0);
}

TEST_CASE("bootstrap config validation") {
  BootstrapConfig c;
  c.replications = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
