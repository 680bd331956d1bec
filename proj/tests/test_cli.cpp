#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "qdecomp/cli.hpp"
#include "qdecomp/errors.hpp"

using namespace qdecomp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qdecomp-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qdecomp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::string> fixture_args(const TempDir& dir, const std::string& out) {
  return {"decompose", "--input", (dir.path / "fx.csv").string(), "--outcome", "y",
          "--treatment", "d", "--group", "g", "--reps-quantile", "40", "--reps-average", "40",
          "--resample", "stratified", "--grid", "0.25,0.5,0.75", "--out",
          (dir.path / out).string()};
}

}  // namespace

TEST_CASE("key value parsing") {
  std::istringstream in("# comment\ninput = a.csv\ngroup = sex\ngroup = kids  # trailing\n\nseed=7\n");
  const auto kv = parse_key_values(in);
  CHECK(kv.at("input") == std::vector<std::string>{"a.csv"});
  CHECK(kv.at("group") == std::vector<std::string>{"sex", "kids"});
  CHECK(kv.at("seed") == std::vector<std::string>{"7"});
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(parse_key_values(bad), ConfigError);
}

TEST_CASE("run config resolution") {
  KeyValues kv{{"input", {"x.csv"}}, {"grid", {"9"}}, {"reference", {"group-y1:f"}},
               {"rank-side", {"treated"}}, {"clip-lo", {"0.05"}}};
  const auto c = resolve_run_config(kv);
  CHECK(c.grid.size() == 9);
  CHECK(c.rank.reference.kind == ReferenceKind::kGroupTreated);
  CHECK(c.rank.reference.group == "f");
  CHECK(c.rank.rank_side == RankSide::kTreated);
  CHECK(c.rank.clip_lo == 0.05);
  const auto again = resolve_run_config(c.echo());
  CHECK(format_key_values(again.echo()) == format_key_values(c.echo()));

  CHECK_THROWS_AS(resolve_run_config({}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config({{"input", {"x"}}, {"bogus", {"1"}}}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config({{"input", {"x"}}, {"seed", {"abc"}}}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config({{"input", {"x"}}, {"clip-lo", {"0.995"}}}), ConfigError);
  CHECK_THROWS_AS(parse_reference("y2"), ConfigError);
  CHECK(format_reference(parse_reference("group-y0:a:b")) == "group-y0:a:b");
  CHECK(parse_grid("0.1, 0.5").size() == 2);
  CHECK_THROWS_AS(parse_grid("0.5,0.1"), ConfigError);
}

TEST_CASE("decompose on the fixture") {
  TempDir dir;
  write(dir.path / "fx.csv", testing::kEightPointCsv);
  const auto r = run(fixture_args(dir, "out"));
  INFO(r.err);
  REQUIRE(r.code == kExitOk);
  const std::string averages = slurp(dir.path / "out" / "averages.csv");
  CHECK(averages.find("\nATE,all,5,") != std::string::npos);
  CHECK(averages.find("\nCATE,f,5,") != std::string::npos);
  CHECK(averages.find("\nTATE,f,-2.5,") != std::string::npos);
  CHECK(averages.find("\nSATE,f,7.5,") != std::string::npos);
  for (const char* f : {"series.csv", "deciles.csv", "ks.csv", "manifest.json", "run.conf"}) {
    CHECK(fs::exists(dir.path / "out" / f));
  }
}

TEST_CASE("decompose is byte-identical across runs and thread counts") {
  TempDir dir;
  write(dir.path / "fx.csv", testing::kEightPointCsv);
  auto a = fixture_args(dir, "a");
  auto b = fixture_args(dir, "b");
  a.insert(a.end(), {"--threads", "1"});
  b.insert(b.end(), {"--threads", "4"});
  REQUIRE(run(a).code == kExitOk);
  REQUIRE(run(b).code == kExitOk);
  for (const char* f : {"series.csv", "deciles.csv", "averages.csv", "ks.csv"}) {
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
  }
}

TEST_CASE("run.conf replays the run") {
  TempDir dir;
  write(dir.path / "fx.csv", testing::kEightPointCsv);
  REQUIRE(run(fixture_args(dir, "a")).code == kExitOk);
  const auto r = run({"decompose", "--config", (dir.path / "a" / "run.conf").string(), "--out",
                      (dir.path / "b").string()});
  INFO(r.err);
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir.path / "a" / "series.csv") == slurp(dir.path / "b" / "series.csv"));
  CHECK(slurp(dir.path / "a" / "averages.csv") == slurp(dir.path / "b" / "averages.csv"));
}

TEST_CASE("config file with flag override") {
  TempDir dir;
  write(dir.path / "fx.csv", testing::kEightPointCsv);
  write(dir.path / "run.conf", "input = " + (dir.path / "fx.csv").string() +
                                   "\noutcome = y\ntreatment = d\ngroup = g\nreps-quantile = 20\n"
                                   "reps-average = 20\nresample = stratified\ngrid = 3\nseed = 1\n");
  const auto r = run({"decompose", "--config", (dir.path / "run.conf").string(), "--seed", "2",
                      "--out", (dir.path / "o").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir.path / "o" / "run.conf").find("seed = 2\n") != std::string::npos);
}

TEST_CASE("errors map to exit codes") {
  TempDir dir;
  write(dir.path / "fx.csv", testing::kEightPointCsv);
  auto args = fixture_args(dir, "o");
  args[8] = "sex";
  const auto unknown = run(args);
  CHECK(unknown.code == kExitConfig);
  CHECK(unknown.err.find("sex") != std::string::npos);

  CHECK(run({"decompose", "--input", (dir.path / "missing.csv").string()}).code == kExitData);
  CHECK(run({"decompose", "--bogus-flag"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);

  write(dir.path / "bad.csv", "y,d,g\n1,0,a\n2,5,a\n");
  CHECK(run({"decompose", "--input", (dir.path / "bad.csv").string(), "--outcome", "y",
             "--treatment", "d"}).code == kExitData);

  write(dir.path / "thin.csv", "y,d,g\n1,0,a\n2,1,a\n3,1,a\n");
  CHECK(run({"decompose", "--input", (dir.path / "thin.csv").string(), "--outcome", "y",
             "--treatment", "d", "--out", (dir.path / "t").string()}).code == kExitData);

  // Pooled resampling of eight rows empties cells too often.
  auto pooled = fixture_args(dir, "p");
  pooled[14] = "pooled";
  CHECK(run(pooled).code == kExitEstimation);
}

TEST_CASE("diagnose") {
  TempDir dir;
  write(dir.path / "d.csv", "y,d,e,x\n1,0,0,1\n2,0,0,2\n3,1,1,1\n4,1,1,2\n");
  const auto r = run({"diagnose", "--input", (dir.path / "d.csv").string(), "--outcome", "y",
                      "--treatment", "d", "--enrolled", "e", "--covariate", "x", "--out",
                      (dir.path / "o").string()});
  INFO(r.err);
  REQUIRE(r.code == kExitOk);
  const std::string balance = slurp(dir.path / "o" / "balance.csv");
  CHECK(balance.find("\nx,1.5,0.5,1.5,0.5,0\n") != std::string::npos);
  CHECK(slurp(dir.path / "o" / "compliers.csv").find("\nall,1\n") != std::string::npos);
}

TEST_CASE("simulate") {
  const auto r = run({"simulate", "--dgp", "shift", "--n", "20000"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(run({"simulate", "--dgp", "nope"}).code == kExitConfig);
  CHECK(run({"simulate", "--study", "nope"}).code == kExitConfig);
}
