#include "qdecomp/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdecomp/dgp.hpp"
#include "qdecomp/errors.hpp"
#include "qdecomp/format.hpp"
#include "qdecomp/simulate.hpp"

namespace qdecomp {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kRunKeys = {
    "input",     "outcome",       "treatment", "weight",     "group",
    "enrolled",  "covariate",     "reference", "rank-side",  "clip-lo",
    "clip-hi",   "mass-point-exclusion",       "reps-quantile", "reps-average",
    "seed",      "grid",          "resample",  "significance", "threads",
    "out",       "format"};

bool repeatable(const std::string& key) { return key == "group" || key == "covariate"; }

// Keys that do not change any estimate and stay out of the run hash.
bool cosmetic(const std::string& key) { return key == "out" || key == "threads"; }

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::string& single(const KeyValues& kv, const std::string& key) {
  const auto& values = kv.at(key);
  if (values.size() != 1) throw ConfigError("setting '" + key + "' takes exactly one value");
  return values.front();
}

template <typename T>
T parse_integer(const std::string& text, const std::string& key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("setting '" + key + "' expects an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& text, const std::string& key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("setting '" + key + "' expects a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("setting '" + key + "' expects true or false, got '" + text + "'");
}

std::vector<double> parse_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim_copy(text.substr(start, comma - start));
    out.push_back(parse_real(piece, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim_copy(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim_copy(std::string_view(t).substr(0, eq));
    const std::string value = trim_copy(std::string_view(t).substr(eq + 1));
    if (repeatable(key)) {
      kv[key].push_back(value);
    } else {
      kv[key] = {value};
    }
  }
  return kv;
}

std::string format_key_values(const KeyValues& values) {
  std::string out;
  for (const auto& key : kRunKeys) {
    const auto it = values.find(key);
    if (it == values.end()) continue;
    for (const auto& v : it->second) out += key + " = " + v + "\n";
  }
  return out;
}

Reference parse_reference(std::string_view text) {
  if (text == "y0") return {ReferenceKind::kPooledUntreated, ""};
  if (text == "y1") return {ReferenceKind::kPooledTreated, ""};
  if (text == "observed") return {ReferenceKind::kPooledObserved, ""};
  if (text.rfind("group-y0:", 0) == 0) return {ReferenceKind::kGroupUntreated, std::string(text.substr(9))};
  if (text.rfind("group-y1:", 0) == 0) return {ReferenceKind::kGroupTreated, std::string(text.substr(9))};
  throw ConfigError("unknown reference '" + std::string(text) +
                    "' (expected y0, y1, observed, group-y0:<label> or group-y1:<label>)");
}

std::string format_reference(const Reference& ref) {
  switch (ref.kind) {
    case ReferenceKind::kPooledUntreated: return "y0";
    case ReferenceKind::kPooledTreated: return "y1";
    case ReferenceKind::kPooledObserved: return "observed";
    case ReferenceKind::kGroupUntreated: return "group-y0:" + ref.group;
    case ReferenceKind::kGroupTreated: return "group-y1:" + ref.group;
  }
  return "";
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> grid;
  if (text.find(',') == std::string_view::npos && text.find('.') == std::string_view::npos) {
    grid = percentile_grid(parse_integer<std::size_t>(std::string(text), "grid"));
  } else {
    grid = parse_list(text, "grid");
  }
  validate_grid(grid);
  return grid;
}

KeyValues RunConfig::echo() const {
  KeyValues kv;
  kv["input"] = {input};
  kv["outcome"] = {schema.outcome};
  kv["treatment"] = {schema.treatment};
  if (schema.weight) kv["weight"] = {*schema.weight};
  if (!schema.groups.empty()) kv["group"] = schema.groups;
  if (schema.enrolled) kv["enrolled"] = {*schema.enrolled};
  if (!schema.covariates.empty()) kv["covariate"] = schema.covariates;
  kv["reference"] = {format_reference(rank.reference)};
  kv["rank-side"] = {rank.rank_side == RankSide::kTreated ? "treated" : "control"};
  kv["clip-lo"] = {format_number(rank.clip_lo)};
  kv["clip-hi"] = {format_number(rank.clip_hi)};
  kv["mass-point-exclusion"] = {rank.mass_point_exclusion ? "true" : "false"};
  kv["reps-quantile"] = {std::to_string(reps_quantile)};
  kv["reps-average"] = {std::to_string(reps_average)};
  kv["seed"] = {std::to_string(seed)};
  kv["grid"] = {grid_text};
  kv["resample"] = {scheme == ResampleScheme::kStratified ? "stratified" : "pooled"};
  kv["significance"] = {significance == SignificanceRule::kPercentileInterval ? "percentile"
                                                                               : "normal"};
  kv["threads"] = {std::to_string(threads)};
  kv["out"] = {out};
  kv["format"] = {format == OutputFormat::kJson ? "json" : "csv"};
  return kv;
}

RunConfig resolve_run_config(const KeyValues& settings) {
  for (const auto& [key, values] : settings) {
    if (std::find(kRunKeys.begin(), kRunKeys.end(), key) == kRunKeys.end()) {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
  RunConfig c;
  auto has = [&](const char* key) { return settings.count(key) > 0; };
  if (!has("input")) throw ConfigError("no input file given (--input)");
  c.input = single(settings, "input");
  if (has("outcome")) c.schema.outcome = single(settings, "outcome");
  if (has("treatment")) c.schema.treatment = single(settings, "treatment");
  if (has("weight")) c.schema.weight = single(settings, "weight");
  if (has("group")) c.schema.groups = settings.at("group");
  if (has("enrolled")) c.schema.enrolled = single(settings, "enrolled");
  if (has("covariate")) c.schema.covariates = settings.at("covariate");
  if (has("reference")) c.rank.reference = parse_reference(single(settings, "reference"));
  if (has("rank-side")) {
    const auto& side = single(settings, "rank-side");
    if (side == "control") {
      c.rank.rank_side = RankSide::kUntreated;
    } else if (side == "treated") {
      c.rank.rank_side = RankSide::kTreated;
    } else {
      throw ConfigError("rank-side must be control or treated, got '" + side + "'");
    }
  }
  if (has("clip-lo")) c.rank.clip_lo = parse_real(single(settings, "clip-lo"), "clip-lo");
  if (has("clip-hi")) c.rank.clip_hi = parse_real(single(settings, "clip-hi"), "clip-hi");
  if (has("mass-point-exclusion")) {
    c.rank.mass_point_exclusion =
        parse_bool(single(settings, "mass-point-exclusion"), "mass-point-exclusion");
  }
  c.rank.validate();
  if (has("reps-quantile")) {
    c.reps_quantile = parse_integer<std::size_t>(single(settings, "reps-quantile"), "reps-quantile");
  }
  if (has("reps-average")) {
    c.reps_average = parse_integer<std::size_t>(single(settings, "reps-average"), "reps-average");
  }
  if (c.reps_quantile < 1 || c.reps_average < 1) {
    throw ConfigError("replication counts must be at least 1");
  }
  if (has("seed")) c.seed = parse_integer<std::uint64_t>(single(settings, "seed"), "seed");
  if (has("grid")) {
    c.grid_text = single(settings, "grid");
    c.grid = parse_grid(c.grid_text);
  }
  if (has("resample")) {
    const auto& r = single(settings, "resample");
    if (r == "pooled") {
      c.scheme = ResampleScheme::kPooled;
    } else if (r == "stratified") {
      c.scheme = ResampleScheme::kStratified;
    } else {
      throw ConfigError("resample must be pooled or stratified, got '" + r + "'");
    }
  }
  if (has("significance")) {
    const auto& s = single(settings, "significance");
    if (s == "normal") {
      c.significance = SignificanceRule::kNormalRatio;
    } else if (s == "percentile") {
      c.significance = SignificanceRule::kPercentileInterval;
    } else {
      throw ConfigError("significance must be normal or percentile, got '" + s + "'");
    }
  }
  if (has("threads")) c.threads = parse_integer<std::size_t>(single(settings, "threads"), "threads");
  if (has("out")) c.out = single(settings, "out");
  if (has("format")) {
    const auto& f = single(settings, "format");
    if (f == "csv") {
      c.format = OutputFormat::kCsv;
    } else if (f == "json") {
      c.format = OutputFormat::kJson;
    } else {
      throw ConfigError("format must be csv or json, got '" + f + "'");
    }
  }
  return c;
}

namespace {

struct RunContext {
  RunConfig config;
  LoadResult data;
  std::string run_hash;
  std::string input_digest;
  std::string config_text;
};

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

RunContext prepare(const KeyValues& settings) {
  RunContext ctx{resolve_run_config(settings), {WeightedSample({Observation{}}, {"x"}), 0}};
  ctx.data = load_csv(ctx.config.input, ctx.config.schema);
  ctx.input_digest = file_digest(ctx.config.input);
  ctx.config_text = format_key_values(ctx.config.echo());

  KeyValues hashed = ctx.config.echo();
  for (auto it = hashed.begin(); it != hashed.end();) {
    it = cosmetic(it->first) ? hashed.erase(it) : std::next(it);
  }
  ctx.run_hash = fnv1a_hex(std::string(kVersion) + "\n" + ctx.input_digest + "\n" +
                           format_key_values(hashed));

  std::error_code ec;
  fs::create_directories(ctx.config.out, ec);
  if (ec || !fs::is_directory(ctx.config.out)) {
    throw ConfigError("cannot create output directory '" + ctx.config.out + "'");
  }
  return ctx;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

template <typename Writer>
std::string render(Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  return ss.str();
}

ordered_json manifest_base(const RunContext& ctx, std::string_view command) {
  ordered_json m;
  m["software"] = {{"name", "qdecomp"}, {"version", kVersion}};
  m["command"] = command;
  m["run_hash"] = ctx.run_hash;
  ordered_json config = ordered_json::object();
  for (const auto& [key, values] : ctx.config.echo()) {
    config[key] = repeatable(key) ? ordered_json(values) : ordered_json(values.front());
  }
  m["config"] = config;
  m["config_file"] = "run.conf";
  const WeightedSample& s = ctx.data.sample;
  ordered_json cells = ordered_json::array();
  for (std::size_t g = 0; g < s.group_levels().size(); ++g) {
    cells.push_back({{"group", s.group_label(g)},
                     {"treated", s.cell_count(1, g)},
                     {"control", s.cell_count(0, g)}});
  }
  m["input"] = {{"path", ctx.config.input},
                {"digest_fnv1a", ctx.input_digest},
                {"rows_retained", s.size()},
                {"rows_dropped", ctx.data.dropped_rows},
                {"group_levels", std::vector<std::string>(s.group_levels().begin(),
                                                          s.group_levels().end())},
                {"cells", cells}};
  return m;
}

std::string extension(OutputFormat f) { return f == OutputFormat::kJson ? ".json" : ".csv"; }

int cmd_decompose(const KeyValues& settings, std::ostream& out) {
  RunContext ctx = prepare(settings);
  const RunConfig& c = ctx.config;
  const WeightedSample& sample = ctx.data.sample;
  for (std::size_t g = 0; g < sample.group_levels().size(); ++g) {
    for (int d = 0; d < 2; ++d) {
      if (sample.cell_count(d, g) < 2) {
        throw DataError("group '" + sample.group_label(g) + "' has fewer than 2 " +
                        (d ? "treated" : "control") + " observations");
      }
    }
  }

  DecomposeOptions options;
  options.rank = c.rank;
  options.grid = c.grid;
  options.significance = c.significance;
  for (auto* boot : {&options.quantile_bootstrap, &options.average_bootstrap}) {
    boot->seed = c.seed;
    boot->scheme = c.scheme;
    boot->threads = c.threads;
  }
  options.quantile_bootstrap.replications = c.reps_quantile;
  options.average_bootstrap.replications = c.reps_average;

  const DecompReport report = run_decomposition(sample, options);

  const fs::path dir(c.out);
  const std::string ext = extension(c.format);
  const std::vector<std::string> files = {"series" + ext, "deciles" + ext, "averages" + ext,
                                          "ks" + ext, "manifest.json", "run.conf"};
  write_file(dir / files[0], render([&](std::ostream& o) { write_series(report, o, c.format, ctx.run_hash); }));
  write_file(dir / files[1], render([&](std::ostream& o) { write_deciles(report, o, c.format, ctx.run_hash); }));
  write_file(dir / files[2], render([&](std::ostream& o) { write_averages(report, o, c.format, ctx.run_hash); }));
  write_file(dir / files[3], render([&](std::ostream& o) { write_ks(report, o, c.format, ctx.run_hash); }));

  ordered_json m = manifest_base(ctx, "decompose");
  m["bootstrap"] = {
      {"seed", c.seed},
      {"resample", c.scheme == ResampleScheme::kStratified ? "stratified" : "pooled"},
      {"significance_rule", c.significance == SignificanceRule::kNormalRatio
                                ? "normal ratio |estimate|/se vs 1.645/1.960/2.576"
                                : "equal-tailed percentile interval excludes zero"},
      {"ks_recentering", "statistics recomputed from replicate minus point estimate"},
      {"quantile_replications", {{"requested", c.reps_quantile}, {"failed", report.quantile_failures}}},
      {"average_replications", {{"requested", c.reps_average}, {"failed", report.average_failures}}}};
  ordered_json dropped = ordered_json::array();
  for (const auto& e : report.averages) {
    if (e.dropped_share) dropped.push_back({{"group", e.group}, {"weight_share", *e.dropped_share}});
  }
  m["tate_dropped_reference_weight"] = dropped;
  m["outputs"] = files;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  write_file(dir / "run.conf", "# run " + ctx.run_hash + "\n" + ctx.config_text);

  out << "decompose: " << sample.size() << " observations (" << ctx.data.dropped_rows
      << " dropped), run " << ctx.run_hash << ", outputs in " << c.out << "\n";
  for (const auto& e : report.averages) {
    if (e.effect == "MEAN_Y1" || e.effect == "MEAN_Y0") continue;
    out << "  " << e.effect << " " << e.group << " = " << format_number(e.estimate) << " (se "
        << format_number(e.se) << ")" << stars(e.sig) << "\n";
  }
  return kExitOk;
}

int cmd_diagnose(const KeyValues& settings, std::ostream& out) {
  RunContext ctx = prepare(settings);
  const RunConfig& c = ctx.config;
  std::vector<std::string> variables = c.schema.covariates;
  if (ctx.data.sample.has_enrollment()) variables.push_back("enrolled");
  const DiagnoseReport report = run_diagnostics(ctx.data.sample, variables);

  const fs::path dir(c.out);
  const std::string ext = extension(c.format);
  const std::vector<std::string> files = {"balance" + ext, "compliers" + ext, "manifest.json",
                                          "run.conf"};
  write_file(dir / files[0], render([&](std::ostream& o) { write_balance(report, o, c.format, ctx.run_hash); }));
  write_file(dir / files[1], render([&](std::ostream& o) { write_compliers(report, o, c.format, ctx.run_hash); }));
  ordered_json m = manifest_base(ctx, "diagnose");
  m["outputs"] = files;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  write_file(dir / "run.conf", "# run " + ctx.run_hash + "\n" + ctx.config_text);

  out << "diagnose: " << ctx.data.sample.size() << " observations, run " << ctx.run_hash << "\n";
  for (const auto& b : report.balance) {
    out << "  " << b.variable << ": std. difference " << format_number(b.std_diff)
        << (b.std_diff > 20.0 ? "  (exceeds 20)" : "") << "\n";
  }
  for (const auto& cr : report.compliers) {
    out << "  complier share " << cr.subset << " = " << format_number(cr.share) << "\n";
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string kind = "null_structural";
  std::string study = "identity_check";
  std::size_t n = 50000;
  std::string shares = "0.5,0.5";
  double treatment_prob = 0.5;
  double treatment_log_shift = 0.1;
  double shift = 5.0;
  double zero_mass = 0.21;
  double zero_mass_treated = 0.16;
  bool heterogeneous_weights = false;
  std::uint64_t seed = 1;
  double tolerance_factor = kDefaultToleranceFactor;
  std::string grid = "99";
  std::string reference = "y0";
  std::string rank_side = "control";
  double clip_lo = 0.01;
  double clip_hi = 0.99;
  bool no_mass_point_exclusion = false;
  std::size_t draws = 200;
  std::size_t reps = 199;
  double alpha = 0.10;
  double band_lo = 0.05;
  double band_hi = 0.15;
  std::string emit_csv;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  DgpSpec spec;
  spec.kind = parse_dgp_kind(a.kind);
  spec.n = a.n;
  spec.group_shares = parse_list(a.shares, "group-shares");
  spec.treatment_prob = a.treatment_prob;
  spec.treatment_log_shift = a.treatment_log_shift;
  spec.shift = a.shift;
  spec.zero_mass = a.zero_mass;
  spec.zero_mass_treated = a.zero_mass_treated;
  spec.heterogeneous_weights = a.heterogeneous_weights;
  spec.seed = a.seed;
  spec.validate();
  const std::vector<double> grid = parse_grid(a.grid);

  ordered_json report;
  report["software"] = {{"name", "qdecomp"}, {"version", kVersion}};
  report["dgp"] = {{"kind", to_string(spec.kind)},
                   {"n", spec.n},
                   {"group_shares", spec.group_shares},
                   {"treatment_prob", spec.treatment_prob},
                   {"seed", spec.seed},
                   {"family", TruthRecord(spec).family()}};
  report["study"] = a.study;

  if (a.study == "identity_check") {
    RankConfig rank;
    rank.reference = parse_reference(a.reference);
    if (a.rank_side != "control" && a.rank_side != "treated") {
      throw ConfigError("rank-side must be control or treated");
    }
    rank.rank_side = a.rank_side == "treated" ? RankSide::kTreated : RankSide::kUntreated;
    rank.clip_lo = a.clip_lo;
    rank.clip_hi = a.clip_hi;
    rank.mass_point_exclusion = !a.no_mass_point_exclusion;
    rank.validate();
    const GeneratedSample data = generate(spec);
    if (!a.emit_csv.empty()) {
      std::ofstream f(a.emit_csv);
      if (!f) throw ConfigError("cannot write '" + a.emit_csv + "'");
      write_csv(data.sample, f);
    }
    const IdentityCheck check = identity_check(data, grid, rank, a.tolerance_factor);
    report["identity_check"] = {{"quantity", check.quantity},
                                {"points", check.points},
                                {"max_abs_deviation", check.max_abs_deviation},
                                {"max_ratio_to_tolerance", check.max_ratio},
                                {"tolerance_factor", check.tolerance_factor},
                                {"pass", check.pass}};
    out << "identity_check " << to_string(spec.kind) << ": " << check.quantity << " = "
        << format_number(check.max_abs_deviation) << ", max ratio to spacing tolerance "
        << format_number(check.max_ratio) << " (limit " << format_number(check.tolerance_factor)
        << ") " << (check.pass ? "PASS" : "FAIL") << "\n";
  } else if (a.study == "size_study") {
    SizeStudyConfig sc;
    sc.draws = a.draws;
    sc.replications = a.reps;
    sc.alpha = a.alpha;
    sc.band_lo = a.band_lo;
    sc.band_hi = a.band_hi;
    sc.seed = a.seed;
    const SizeStudy s = ks_size_study(spec, grid, sc);
    report["size_study"] = {{"draws", s.draws},        {"replications", sc.replications},
                            {"alpha", s.alpha},        {"rejections", s.rejections},
                            {"rate", s.rate},          {"band", {sc.band_lo, sc.band_hi}},
                            {"in_band", s.in_band}};
    out << "size_study " << to_string(spec.kind) << ": rejection rate " << format_number(s.rate)
        << " at nominal " << format_number(s.alpha) << " over " << s.draws << " draws "
        << (s.in_band ? "PASS" : "FAIL") << "\n";
  } else {
    throw ConfigError("unknown study '" + a.study + "' (identity_check or size_study)");
  }
  if (!a.out.empty()) write_file(a.out, report.dump(2) + "\n");
  return kExitOk;
}

// Collects flags given on the command line into settings; unset flags are
// left out so that config-file values survive.
struct RunFlags {
  std::string config;
  std::map<std::string, std::string> scalars;
  std::vector<std::string> groups;
  std::vector<std::string> covariates;
  bool no_mass_point_exclusion = false;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Key-value config file; flags override its settings");
    for (const char* key : {"input", "outcome", "treatment", "weight", "enrolled", "reference",
                            "rank-side", "clip-lo", "clip-hi", "reps-quantile", "reps-average",
                            "seed", "grid", "resample", "significance", "threads", "out",
                            "format"}) {
      app.add_option(std::string("--") + key, scalars[key]);
    }
    app.add_option("--group", groups, "Group column; repeat to cross several columns");
    app.add_option("--covariate", covariates, "Covariate column for balance diagnostics");
    app.add_flag("--no-mass-point-exclusion", no_mass_point_exclusion);
  }

  KeyValues merged(const CLI::App& app) const {
    KeyValues kv;
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw ConfigError("cannot open config file '" + config + "'");
      kv = parse_key_values(in);
    }
    for (const auto& [key, value] : scalars) {
      if (app.count("--" + key) > 0) kv[key] = {value};
    }
    if (app.count("--group") > 0) kv["group"] = groups;
    if (app.count("--covariate") > 0) kv["covariate"] = covariates;
    if (no_mass_point_exclusion) kv["mass-point-exclusion"] = {"false"};
    return kv;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Translated and structural decomposition of quantile treatment effects"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunFlags decompose_flags;
  auto* decompose = app.add_subcommand("decompose", "QTE/CQTE/TQTE/SQTE series, averages, KS tests");
  decompose_flags.add_to(*decompose);

  RunFlags diagnose_flags;
  auto* diagnose = app.add_subcommand("diagnose", "Balance table and complier shares");
  diagnose_flags.add_to(*diagnose);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthetic identity checks and KS size study");
  simulate->add_option("--dgp", sim.kind, "null_structural | fully_structural | shift | mass_point");
  simulate->add_option("--study", sim.study, "identity_check | size_study");
  simulate->add_option("--n", sim.n);
  simulate->add_option("--group-shares", sim.shares, "Comma-separated group probabilities");
  simulate->add_option("--treatment-prob", sim.treatment_prob);
  simulate->add_option("--treatment-log-shift", sim.treatment_log_shift);
  simulate->add_option("--shift", sim.shift);
  simulate->add_option("--zero-mass", sim.zero_mass);
  simulate->add_option("--zero-mass-treated", sim.zero_mass_treated);
  simulate->add_flag("--heterogeneous-weights", sim.heterogeneous_weights);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--tolerance-factor", sim.tolerance_factor);
  simulate->add_option("--grid", sim.grid);
  simulate->add_option("--reference", sim.reference);
  simulate->add_option("--rank-side", sim.rank_side);
  simulate->add_option("--clip-lo", sim.clip_lo);
  simulate->add_option("--clip-hi", sim.clip_hi);
  simulate->add_flag("--no-mass-point-exclusion", sim.no_mass_point_exclusion);
  simulate->add_option("--draws", sim.draws, "Monte Carlo draws for size_study");
  simulate->add_option("--reps", sim.reps, "Bootstrap replications per draw for size_study");
  simulate->add_option("--alpha", sim.alpha);
  simulate->add_option("--band-lo", sim.band_lo);
  simulate->add_option("--band-hi", sim.band_hi);
  simulate->add_option("--emit-csv", sim.emit_csv, "Write the generated sample as CSV");
  simulate->add_option("--out", sim.out, "Write the study report as JSON");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfig;
    }
    if (decompose->parsed()) return cmd_decompose(decompose_flags.merged(*decompose), out);
    if (diagnose->parsed()) return cmd_diagnose(diagnose_flags.merged(*diagnose), out);
    return cmd_simulate(sim, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const UnsupportedError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const EstimationError& e) {
    err << "estimation failure: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const DomainError& e) {
    err << "estimation failure: " << e.what() << "\n";
    return kExitEstimation;
  }
}

}  // namespace qdecomp
