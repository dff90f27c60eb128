#include "harmrec/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "harmrec/metrics.hpp"
#include "harmrec/parallel.hpp"
#include "harmrec/recovery.hpp"

namespace harmrec::cli {

using nlohmann::json;

namespace {

const json* member(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "config" : prefix, "expected an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!names.count(key)) throw ConfigError(prefix.empty() ? key : prefix + "." + key, "unknown field");
  }
}

void check_expression(const std::string& source, const std::string& field) {
  try {
    (void)FieldExpr::parse(source);
  } catch (const ParseError& e) {
    throw ConfigError(field, e.what());
  }
}

DomainSpec parse_domain(const json& j) {
  check_keys(j, "domain", {"kind", "n_sides"});
  const json* kind = member(j, "kind");
  if (!kind) throw ConfigError("domain.kind", "missing");
  const std::string name = text(*kind, "domain.kind");
  if (name == "unit_square" || name == "square") return DomainSpec::unit_square();
  if (name == "l_shape" || name == "lshape") return DomainSpec::l_shape();
  if (name == "polygon_disc" || name == "disc") {
    const int n = member(j, "n_sides") ? integer(j["n_sides"], "domain.n_sides") : 6;
    if (n < 3) throw ConfigError("domain.n_sides", "need at least 3 sides");
    return DomainSpec::polygon_disc(n);
  }
  throw ConfigError("domain.kind", "unknown domain '" + name + "'; expected unit_square, l_shape or polygon_disc");
}

Point parse_point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(field, "expected [x, y]");
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

MeasurementConfig parse_measurements(const json& j) {
  check_keys(j, "measurements", {"kind", "points", "values", "m"});
  MeasurementConfig mc;
  const std::string kind = member(j, "kind") ? text(j["kind"], "measurements.kind") : "points";
  if (kind == "points") {
    mc.kind = MeasurementKind::points;
    const json* pts = member(j, "points");
    if (!pts || !pts->is_array() || pts->empty()) throw ConfigError("measurements.points", "expected a non-empty list");
    for (std::size_t i = 0; i < pts->size(); ++i) {
      mc.points.push_back(parse_point((*pts)[i], "measurements.points[" + std::to_string(i) + "]"));
    }
    mc.m = static_cast<int>(mc.points.size());
  } else if (kind == "box" || kind == "grid") {
    mc.kind = kind == "box" ? MeasurementKind::box : MeasurementKind::grid;
    if (!member(j, "m")) throw ConfigError("measurements.m", "missing");
    mc.m = integer(j["m"], "measurements.m");
    try {
      mc.points = kind == "box" ? box_formation(mc.m) : grid_formation(mc.m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("measurements.m", e.what());
    }
  } else {
    throw ConfigError("measurements.kind", "unknown kind '" + kind + "'; expected points, box or grid");
  }
  if (const json* vals = member(j, "values")) {
    if (!vals->is_array()) throw ConfigError("measurements.values", "expected a list of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < vals->size(); ++i) {
      v.push_back(number((*vals)[i], "measurements.values[" + std::to_string(i) + "]"));
    }
    if (v.size() != mc.points.size()) {
      throw ConfigError("measurements.values", "has " + std::to_string(v.size()) + " entries for " +
                                                   std::to_string(mc.points.size()) + " points");
    }
    mc.values = std::move(v);
  }
  return mc;
}

void validate_points(const RunConfig& cfg) {
  const MeshPtr coarse = generate(cfg.domain, 0);
  const auto& pts = cfg.measurements.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    try {
      (void)locate(*coarse, pts[i]);
    } catch (const GeometryError& e) {
      throw ConfigError("measurements.points[" + std::to_string(i) + "]", e.what());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= 1e-10) {
        throw ConfigError("measurements.points[" + std::to_string(i) + "]",
                          "coincides with point " + std::to_string(j));
      }
    }
  }
}

void append_row(std::string& csv, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) csv += ',';
    csv += c;
    first = false;
  }
  csv += '\n';
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

StudyOptions study_options(const RunConfig& cfg, int threads) {
  StudyOptions so;
  so.k_min = cfg.k_min;
  so.k_max = cfg.k_max;
  so.surrogate_level = cfg.surrogate_level;
  so.min_gap = cfg.min_gap;
  so.d = cfg.d;
  so.threads = threads;
  so.mesh.max_level = cfg.max_level;
  return so;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

RunConfig parse_config(const json& doc, const std::string& command) {
  check_keys(doc, "", {"domain", "s", "f", "exact_field", "measurements", "noise", "levels", "min_gap", "d",
                       "tau_rel", "max_level", "level", "outputs"});
  RunConfig cfg;
  const json* domain = member(doc, "domain");
  if (!domain) throw ConfigError("domain", "missing; expected {\"kind\": \"unit_square\" | \"l_shape\" | \"polygon_disc\"}");
  cfg.domain = parse_domain(*domain);

  if (const json* s = member(doc, "s")) {
    cfg.s = number(*s, "s");
    if (cfg.s != 1.0) {
      throw ConfigError("s", "only s = 1 is supported; fractional smoothness is out of scope, got " +
                                 format_double(cfg.s));
    }
  }
  if (const json* f = member(doc, "f")) cfg.f = text(*f, "f");
  check_expression(cfg.f, "f");
  if (const json* ex = member(doc, "exact_field")) {
    cfg.exact_field = text(*ex, "exact_field");
    check_expression(*cfg.exact_field, "exact_field");
  }
  if (const json* n = member(doc, "noise")) {
    cfg.noise = number(*n, "noise");
    if (cfg.noise < 0.0) throw ConfigError("noise", "must be non-negative");
  }
  if (const json* g = member(doc, "min_gap")) cfg.min_gap = integer(*g, "min_gap");
  if (const json* d = member(doc, "d")) cfg.d = number(*d, "d");
  if (const json* t = member(doc, "tau_rel")) {
    cfg.tau_rel = number(*t, "tau_rel");
    if (!(cfg.tau_rel >= 0.0 && cfg.tau_rel < 1.0)) throw ConfigError("tau_rel", "must lie in [0, 1)");
  }
  if (const json* ml = member(doc, "max_level")) cfg.max_level = integer(*ml, "max_level");
  if (const json* lv = member(doc, "level")) cfg.level = integer(*lv, "level");
  if (const json* levels = member(doc, "levels")) {
    check_keys(*levels, "levels", {"k_min", "k_max", "K", "k"});
    if (const json* v = member(*levels, "k_min")) cfg.k_min = integer(*v, "levels.k_min");
    if (const json* v = member(*levels, "k_max")) cfg.k_max = integer(*v, "levels.k_max");
    if (const json* v = member(*levels, "K")) cfg.surrogate_level = integer(*v, "levels.K");
    if (const json* v = member(*levels, "k")) cfg.k = integer(*v, "levels.k");
  }
  cfg.csv_name = command + ".csv";
  cfg.json_name = command + ".json";
  if (const json* out = member(doc, "outputs")) {
    check_keys(*out, "outputs", {"csv", "json", "mesh"});
    if (const json* v = member(*out, "csv")) cfg.csv_name = text(*v, "outputs.csv");
    if (const json* v = member(*out, "json")) cfg.json_name = text(*v, "outputs.json");
    if (const json* v = member(*out, "mesh")) cfg.mesh_name = text(*v, "outputs.mesh");
  }

  if (cfg.max_level < 0) throw ConfigError("max_level", "must be non-negative");
  if (command == "riesz") {
    if (cfg.k_min < 0 || cfg.k_min > cfg.k_max) throw ConfigError("levels.k_min", "need 0 <= k_min <= k_max");
    if (cfg.surrogate_level - cfg.k_max < cfg.min_gap) {
      throw ConfigError("levels.K", "surrogate level must exceed k_max by at least min_gap = " +
                                        std::to_string(cfg.min_gap));
    }
    if (cfg.k_max >= cfg.surrogate_level) throw ConfigError("levels.K", "need K > k_max");
    if (cfg.surrogate_level > cfg.max_level) throw ConfigError("levels.K", "exceeds max_level");
  } else if (command == "recover") {
    if (cfg.k_min < 0 || cfg.k_min > cfg.k_max) throw ConfigError("levels.k_min", "need 0 <= k_min <= k_max");
    if (cfg.k_max > cfg.max_level) throw ConfigError("levels.k_max", "exceeds max_level");
  } else if (command == "proximity") {
    if (cfg.k < 0 || cfg.k >= cfg.surrogate_level) throw ConfigError("levels.k", "need 0 <= k < K");
    if (cfg.surrogate_level > cfg.max_level) throw ConfigError("levels.K", "exceeds max_level");
  } else if (command == "mesh-dump") {
    if (cfg.level < 0 || cfg.level > cfg.max_level) throw ConfigError("level", "need 0 <= level <= max_level");
  }

  if (command != "mesh-dump") {
    const json* meas = member(doc, "measurements");
    if (!meas) throw ConfigError("measurements", "missing");
    cfg.measurements = parse_measurements(*meas);
    if (command == "riesz" && cfg.measurements.points.size() != 1) {
      throw ConfigError("measurements.points", "the riesz command takes exactly one point");
    }
    if (command == "recover" && !cfg.measurements.values && !cfg.exact_field) {
      throw ConfigError("measurements.values", "missing; give values or an exact_field to synthesize them from");
    }
    validate_points(cfg);
  }
  return cfg;
}

json resolved_config(const RunConfig& cfg) {
  json doc;
  doc["domain"] = {{"kind", domain_name(cfg.domain.kind)}};
  if (cfg.domain.kind == DomainKind::polygon_disc) doc["domain"]["n_sides"] = cfg.domain.n_sides;
  doc["s"] = cfg.s;
  doc["f"] = cfg.f;
  doc["exact_field"] = cfg.exact_field ? json(*cfg.exact_field) : json(nullptr);
  json meas;
  meas["kind"] = cfg.measurements.kind == MeasurementKind::points ? "points"
                 : cfg.measurements.kind == MeasurementKind::box  ? "box"
                                                                  : "grid";
  meas["m"] = cfg.measurements.m;
  meas["points"] = json::array();
  for (const Point& p : cfg.measurements.points) meas["points"].push_back({p.x, p.y});
  meas["values"] = cfg.measurements.values ? json(*cfg.measurements.values) : json(nullptr);
  doc["measurements"] = meas;
  doc["noise"] = cfg.noise;
  doc["levels"] = {{"k_min", cfg.k_min}, {"k_max", cfg.k_max}, {"K", cfg.surrogate_level}, {"k", cfg.k}};
  doc["min_gap"] = cfg.min_gap;
  doc["level"] = cfg.level;
  doc["max_level"] = cfg.max_level;
  doc["d"] = cfg.d;
  doc["tau_rel"] = cfg.tau_rel;
  doc["outputs"] = {{"csv", cfg.csv_name}, {"json", cfg.json_name}, {"mesh", cfg.mesh_name}};
  return doc;
}

CommandOutput cmd_riesz(const RunConfig& cfg, int threads) {
  const Point x = cfg.measurements.points.front();
  const ErrorReport report = convergence_study(cfg.domain, RepresenterTarget{x}, study_options(cfg, threads));
  CommandOutput out;
  out.csv = "level,h,err_h1,err_linf,err_linf_d,rate_h1,rate_linf,rate_linf_d\n";
  json rows = json::array();
  for (const ErrorRow& r : report.rows) {
    append_row(out.csv, {std::to_string(r.level), format_double(r.h), format_double(r.err_h1),
                         format_double(r.err_linf), format_double(r.err_linf_d), opt_cell(r.rate_h1),
                         opt_cell(r.rate_linf), opt_cell(r.rate_linf_d)});
    rows.push_back({{"level", r.level},
                    {"h", r.h},
                    {"err_h1", r.err_h1},
                    {"err_linf", r.err_linf},
                    {"err_linf_d", r.err_linf_d},
                    {"rate_h1", opt_json(r.rate_h1)},
                    {"rate_linf", opt_json(r.rate_linf)},
                    {"rate_linf_d", opt_json(r.rate_linf_d)}});
  }
  out.summary = {{"point", {x.x, x.y}}, {"surrogate_level", report.surrogate_level}, {"rows", rows},
                 {"warnings", json::array()}};
  return out;
}

CommandOutput cmd_recover(const RunConfig& cfg, int threads, std::uint64_t seed) {
  const FieldExpr f = FieldExpr::parse(cfg.f);
  std::optional<FieldExpr> exact;
  if (cfg.exact_field) exact = FieldExpr::parse(*cfg.exact_field);

  MeasurementSet meas;
  if (cfg.measurements.values) {
    meas.points = cfg.measurements.points;
    meas.values = *cfg.measurements.values;
  } else {
    meas = synthesize_measurements(*exact, cfg.measurements.points, cfg.noise, seed);
  }

  const auto rows = recovery_study(cfg.domain, f, meas, exact ? &*exact : nullptr, cfg.tau_rel,
                                   study_options(cfg, threads));
  CommandOutput out;
  out.csv = "level,h,err_linf,err_linf_d,max_residual,discarded,condition\n";
  json jrows = json::array();
  json warnings = json::array();
  for (const RecoveryRow& r : rows) {
    append_row(out.csv, {std::to_string(r.level), format_double(r.h), opt_cell(r.err_linf), opt_cell(r.err_linf_d),
                         format_double(r.max_residual), std::to_string(r.discarded), format_double(r.condition)});
    jrows.push_back({{"level", r.level},
                     {"h", r.h},
                     {"err_linf", opt_json(r.err_linf)},
                     {"err_linf_d", opt_json(r.err_linf_d)},
                     {"max_residual", r.max_residual},
                     {"discarded", r.discarded},
                     {"condition", r.condition},
                     {"warnings", r.warnings}});
    for (const auto& w : r.warnings) warnings.push_back("level " + std::to_string(r.level) + ": " + w);
  }
  out.summary = {{"m", meas.size()},
                 {"values", meas.values},
                 {"synthetic", !cfg.measurements.values.has_value()},
                 {"rows", jrows},
                 {"warnings", warnings}};
  return out;
}

CommandOutput cmd_proximity(const RunConfig& cfg, int threads) {
  const auto rows = boundary_proximity_study(cfg.domain, cfg.measurements.points, cfg.k, cfg.surrogate_level,
                                             study_options(cfg, threads));
  CommandOutput out;
  out.csv = "point,x,y,d,err_h1,err_linf\n";
  json jrows = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ProximityRow& r = rows[i];
    append_row(out.csv, {std::to_string(i), format_double(r.point.x), format_double(r.point.y), format_double(r.d),
                         format_double(r.err_h1), format_double(r.err_linf)});
    jrows.push_back({{"point", {r.point.x, r.point.y}}, {"d", r.d}, {"err_h1", r.err_h1}, {"err_linf", r.err_linf}});
  }
  out.summary = {{"k", cfg.k}, {"surrogate_level", cfg.surrogate_level}, {"rows", jrows},
                 {"warnings", json::array()}};
  return out;
}

std::string cmd_mesh_dump(const RunConfig& cfg) {
  MeshOptions mo;
  mo.max_level = cfg.max_level;
  std::ostringstream os;
  write_mesh(os, *generate(cfg.domain, cfg.level, mo));
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << contents;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

json read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("--config", "cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal recovery of harmonic-plus-source fields from point values"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"riesz", "convergence of one Riesz representer against a fine surrogate"},
      {"recover", "recover a field from point measurements on a range of levels"},
      {"proximity", "representer errors for points approaching the boundary"},
      {"mesh-dump", "write a refined mesh as text"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "seed for the measurement noise");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const int nthreads = resolve_threads(threads);

  try {
    const RunConfig cfg = parse_config(read_config(config_path), command);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    if (command == "mesh-dump") {
      write_file(dir / cfg.mesh_name, cmd_mesh_dump(cfg));
      out << (dir / cfg.mesh_name).string() << '\n';
      return 0;
    }

    CommandOutput result = command == "riesz"     ? cmd_riesz(cfg, nthreads)
                           : command == "recover" ? cmd_recover(cfg, nthreads, seed)
                                                  : cmd_proximity(cfg, nthreads);
    json sidecar = {{"command", command},
                    {"config", resolved_config(cfg)},
                    {"seed", seed},
                    {"threads", nthreads},
                    {"csv", cfg.csv_name}};
    sidecar["summary"] = std::move(result.summary);
    sidecar["warnings"] = sidecar["summary"]["warnings"];
    write_file(dir / cfg.csv_name, result.csv);
    write_file(dir / cfg.json_name, sidecar.dump(2) + "\n");
    for (const auto& w : sidecar["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
    out << (dir / cfg.csv_name).string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace harmrec::cli
