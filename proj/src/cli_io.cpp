#include "cptsq/cli_io.hpp"

#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cptsq/analytic.hpp"
#include "cptsq/correlations.hpp"
#include "cptsq/optimizer.hpp"
#include "cptsq/spectra.hpp"

namespace cptsq {

using nlohmann::json;

void GridSettings::merge(const GridSettings& o) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(omega_min, o.omega_min);
  take(omega_max, o.omega_max);
  take(omega_points, o.omega_points);
  take(delta_min, o.delta_min);
  take(delta_max, o.delta_max);
  take(delta_points, o.delta_points);
  take(w_min, o.w_min);
  take(w_max, o.w_max);
  take(w_points, o.w_points);
  take(ratios, o.ratios);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size())
    throw UsageError("'" + key + "': expected a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& key) {
  const double v = parse_double(text, key);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw UsageError("'" + key + "': expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  if (out.empty()) throw UsageError("'" + key + "': empty list");
  return out;
}

// Applies one key to the records; `value` is the raw text form.
void apply_key(const std::string& key, const std::string& value,
               RawParams& p, GridSettings& g) {
  static const std::map<std::string,
                        std::function<void(const std::string&, RawParams&,
                                           GridSettings&)>>
      setters = {
          {"alpha", [](auto& v, auto& p, auto&) { p.alpha = parse_double(v, "alpha"); }},
          {"gamma", [](auto& v, auto& p, auto&) { p.gamma = parse_double(v, "gamma"); }},
          {"gamma12", [](auto& v, auto& p, auto&) { p.gamma12 = parse_double(v, "gamma12"); }},
          {"delta", [](auto& v, auto& p, auto&) { p.delta = parse_double(v, "delta"); }},
          {"delta_p", [](auto& v, auto& p, auto&) { p.delta_p = parse_double(v, "delta_p"); }},
          {"delta_c", [](auto& v, auto& p, auto&) { p.delta_c = parse_double(v, "delta_c"); }},
          {"setting", [](auto& v, auto& p, auto&) { p.setting = trim(v); }},
          {"omega", [](auto& v, auto& p, auto&) { p.omega = parse_complex(v); }},
          {"omega_p0", [](auto& v, auto& p, auto&) { p.omega_p0 = parse_complex(v); }},
          {"omega_c0", [](auto& v, auto& p, auto&) { p.omega_c0 = parse_complex(v); }},
          {"lc", [](auto& v, auto& p, auto&) { p.lc = parse_double(v, "lc"); }},
          {"xi_steps", [](auto& v, auto& p, auto&) { p.xi_steps = parse_int(v, "xi_steps"); }},
          {"g_norm", [](auto& v, auto& p, auto&) { p.g_norm = parse_double(v, "g_norm"); }},
          {"gamma1", [](auto& v, auto& p, auto&) { p.gamma1 = parse_double(v, "gamma1"); }},
          {"gamma2", [](auto& v, auto& p, auto&) { p.gamma2 = parse_double(v, "gamma2"); }},
          {"omega_min", [](auto& v, auto&, auto& g) { g.omega_min = parse_double(v, "omega_min"); }},
          {"omega_max", [](auto& v, auto&, auto& g) { g.omega_max = parse_double(v, "omega_max"); }},
          {"omega_points", [](auto& v, auto&, auto& g) { g.omega_points = parse_int(v, "omega_points"); }},
          {"delta_min", [](auto& v, auto&, auto& g) { g.delta_min = parse_double(v, "delta_min"); }},
          {"delta_max", [](auto& v, auto&, auto& g) { g.delta_max = parse_double(v, "delta_max"); }},
          {"delta_points", [](auto& v, auto&, auto& g) { g.delta_points = parse_int(v, "delta_points"); }},
          {"w_min", [](auto& v, auto&, auto& g) { g.w_min = parse_double(v, "w_min"); }},
          {"w_max", [](auto& v, auto&, auto& g) { g.w_max = parse_double(v, "w_max"); }},
          {"w_points", [](auto& v, auto&, auto& g) { g.w_points = parse_int(v, "w_points"); }},
          {"ratios", [](auto& v, auto&, auto& g) { g.ratios = parse_list(v, "ratios"); }},
      };
  const auto it = setters.find(key);
  if (it == setters.end()) throw UsageError("unknown config key '" + key + "'");
  it->second(value, p, g);
}

// JSON values are converted to the text form accepted by apply_key.
std::string json_value_text(const std::string& key, const json& v) {
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    if ((key == "omega" || key == "omega_p0" || key == "omega_c0") &&
        v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      const double re = v[0].get<double>(), im = v[1].get<double>();
      return format_number(re) + (im < 0 ? "-" : "+") +
             format_number(std::abs(im)) + "i";
    }
    std::string s;
    for (const auto& e : v) {
      if (!e.is_number()) throw UsageError("'" + key + "': expected numbers");
      s += (s.empty() ? "" : ",") + format_number(e.get<double>());
    }
    return s;
  }
  throw UsageError("'" + key + "': unsupported JSON value");
}

}  // namespace

cplx parse_complex(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw UsageError("empty complex value");
  if (t.back() != 'i' && t.back() != 'j')
    return {parse_double(t, "complex value"), 0.0};
  t.pop_back();
  // Split at the last sign that is not part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  if (split == std::string::npos) {
    const std::string im = (t.empty() || t == "+") ? "1" : (t == "-" ? "-1" : t);
    return {0.0, parse_double(im, "complex value")};
  }
  std::string im = t.substr(split);
  if (im == "+") im = "1";
  if (im == "-") im = "-1";
  return {parse_double(t.substr(0, split), "complex value"),
          parse_double(im, "complex value")};
}

void parse_config_text(const std::string& text, RawParams& params,
                       GridSettings& grids) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    json j;
    try {
      j = json::parse(t);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config JSON must be an object");
    for (const auto& [k, v] : j.items()) apply_key(k, json_value_text(k, v), params, grids);
    return;
  }
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    apply_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), params,
              grids);
  }
}

void load_config_file(const std::string& path, RawParams& params,
                      GridSettings& grids) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  parse_config_text(ss.str(), params, grids);
}

namespace {

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"steady", "atomic steady state at the input fields"},
    {"propagate", "mean-field profiles along the medium"},
    {"squeeze", "output quadrature variance and transmissions"},
    {"optimize-rabi", "minimize V over the Rabi frequency at fixed delta"},
    {"optimize-detuning", "minimize V over delta at fixed Rabi frequency"},
    {"sweep", "V on an (Omega, delta) grid"},
    {"spectrum", "quadrature-noise spectrum S(w)"},
    {"ratio-scan", "delta scans for several Omega_p/Omega_c ratios"},
    {"compare-settings", "Rabi optimum for each detuning setting"},
    {"figure", "regenerate a figure data set by id"}};

const std::vector<std::string> kFigures = {"2a", "2b", "3a", "3b", "3c", "3d",
                                           "4a", "4b", "4c", "4d", "s1", "s2"};

struct Flags {
  std::optional<double> alpha, gamma, gamma12, delta, delta_p, delta_c, lc,
      g_norm, gamma1, gamma2;
  std::optional<std::string> omega, omega_p0, omega_c0, setting;
  std::optional<int> xi_steps;
  GridSettings grids;
  std::optional<std::string> ratios;
  std::string config, out, figure_id;
  bool serial = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--od,--alpha", f.alpha, "optical density alpha");
  sub->add_option("--omega", f.omega, "input Rabi frequency of both fields (Gamma; complex as a+bi)");
  sub->add_option("--omega-p", f.omega_p0, "probe input Rabi frequency");
  sub->add_option("--omega-c", f.omega_c0, "coupling input Rabi frequency");
  sub->add_option("--delta", f.delta, "two-photon detuning (Gamma)");
  sub->add_option("--delta-p", f.delta_p, "probe one-photon detuning");
  sub->add_option("--delta-c", f.delta_c, "coupling one-photon detuning");
  sub->add_option("--setting", f.setting, "symmetric | probe-only | coupling-only");
  sub->add_option("--gamma", f.gamma, "excited-state decay (rate unit)");
  sub->add_option("--gamma12", f.gamma12, "ground-coherence decay");
  sub->add_option("--gamma1", f.gamma1, "decay rate |3> -> |1>");
  sub->add_option("--gamma2", f.gamma2, "decay rate |3> -> |2>");
  sub->add_option("--lc", f.lc, "vacuum transit time L/c (1/Gamma)");
  sub->add_option("--xi-steps", f.xi_steps, "propagation intervals");
  sub->add_option("--g-norm", f.g_norm, "single-photon Rabi frequency (informational)");
  sub->add_option("--omega-min", f.grids.omega_min);
  sub->add_option("--omega-max", f.grids.omega_max);
  sub->add_option("--omega-points", f.grids.omega_points);
  sub->add_option("--delta-min", f.grids.delta_min);
  sub->add_option("--delta-max", f.grids.delta_max);
  sub->add_option("--delta-points", f.grids.delta_points);
  sub->add_option("--w-min", f.grids.w_min, "lowest noise frequency");
  sub->add_option("--w-max", f.grids.w_max, "highest noise frequency");
  sub->add_option("--w-points", f.grids.w_points);
  sub->add_option("--ratios", f.ratios, "comma-separated Omega_p/Omega_c ratios");
  sub->add_option("--config", f.config, "key=value or JSON config file");
  sub->add_option("--out", f.out, "output prefix for <prefix>.csv and <prefix>.json");
  sub->add_flag("--serial", f.serial, "disable OpenMP parallel evaluation");
}

}  // namespace

RunConfig parse_cli(int argc, const char* const* argv) {
  CLI::App app{"Squeezed-light generation in a cavity-free CPT medium",
               "cptsq"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Flags f;
  for (const auto& [name, about] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, about);
    add_common(sub, f);
    if (name == "figure")
      sub->add_option("id", f.figure_id, "2a 2b 3a 3b 3c 3d 4a 4b 4c 4d s1 s2")
          ->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested(kToolVersion);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.figure_id = f.figure_id;
  if (cfg.command == "figure" &&
      std::find(kFigures.begin(), kFigures.end(), cfg.figure_id) ==
          kFigures.end())
    throw UsageError("unknown figure id '" + cfg.figure_id + "'");
  if (!f.config.empty()) load_config_file(f.config, cfg.params, cfg.grids);

  RawParams over;
  over.alpha = f.alpha;
  over.gamma = f.gamma;
  over.gamma12 = f.gamma12;
  over.delta = f.delta;
  over.delta_p = f.delta_p;
  over.delta_c = f.delta_c;
  over.lc = f.lc;
  over.g_norm = f.g_norm;
  over.gamma1 = f.gamma1;
  over.gamma2 = f.gamma2;
  over.xi_steps = f.xi_steps;
  over.setting = f.setting;
  if (f.omega) over.omega = parse_complex(*f.omega);
  if (f.omega_p0) over.omega_p0 = parse_complex(*f.omega_p0);
  if (f.omega_c0) over.omega_c0 = parse_complex(*f.omega_c0);
  cfg.params.merge(over);
  GridSettings gover = f.grids;
  if (f.ratios) gover.ratios = parse_list(*f.ratios, "ratios");
  cfg.grids.merge(gover);
  cfg.out = f.out;
  cfg.serial = f.serial;
  return cfg;
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void csv_line(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_field(row[i]);
  }
  out += '\n';
}

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  csv_line(out, t.header);
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size())
      throw std::logic_error("CSV row has " + std::to_string(r.size()) +
                             " columns, header has " +
                             std::to_string(t.header.size()));
    csv_line(out, r);
  }
  return out;
}

json params_to_json(const SystemParams& p) {
  json j;
  j["alpha"] = p.alpha;
  j["gamma"] = p.gamma;
  j["gamma12"] = p.gamma12;
  j["delta"] = p.delta;
  j["delta_p"] = p.delta_p;
  j["delta_c"] = p.delta_c;
  j["omega_p0"] = complex_json(p.omega_p0);
  j["omega_c0"] = complex_json(p.omega_c0);
  j["lc"] = p.lc;
  j["xi_steps"] = p.xi_steps;
  j["g_norm"] = p.g_norm ? json(*p.g_norm) : json(nullptr);
  j["gamma1"] = p.gamma1;
  j["gamma2"] = p.gamma2;
  return j;
}

json grids_to_json(const GridSettings& g) {
  json j = json::object();
  auto put = [&](const char* k, const auto& v) {
    if (v) j[k] = *v;
  };
  put("omega_min", g.omega_min);
  put("omega_max", g.omega_max);
  put("omega_points", g.omega_points);
  put("delta_min", g.delta_min);
  put("delta_max", g.delta_max);
  put("delta_points", g.delta_points);
  put("w_min", g.w_min);
  put("w_max", g.w_max);
  put("w_points", g.w_points);
  put("ratios", g.ratios);
  return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  auto fail = [&](const std::string& what, int err) {
    std::remove(tmp.c_str());
    throw OutputError("cannot " + what + " '" + path + "': " +
                      std::strerror(err));
  };
  FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) fail("open for writing", errno);
  const bool wrote =
      std::fwrite(content.data(), 1, content.size(), f) == content.size();
  const int werr = errno;
  if (std::fclose(f) != 0 || !wrote) fail("write", wrote ? errno : werr);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail("rename into", errno);
}

void emit_results(const std::string& prefix, const Table& csv,
                  const json& params, const json& outputs, const json& grids) {
  json side;
  side["params"] = params;
  side["outputs"] = outputs;
  side["tool_version"] = kToolVersion;
  side["grid_settings"] = grids;
  const std::string csv_text = to_csv(csv);
  write_file_atomic(prefix + ".csv", csv_text);
  try {
    write_file_atomic(prefix + ".json", side.dump(2) + "\n");
  } catch (...) {
    std::remove((prefix + ".csv").c_str());
    throw;
  }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Output {
  Table table;
  json params;
  json outputs;
  std::string summary;
};

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

DetuningSetting setting_of(const RawParams& raw) {
  return raw.setting ? parse_detuning_setting(*raw.setting)
                     : DetuningSetting::symmetric;
}

// Validated base parameters for scan commands: the scanned quantities get
// placeholders so the remaining fields can be checked, and explicit one-photon
// detunings are refused because scans split delta through a named setting.
SystemParams scan_base(RawParams raw, bool need_omega, bool need_delta) {
  if (raw.delta_p || raw.delta_c)
    throw InvalidParams(
        "scans split delta through a named setting; drop delta_p/delta_c");
  if (need_omega && !raw.omega)
    throw InvalidParams("omega is required for this command");
  if (need_delta && !raw.delta)
    throw InvalidParams("delta is required for this command");
  if (!raw.omega && !raw.omega_p0 && !raw.omega_c0) raw.omega = cplx{1.0, 0.0};
  if (!raw.delta) raw.delta = 0.0;
  return validate_params(raw);
}

double real_omega(const RawParams& raw) {
  const cplx w = raw.omega.value_or(cplx{1.0, 0.0});
  if (w.imag() != 0.0 || !(w.real() > 0.0))
    throw InvalidParams("scans need a positive real omega");
  return w.real();
}

ScanOptions scan_options(const SystemParams& base, const RunConfig& cfg) {
  ScanOptions o;
  o.base = base;
  o.execution = cfg.serial ? Execution::serial : Execution::parallel;
  return o;
}

json scan_json(const ScanResult& r) {
  json j;
  j["axis"] = r.axis;
  j["arg_min"] = r.arg_min;
  j["min_variance"] = r.min_value;
  j["min_variance_db"] = to_db(r.min_value);
  j["theta_opt"] = r.at_min.theta_opt;
  j["transmission_p"] = r.at_min.transmission_p;
  j["transmission_c"] = r.at_min.transmission_c;
  j["bracket"] = json::array({r.bracket_lo, r.bracket_hi});
  j["interior"] = r.interior;
  int failed = 0;
  for (const auto& p : r.points) failed += p.ok() ? 0 : 1;
  j["failed_points"] = failed;
  return j;
}

void scan_rows(Table& t, const ScanResult& r,
               const std::vector<std::string>& prefix) {
  for (const auto& p : r.points) {
    std::vector<std::string> row = prefix;
    row.insert(row.end(), {format_number(p.x), format_number(p.variance),
                           format_number(p.ok() ? to_db(p.variance) : NAN),
                           format_number(p.transmission_p),
                           format_number(p.transmission_c), p.error});
    t.add(std::move(row));
  }
}

const std::vector<std::string> kScanColumns = {
    "variance", "variance_db", "transmission_p", "transmission_c", "error"};

std::vector<std::string> columns(std::vector<std::string> head,
                                 const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

void apply_axis(ScanOptions& o, std::optional<double> lo,
                std::optional<double> hi, std::optional<int> n) {
  o.lo = lo;
  o.hi = hi;
  o.coarse_points = n;
}

// --- single-point commands -------------------------------------------------

Output cmd_steady(const RunConfig& cfg) {
  const SystemParams p = validate_params(cfg.params);
  const AtomicState s = steady_state(p, p.omega_p0, p.omega_c0);
  static const char* names[9] = {"s31", "s32", "s21", "s11", "s22",
                                 "s33", "s12", "s23", "s13"};
  Output o;
  o.params = params_to_json(p);
  o.table.header = {"element", "re", "im"};
  for (int k = 0; k < 9; ++k) {
    o.table.add({names[k], format_number(s[k].real()),
                 format_number(s[k].imag())});
    o.outputs[names[k]] = complex_json(s[k]);
  }
  o.summary = "steady: s11 = " + fmt(s[idx::s11].real()) +
              ", s22 = " + fmt(s[idx::s22].real()) +
              ", s33 = " + fmt(s[idx::s33].real()) +
              ", |s13| = " + fmt(std::abs(s[idx::s13]));
  return o;
}

Output cmd_propagate(const RunConfig& cfg) {
  const SystemParams p = validate_params(cfg.params);
  const MeanFieldSolution m = propagate_mean(p);
  const Transmission t = transmission(m.profile);
  Output o;
  o.params = params_to_json(p);
  o.table.header = {"xi", "re_omega_p", "im_omega_p", "re_omega_c",
                    "im_omega_c"};
  for (std::size_t k = 0; k < m.profile.xi.size(); ++k)
    o.table.add({format_number(m.profile.xi[k]),
                 format_number(m.profile.omega_p[k].real()),
                 format_number(m.profile.omega_p[k].imag()),
                 format_number(m.profile.omega_c[k].real()),
                 format_number(m.profile.omega_c[k].imag())});
  o.outputs["transmission_p"] = t.probe;
  o.outputs["transmission_c"] = t.coupling;
  o.outputs["steps"] = m.steps;
  o.outputs["refinement_change"] = m.refinement_change;
  o.summary = "propagate: Tp = " + fmt(t.probe) + ", Tc = " +
              fmt(t.coupling) + ", steps = " + std::to_string(m.steps);
  return o;
}

std::string squeeze_summary(const std::string& head, const SqueezingResult& r) {
  return head + "V = " + fmt(r.variance) + " (" + fmt(r.variance_db, 4) +
         " dB), theta_opt = " + fmt(r.theta_opt, 5) +
         ", Tp = " + fmt(r.transmission_p, 5) +
         ", Tc = " + fmt(r.transmission_c, 5);
}

Output cmd_squeeze(const RunConfig& cfg) {
  const SystemParams p = validate_params(cfg.params);
  const SqueezingRun run = run_squeezing(p);
  const SqueezingResult& r = run.result;
  const CorrelationState& c = run.corr;
  Output o;
  o.params = params_to_json(p);
  o.table.header = {"variance", "variance_db", "theta_opt", "transmission_p",
                    "transmission_c", "re_c_pp", "im_c_pp", "n_p", "re_c_cc",
                    "im_c_cc", "n_c", "re_c_pc", "im_c_pc", "re_x_pc",
                    "im_x_pc"};
  o.table.add({format_number(r.variance), format_number(r.variance_db),
               format_number(r.theta_opt), format_number(r.transmission_p),
               format_number(r.transmission_c), format_number(c.c_pp.real()),
               format_number(c.c_pp.imag()), format_number(c.n_p),
               format_number(c.c_cc.real()), format_number(c.c_cc.imag()),
               format_number(c.n_c), format_number(c.c_pc.real()),
               format_number(c.c_pc.imag()), format_number(c.x_pc.real()),
               format_number(c.x_pc.imag())});
  o.outputs = {{"variance", r.variance},
               {"variance_db", r.variance_db},
               {"theta_opt", r.theta_opt},
               {"transmission_p", r.transmission_p},
               {"transmission_c", r.transmission_c},
               {"coupling_variance",
                1.0 + 2.0 * c.n_c - 2.0 * std::abs(c.c_cc)},
               {"steps", run.mean.steps}};
  o.summary = squeeze_summary("squeeze: ", r);
  return o;
}

// --- scans --------------------------------------------------------------------

Output rabi_scan(const std::string& label, double alpha, double delta,
                 DetuningSetting s, const SystemParams& base,
                 const RunConfig& cfg) {
  ScanOptions so = scan_options(base, cfg);
  apply_axis(so, cfg.grids.omega_min, cfg.grids.omega_max,
             cfg.grids.omega_points);
  const ScanResult r = optimize_over_rabi(alpha, delta, s, so);
  Output o;
  o.params = params_to_json(make_params(base, alpha, r.arg_min, delta, s));
  o.table.header = columns({"omega"}, kScanColumns);
  scan_rows(o.table, r, {});
  o.outputs = scan_json(r);
  o.outputs["setting"] = std::string(to_string(s));
  o.summary = label + "Omega_opt = " + fmt(r.arg_min, 5) + ", " +
              squeeze_summary("", r.at_min) +
              (r.interior ? "" : " [no interior optimum]");
  return o;
}

Output detuning_scan(const std::string& label, double alpha, double omega,
                     DetuningSetting s, const SystemParams& base,
                     const RunConfig& cfg) {
  ScanOptions so = scan_options(base, cfg);
  apply_axis(so, cfg.grids.delta_min, cfg.grids.delta_max,
             cfg.grids.delta_points);
  const ScanResult r = optimize_over_detuning(alpha, omega, s, so);
  Output o;
  o.params = params_to_json(make_params(base, alpha, omega, r.arg_min, s));
  o.table.header = columns({"delta"}, kScanColumns);
  scan_rows(o.table, r, {});
  o.outputs = scan_json(r);
  o.outputs["setting"] = std::string(to_string(s));
  const AnalyticFactors a = analytic_factors(alpha, omega, r.arg_min);
  o.outputs["analytic_v_at_optimum"] = a.v_approx;
  o.summary = label + "delta_opt = " + fmt(r.arg_min, 5) + ", " +
              squeeze_summary("", r.at_min) +
              (r.interior ? "" : " [no interior optimum]");
  return o;
}

Output cmd_optimize_rabi(const RunConfig& cfg) {
  const SystemParams base = scan_base(cfg.params, false, true);
  return rabi_scan("optimize-rabi: ", base.alpha, base.delta,
                   setting_of(cfg.params), base, cfg);
}

Output cmd_optimize_detuning(const RunConfig& cfg) {
  const SystemParams base = scan_base(cfg.params, true, false);
  return detuning_scan("optimize-detuning: ", base.alpha,
                       real_omega(cfg.params), setting_of(cfg.params), base,
                       cfg);
}

Output cmd_sweep(const RunConfig& cfg) {
  const SystemParams base = scan_base(cfg.params, false, false);
  const GridSettings& g = cfg.grids;
  const Axis wa{g.omega_min.value_or(0.5), g.omega_max.value_or(2.0),
                g.omega_points.value_or(16), false};
  const Axis da{g.delta_min.value_or(0.005), g.delta_max.value_or(0.05),
                g.delta_points.value_or(16), false};
  const DetuningSetting s = setting_of(cfg.params);
  const SweepMap m = sweep_map(base.alpha, wa, da, s, scan_options(base, cfg));
  Output o;
  o.params = params_to_json(base);
  o.table.header = {"omega", "delta", "variance", "variance_db",
                    "theta_opt", "transmission_p", "transmission_c", "error"};
  double best = INFINITY;
  const SweepCell* arg = nullptr;
  int failed = 0;
  for (const auto& c : m.cells) {
    if (c.result) {
      const auto& r = *c.result;
      o.table.add({format_number(c.omega), format_number(c.delta),
                   format_number(r.variance), format_number(r.variance_db),
                   format_number(r.theta_opt), format_number(r.transmission_p),
                   format_number(r.transmission_c), ""});
      if (r.variance < best) {
        best = r.variance;
        arg = &c;
      }
    } else {
      ++failed;
      o.table.add({format_number(c.omega), format_number(c.delta), "nan",
                   "nan", "nan", "nan", "nan", c.error});
    }
  }
  o.outputs["cells"] = m.cells.size();
  o.outputs["failed_cells"] = failed;
  o.outputs["setting"] = std::string(to_string(s));
  if (arg) {
    o.outputs["min_variance"] = best;
    o.outputs["arg_min"] = {{"omega", arg->omega}, {"delta", arg->delta}};
  }
  o.summary = "sweep: " + std::to_string(m.cells.size()) + " cells, " +
              std::to_string(failed) + " failed" +
              (arg ? ", min V = " + fmt(best) + " (" + fmt(to_db(best), 4) +
                         " dB) at omega = " + fmt(arg->omega, 4) +
                         ", delta = " + fmt(arg->delta, 4)
                   : std::string());
  return o;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  return Axis{lo, hi, n, false}.values();
}

Output spectrum_output(const std::string& label, const SystemParams& p,
                       const RunConfig& cfg) {
  const double w2 = std::norm(p.omega_c0);
  const double bw_pred = p.alpha > 0 ? w2 / std::sqrt(2.0 * p.alpha) : 0.0;
  const double period_pred = p.alpha > 0 ? 4.0 * kPi * w2 / p.alpha : 0.0;
  const double w_max =
      cfg.grids.w_max.value_or(bw_pred > 0 ? 3.0 * bw_pred : 0.1);
  const auto grid = linear_grid(cfg.grids.w_min.value_or(0.0), w_max,
                                cfg.grids.w_points.value_or(201));
  SpectrumOptions so;
  so.execution = cfg.serial ? Execution::serial : Execution::parallel;
  const SpectrumResult s = squeezing_spectrum(p, grid, so);
  Output o;
  o.params = params_to_json(p);
  o.table.header = {"omega", "s_omega", "s_opt_omega", "error"};
  int failed = 0;
  for (std::size_t k = 0; k < s.omega.size(); ++k) {
    failed += s.failures[k].empty() ? 0 : 1;
    o.table.add({format_number(s.omega[k]), format_number(s.s[k]),
                 format_number(s.s_opt[k]), s.failures[k]});
  }
  o.outputs["theta_used"] = s.theta_used;
  o.outputs["bandwidth"] = number_json(s.bandwidth);
  o.outputs["period"] = number_json(s.period);
  o.outputs["bandwidth_formula"] = bw_pred;
  o.outputs["period_formula"] = period_pred;
  o.outputs["failed_points"] = failed;
  o.outputs["asymmetry"] = spectrum_asymmetry(s);
  const bool has_zero = !s.omega.empty() && s.omega.front() <= 0.0;
  std::string s0;
  for (std::size_t k = 0; k < s.omega.size(); ++k)
    if (s.omega[k] == 0.0) {
      o.outputs["s_at_zero"] = number_json(s.s[k]);
      s0 = "S(0) = " + fmt(s.s[k]) + ", ";
    }
  (void)has_zero;
  o.summary = label + s0 + "bandwidth = " + fmt(s.bandwidth, 4) +
              ", period = " + fmt(s.period, 4) + ", failed points = " +
              std::to_string(failed);
  return o;
}

Output cmd_spectrum(const RunConfig& cfg) {
  return spectrum_output("spectrum: ", validate_params(cfg.params), cfg);
}

Output ratio_output(const std::string& label, double alpha, double omega_c,
                    const std::vector<double>& ratios,
                    const SystemParams& base, const RunConfig& cfg) {
  ScanOptions so = scan_options(base, cfg);
  apply_axis(so, cfg.grids.delta_min, cfg.grids.delta_max,
             cfg.grids.delta_points);
  const auto entries = ratio_scan(alpha, omega_c, ratios, so);
  Output o;
  o.params = params_to_json(base);
  o.params["omega_c0"] = complex_json(omega_c);
  o.table.header = columns({"ratio", "delta"}, kScanColumns);
  json per = json::array();
  double best = INFINITY, best_r = 0.0;
  for (const auto& e : entries) {
    scan_rows(o.table, e.scan, {format_number(e.ratio)});
    json j = scan_json(e.scan);
    j["ratio"] = e.ratio;
    per.push_back(j);
    if (e.scan.min_value < best) {
      best = e.scan.min_value;
      best_r = e.ratio;
    }
  }
  o.outputs["ratios"] = per;
  o.outputs["best_ratio"] = best_r;
  o.summary = label + "best r = " + fmt(best_r) + " with V = " + fmt(best) +
              " (" + fmt(to_db(best), 4) + " dB)";
  return o;
}

Output cmd_ratio_scan(const RunConfig& cfg) {
  const SystemParams base = scan_base(cfg.params, true, false);
  return ratio_output(
      "ratio-scan: ", base.alpha, real_omega(cfg.params),
      cfg.grids.ratios.value_or(std::vector<double>{0.1, 0.5, 1.0, 2.0}), base,
      cfg);
}

Output settings_output(const std::string& label, double alpha,
                       const std::vector<double>& deltas,
                       std::optional<double> reference,
                       const SystemParams& base, const RunConfig& cfg) {
  ScanOptions so = scan_options(base, cfg);
  apply_axis(so, cfg.grids.omega_min, cfg.grids.omega_max,
             cfg.grids.omega_points);
  Output o;
  o.params = params_to_json(base);
  o.table.header = columns({"setting", "delta", "omega"}, kScanColumns);
  json per = json::array();
  double spread = 0.0;
  for (double d : deltas) {
    const auto table = detuning_setting_compare(alpha, d, reference, so);
    spread = std::max(spread, max_setting_spread_db(table));
    for (const auto& e : table) {
      scan_rows(o.table, e.scan,
                {std::string(to_string(e.setting)), format_number(d)});
      json j = scan_json(e.scan);
      j["setting"] = std::string(to_string(e.setting));
      j["delta"] = d;
      if (e.reference) {
        j["reference_omega"] = e.reference->x;
        j["reference_variance"] = number_json(e.reference->variance);
      }
      per.push_back(j);
    }
  }
  o.outputs["settings"] = per;
  o.outputs["max_spread_db"] = spread;
  o.summary = label + "max spread between settings = " + fmt(spread, 4) +
              " dB";
  return o;
}

Output cmd_compare_settings(const RunConfig& cfg) {
  const SystemParams base = scan_base(cfg.params, false, true);
  std::optional<double> ref;
  if (cfg.params.omega) ref = real_omega(cfg.params);
  return settings_output("compare-settings: ", base.alpha, {base.delta}, ref,
                         base, cfg);
}

// --- figures ------------------------------------------------------------------

SystemParams preset_base(const RunConfig& cfg, double alpha) {
  RawParams raw = cfg.params;
  if (!raw.alpha) raw.alpha = alpha;
  return scan_base(raw, false, false);
}

// Presets 3a-3d: optimum over one axis, repeated for four ODs along the
// other axis.
Output figure3(const RunConfig& cfg, bool over_rabi) {
  const std::vector<double> ods = {100, 300, 1000, 3000};
  const SystemParams base = preset_base(cfg, 1000);
  const GridSettings& g = cfg.grids;
  std::vector<double> axis;
  if (over_rabi)
    axis = Axis{g.delta_min.value_or(0.004), g.delta_max.value_or(0.06),
                g.delta_points.value_or(8), true}
               .values();
  else
    axis = Axis{g.omega_min.value_or(0.6), g.omega_max.value_or(2.0),
                g.omega_points.value_or(8), false}
               .values();
  Output o;
  o.params = params_to_json(base);
  o.table.header = {"alpha",
                    over_rabi ? "delta" : "omega",
                    "v_opt",
                    "v_opt_db",
                    over_rabi ? "omega_opt" : "delta_opt",
                    "transmission_p",
                    "transmission_c",
                    "interior"};
  ScanOptions so = scan_options(base, cfg);
  double min_tp = INFINITY;
  for (double a : ods)
    for (double x : axis) {
      const ScanResult r =
          over_rabi
              ? optimize_over_rabi(a, x, DetuningSetting::symmetric, so)
              : optimize_over_detuning(a, x, DetuningSetting::symmetric, so);
      min_tp = std::min({min_tp, r.at_min.transmission_p,
                         r.at_min.transmission_c});
      o.table.add({format_number(a), format_number(x),
                   format_number(r.min_value), format_number(to_db(r.min_value)),
                   format_number(r.arg_min),
                   format_number(r.at_min.transmission_p),
                   format_number(r.at_min.transmission_c),
                   r.interior ? "1" : "0"});
    }
  o.outputs["min_transmission"] = min_tp;
  o.summary = "minimum transmission at the optima = " + fmt(min_tp, 4);
  return o;
}

Output cmd_figure(const RunConfig& cfg) {
  const std::string& id = cfg.figure_id;
  Output o;
  if (id == "2a") {
    RunConfig c = cfg;
    if (!c.grids.omega_points) c.grids.omega_points = 40;
    const SystemParams base = preset_base(cfg, 1000);
    o = rabi_scan("", base.alpha, cfg.params.delta.value_or(0.02),
                  DetuningSetting::symmetric, base, c);
  } else if (id == "2b") {
    RunConfig c = cfg;
    if (!c.grids.delta_min) c.grids.delta_min = 1e-3;
    if (!c.grids.delta_max) c.grids.delta_max = 0.1;
    if (!c.grids.delta_points) c.grids.delta_points = 40;
    const SystemParams base = preset_base(cfg, 1000);
    o = detuning_scan("", base.alpha, 1.0, DetuningSetting::symmetric, base,
                      c);
  } else if (id == "3a" || id == "3c") {
    o = figure3(cfg, true);
  } else if (id == "3b" || id == "3d") {
    o = figure3(cfg, false);
  } else if (id[0] == '4') {
    static const std::map<std::string, std::array<double, 3>> sets = {
        {"4a", {1000, 1.0, 0.01}},
        {"4b", {1000, 1.4, 0.019}},
        {"4c", {300, 1.0, 0.019}},
        {"4d", {300, 1.4, 0.043}}};
    const auto& v = sets.at(id);
    RawParams raw = cfg.params;
    raw.alpha = v[0];
    raw.omega = v[1];
    raw.delta = v[2];
    o = spectrum_output("", validate_params(raw), cfg);
  } else if (id == "s1") {
    const SystemParams base = preset_base(cfg, 1000);
    o = settings_output("", base.alpha, {0.02, -0.02}, 1.0, base, cfg);
  } else if (id == "s2") {
    const SystemParams base = preset_base(cfg, 1000);
    o = ratio_output("", base.alpha, 1.0,
                     cfg.grids.ratios.value_or(
                         std::vector<double>{0.1, 0.5, 1.0, 2.0}),
                     base, cfg);
  }
  o.outputs["figure"] = id;
  o.summary = "figure " + id + ": " + o.summary;
  return o;
}

Output dispatch(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "steady") return cmd_steady(cfg);
  if (c == "propagate") return cmd_propagate(cfg);
  if (c == "squeeze") return cmd_squeeze(cfg);
  if (c == "optimize-rabi") return cmd_optimize_rabi(cfg);
  if (c == "optimize-detuning") return cmd_optimize_detuning(cfg);
  if (c == "sweep") return cmd_sweep(cfg);
  if (c == "spectrum") return cmd_spectrum(cfg);
  if (c == "ratio-scan") return cmd_ratio_scan(cfg);
  if (c == "compare-settings") return cmd_compare_settings(cfg);
  if (c == "figure") return cmd_figure(cfg);
  throw UsageError("unknown command '" + c + "'");
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Output o = dispatch(cfg);
    std::string prefix = cfg.out;
    if (prefix.empty() && cfg.command == "figure")
      prefix = "figure_" + cfg.figure_id;
    if (!prefix.empty())
      emit_results(prefix, o.table, o.params, o.outputs,
                   grids_to_json(cfg.grids));
    out << o.summary << (prefix.empty() ? "" : " -> " + prefix + ".csv")
        << "\n";
    return exit_code::ok;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const InvalidParams& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return exit_code::invalid_physics;
  } catch (const SimulationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return exit_code::io;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_cli(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what() << "\n";
    return exit_code::ok;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const InvalidParams& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return exit_code::invalid_physics;
  }
  return run_command(cfg, out, err);
}

}  // namespace cptsq
