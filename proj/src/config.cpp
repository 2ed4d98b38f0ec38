#include "isac/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "isac/csv.hpp"

namespace isac {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct RawValue {
  std::string scalar;
  std::vector<std::string> list;
  bool is_list = false;
  int line = 0;
};

using Section = std::map<std::string, RawValue>;

struct Document {
  std::string source;
  std::map<std::string, Section> sections;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const Document& doc, int line, const std::string& msg) {
  std::ostringstream os;
  os << doc.source;
  if (line > 0) os << ":" << line;
  os << ": " << msg;
  throw ConfigError(os.str());
}

Document parse_document(const std::string& text, const std::string& name) {
  Document doc;
  doc.source = name;
  std::string current;  // top-level keys live in section ""
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    // Strip comments (quotes are not used in this format's values).
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(doc, lineno, "malformed section header '" + line + "'");
      current = trim(line.substr(1, line.size() - 2));
      if (current == "experiment") current = "";
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(doc, lineno, "expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(doc, lineno, "empty key");
    RawValue rv;
    rv.line = lineno;
    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']')
        fail(doc, lineno, "unterminated list for key '" + key + "'");
      rv.is_list = true;
      std::string body = val.substr(1, val.size() - 2);
      std::string item;
      std::istringstream items(body);
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (!item.empty()) rv.list.push_back(item);
      }
    } else {
      rv.scalar = val;
    }
    auto& section = doc.sections[current];
    if (section.count(key))
      fail(doc, lineno, "duplicate key '" + key + "'");
    section[key] = std::move(rv);
  }
  return doc;
}

// Typed access with consumed-key tracking for strict mode.
class SectionReader {
 public:
  SectionReader(const Document& doc, const std::string& name)
      : doc_(doc), name_(name) {
    auto it = doc.sections.find(name);
    section_ = it == doc.sections.end() ? nullptr : &it->second;
  }

  bool has(const std::string& key) {
    return section_ && section_->count(key) > 0;
  }

  const RawValue& get(const std::string& key) {
    consumed_.insert(key);
    return section_->at(key);
  }

  std::string path(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    if (rv.is_list) fail(doc_, rv.line, "'" + path(key) + "' must be a number");
    return to_number(rv.scalar, rv.line, key);
  }

  int integer(const std::string& key, int fallback) {
    double v = number(key, fallback);
    if (v != std::floor(v))
      fail(doc_, line_of(key), "'" + path(key) + "' must be an integer");
    return static_cast<int>(v);
  }

  std::uint64_t uint64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    try {
      return std::stoull(rv.scalar);
    } catch (...) {
      fail(doc_, rv.line, "'" + path(key) + "' must be a non-negative integer");
    }
  }

  std::string str(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    if (rv.is_list) fail(doc_, rv.line, "'" + path(key) + "' must be a string");
    return rv.scalar;
  }

  std::vector<double> numbers(const std::string& key,
                              const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    if (!rv.is_list)
      fail(doc_, rv.line, "'" + path(key) + "' must be a list [..]");
    std::vector<double> out;
    for (const auto& item : rv.list)
      out.push_back(to_number(item, rv.line, key));
    return out;
  }

  std::vector<std::string> strings(const std::string& key,
                                   const std::vector<std::string>& fallback) {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    if (!rv.is_list)
      fail(doc_, rv.line, "'" + path(key) + "' must be a list [..]");
    return rv.list;
  }

  int line_of(const std::string& key) const {
    return section_ && section_->count(key) ? section_->at(key).line : 0;
  }

  void reject_unknown() const {
    if (!section_) return;
    for (const auto& [key, rv] : *section_) {
      if (!consumed_.count(key))
        fail(doc_, rv.line, "unknown key '" + path(key) + "'");
    }
  }

 private:
  double to_number(const std::string& s, int line, const std::string& key) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (...) {
      fail(doc_, line, "'" + path(key) + "': cannot parse '" + s + "' as a number");
    }
  }

  const Document& doc_;
  std::string name_;
  const Section* section_ = nullptr;
  std::set<std::string> consumed_;
};

std::vector<int> to_int_list(const std::vector<double>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (double d : v) out.push_back(static_cast<int>(d));
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::power_sweep: return "power-sweep";
    case ExperimentKind::rf_sweep: return "rf-sweep";
    case ExperimentKind::tradeoff_region: return "tradeoff-region";
    case ExperimentKind::beampattern: return "beampattern";
    case ExperimentKind::verify: return "verify";
  }
  return "?";
}

std::string to_string(SolverId solver) {
  switch (solver) {
    case SolverId::bcd_digital: return "bcd-digital";
    case SolverId::bcd_hybrid: return "bcd-hybrid";
    case SolverId::bd_digital: return "bd-digital";
    case SolverId::bd_hybrid: return "bd-hybrid";
    case SolverId::reference: return "reference";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::convergence, ExperimentKind::power_sweep,
                 ExperimentKind::rf_sweep, ExperimentKind::tradeoff_region,
                 ExperimentKind::beampattern, ExperimentKind::verify})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

SolverId solver_from_string(const std::string& s) {
  for (auto v : {SolverId::bcd_digital, SolverId::bcd_hybrid,
                 SolverId::bd_digital, SolverId::bd_hybrid, SolverId::reference})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown solver '" + s + "'");
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("validation: 'trials' must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw ConfigError("validation: 'eta' must lie in [0, 1]");
  if (solvers.empty()) throw ConfigError("validation: 'solvers' must be non-empty");
  if (kind == ExperimentKind::power_sweep && pt_dbm_sweep.empty())
    throw ConfigError("validation: 'pt_dbm_sweep' must be non-empty for power-sweep");
  if (kind == ExperimentKind::rf_sweep && rf_sweep.empty())
    throw ConfigError("validation: 'rf_sweep' must be non-empty for rf-sweep");
  if (kind == ExperimentKind::tradeoff_region && eta_sweep.empty())
    throw ConfigError("validation: 'eta_sweep' must be non-empty for tradeoff-region");
  for (double e : eta_sweep)
    if (!(e >= 0.0 && e <= 1.0))
      throw ConfigError("validation: 'eta_sweep' entries must lie in [0, 1]");
  if (kind == ExperimentKind::beampattern) {
    if (!(angle_step_deg > 0.0) || angle_max_deg < angle_min_deg ||
        (angle_max_deg - angle_min_deg) < angle_step_deg)
      throw ConfigError("validation: beampattern angle grid contains no angles");
  }
}

void RunConfig::validate() const {
  experiment.validate();
  try {
    scenario.dims.validate();
    scenario.chan.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("validation: ") + e.what());
  }
  if (!(bcd_tol > 0.0)) throw ConfigError("validation: 'bcd.tol' must be > 0");
  if (bcd_max_iter < 1)
    throw ConfigError("validation: 'bcd.max_iter' must be >= 1");
}

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  Document doc = parse_document(text, source_name);
  for (const auto& [name, _] : doc.sections) {
    if (name != "" && name != "scenario" && name != "bcd" && name != "hybrid")
      throw ConfigError(source_name + ": unknown section '[" + name + "]'");
  }

  RunConfig cfg;

  SectionReader exp(doc, "");
  ExperimentSpec& e = cfg.experiment;
  if (exp.has("kind")) e.kind = experiment_kind_from_string(exp.str("kind", ""));
  e.trials = exp.integer("trials", e.trials);
  e.seed = exp.uint64("seed", e.seed);
  e.eta = exp.number("eta", e.eta);
  if (exp.has("solvers")) {
    e.solvers.clear();
    for (const auto& s : exp.strings("solvers", {}))
      e.solvers.push_back(solver_from_string(s));
  }
  e.pt_dbm_sweep = exp.numbers("pt_dbm_sweep", e.pt_dbm_sweep);
  e.eta_sweep = exp.numbers("eta_sweep", e.eta_sweep);
  if (exp.has("rf_sweep")) e.rf_sweep = to_int_list(exp.numbers("rf_sweep", {}));
  e.angle_min_deg = exp.number("angle_min_deg", e.angle_min_deg);
  e.angle_max_deg = exp.number("angle_max_deg", e.angle_max_deg);
  e.angle_step_deg = exp.number("angle_step_deg", e.angle_step_deg);
  exp.reject_unknown();

  SectionReader sc(doc, "scenario");
  ScenarioGenConfig& s = cfg.scenario;
  s.dims.n_tx = sc.integer("n_tx", s.dims.n_tx);
  s.dims.n_rx = sc.integer("n_rx", s.dims.n_rx);
  s.dims.n_streams = sc.integer("n_streams", s.dims.n_streams);
  s.dims.n_users = sc.integer("n_users", s.dims.n_users);
  s.dims.n_rf_tx = sc.integer("n_rf_tx", s.dims.n_rf_tx);
  s.dims.n_rf_rx = sc.integer("n_rf_rx", s.dims.n_rf_rx);
  s.dims.n_sensor = sc.integer("n_sensor", s.dims.n_sensor);
  s.dims.n_clutter = sc.integer("n_clutter", s.dims.n_clutter);
  s.chan.n_paths_per_user = sc.integer("paths_per_user", s.chan.n_paths_per_user);
  s.chan.pathloss_intercept =
      sc.number("pathloss_intercept_db", s.chan.pathloss_intercept);
  s.chan.pathloss_exponent = sc.number("pathloss_exponent", s.chan.pathloss_exponent);
  s.chan.shadowing_std = sc.number("shadowing_std_db", s.chan.shadowing_std);
  s.chan.rician_offset = sc.number("rician_offset_db", s.chan.rician_offset);
  s.chan.carrier_hz = sc.number("carrier_ghz", s.chan.carrier_hz / 1e9) * 1e9;
  s.noise_user_dbm = sc.number("noise_user_dbm", s.noise_user_dbm);
  s.noise_radar_dbm = sc.number("noise_radar_dbm", s.noise_radar_dbm);
  s.pt_dbm = sc.number("pt_dbm", s.pt_dbm);
  s.target_gain_db = sc.number("target_gain_db", s.target_gain_db);
  s.clutter_gain_db = sc.number("clutter_gain_db", s.clutter_gain_db);
  s.user_weights = sc.numbers("user_weights", s.user_weights);

  Geometry& g = s.geometry;
  if (sc.has("bs_pos")) {
    auto v = sc.numbers("bs_pos", {});
    if (v.size() != 2)
      throw ConfigError(source_name + ": 'scenario.bs_pos' needs two values");
    g.bs_pos = {v[0], v[1]};
  }
  if (sc.has("radar_pos")) {
    auto v = sc.numbers("radar_pos", {});
    if (v.size() != 2)
      throw ConfigError(source_name + ": 'scenario.radar_pos' needs two values");
    g.radar_pos = {v[0], v[1]};
  }
  g.ue_dist_min = sc.number("ue_dist_min", g.ue_dist_min);
  g.ue_dist_max = sc.number("ue_dist_max", g.ue_dist_max);
  if (sc.has("ue_distances")) {
    g.ue_pos.clear();
    for (double d : sc.numbers("ue_distances", {}))
      g.ue_pos.push_back(g.bs_pos + Eigen::Vector2d(d, 0.0));
  }
  if (sc.has("ue_angles_deg")) {
    std::vector<double> a = sc.numbers("ue_angles_deg", {});
    for (auto& x : a) x *= kDegToRad;
    g.ue_aod = a;
  }
  if (sc.has("target_angle_deg"))
    g.target_aod = sc.number("target_angle_deg", 0.0) * kDegToRad;
  if (sc.has("target_radar_angle_deg"))
    g.target_aoa = sc.number("target_radar_angle_deg", 0.0) * kDegToRad;
  if (sc.has("clutter_angles_deg")) {
    std::vector<double> a = sc.numbers("clutter_angles_deg", {});
    for (auto& x : a) x *= kDegToRad;
    g.clutter_aod = a;
  }
  if (sc.has("clutter_radar_angles_deg")) {
    std::vector<double> a = sc.numbers("clutter_radar_angles_deg", {});
    for (auto& x : a) x *= kDegToRad;
    g.clutter_aoa = a;
  }
  sc.reject_unknown();

  SectionReader bc(doc, "bcd");
  cfg.bcd_tol = bc.number("tol", cfg.bcd_tol);
  cfg.bcd_max_iter = bc.integer("max_iter", cfg.bcd_max_iter);
  bc.reject_unknown();

  SectionReader hy(doc, "hybrid");
  cfg.hybrid.max_outer = hy.integer("max_outer", cfg.hybrid.max_outer);
  cfg.hybrid.rel_tol = hy.number("rel_tol", cfg.hybrid.rel_tol);
  cfg.hybrid.manifold_steps = hy.integer("manifold_steps", cfg.hybrid.manifold_steps);
  hy.reject_unknown();

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  const ExperimentSpec& e = cfg.experiment;
  os << "kind = " << to_string(e.kind) << "\n";
  os << "trials = " << e.trials << "\n";
  os << "seed = " << e.seed << "\n";
  os << "eta = " << csv_num(e.eta) << "\n";
  os << "solvers = [";
  for (std::size_t i = 0; i < e.solvers.size(); ++i)
    os << (i ? ", " : "") << to_string(e.solvers[i]);
  os << "]\n";
  auto dump_list = [&os](const char* key, const std::vector<double>& v) {
    os << key << " = [";
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? ", " : "") << csv_num(v[i]);
    os << "]\n";
  };
  dump_list("pt_dbm_sweep", e.pt_dbm_sweep);
  dump_list("eta_sweep", e.eta_sweep);
  os << "rf_sweep = [";
  for (std::size_t i = 0; i < e.rf_sweep.size(); ++i)
    os << (i ? ", " : "") << e.rf_sweep[i];
  os << "]\n";
  os << "angle_min_deg = " << csv_num(e.angle_min_deg) << "\n";
  os << "angle_max_deg = " << csv_num(e.angle_max_deg) << "\n";
  os << "angle_step_deg = " << csv_num(e.angle_step_deg) << "\n";

  const ScenarioGenConfig& s = cfg.scenario;
  const Geometry& g = s.geometry;
  os << "\n[scenario]\n";
  os << "n_tx = " << s.dims.n_tx << "\n";
  os << "n_rx = " << s.dims.n_rx << "\n";
  os << "n_streams = " << s.dims.n_streams << "\n";
  os << "n_users = " << s.dims.n_users << "\n";
  os << "n_rf_tx = " << s.dims.n_rf_tx << "\n";
  os << "n_rf_rx = " << s.dims.n_rf_rx << "\n";
  os << "n_sensor = " << s.dims.n_sensor << "\n";
  os << "n_clutter = " << s.dims.n_clutter << "\n";
  os << "paths_per_user = " << s.chan.n_paths_per_user << "\n";
  os << "pathloss_intercept_db = " << csv_num(s.chan.pathloss_intercept) << "\n";
  os << "pathloss_exponent = " << csv_num(s.chan.pathloss_exponent) << "\n";
  os << "shadowing_std_db = " << csv_num(s.chan.shadowing_std) << "\n";
  os << "rician_offset_db = " << csv_num(s.chan.rician_offset) << "\n";
  os << "carrier_ghz = " << csv_num(s.chan.carrier_hz / 1e9) << "\n";
  os << "noise_user_dbm = " << csv_num(s.noise_user_dbm) << "\n";
  os << "noise_radar_dbm = " << csv_num(s.noise_radar_dbm) << "\n";
  os << "pt_dbm = " << csv_num(s.pt_dbm) << "\n";
  os << "target_gain_db = " << csv_num(s.target_gain_db) << "\n";
  os << "clutter_gain_db = " << csv_num(s.clutter_gain_db) << "\n";
  if (!s.user_weights.empty()) dump_list("user_weights", s.user_weights);
  os << "bs_pos = [" << csv_num(g.bs_pos.x()) << ", " << csv_num(g.bs_pos.y())
     << "]\n";
  os << "radar_pos = [" << csv_num(g.radar_pos.x()) << ", "
     << csv_num(g.radar_pos.y()) << "]\n";
  os << "ue_dist_min = " << csv_num(g.ue_dist_min) << "\n";
  os << "ue_dist_max = " << csv_num(g.ue_dist_max) << "\n";
  auto dump_angles = [&os](const char* key, const std::vector<double>& rad) {
    os << key << " = [";
    for (std::size_t i = 0; i < rad.size(); ++i)
      os << (i ? ", " : "") << csv_num(rad[i] / kDegToRad);
    os << "]\n";
  };
  if (g.ue_aod) dump_angles("ue_angles_deg", *g.ue_aod);
  if (g.target_aod)
    os << "target_angle_deg = " << csv_num(*g.target_aod / kDegToRad) << "\n";
  if (g.target_aoa)
    os << "target_radar_angle_deg = " << csv_num(*g.target_aoa / kDegToRad)
       << "\n";
  if (g.clutter_aod) dump_angles("clutter_angles_deg", *g.clutter_aod);
  if (g.clutter_aoa) dump_angles("clutter_radar_angles_deg", *g.clutter_aoa);

  os << "\n[bcd]\n";
  os << "tol = " << csv_num(cfg.bcd_tol) << "\n";
  os << "max_iter = " << cfg.bcd_max_iter << "\n";

  os << "\n[hybrid]\n";
  os << "max_outer = " << cfg.hybrid.max_outer << "\n";
  os << "rel_tol = " << csv_num(cfg.hybrid.rel_tol) << "\n";
  os << "manifold_steps = " << cfg.hybrid.manifold_steps << "\n";
  return os.str();
}

}  // namespace isac
