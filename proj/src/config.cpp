/// \file config.cpp
/// Config file parsing ([section] key = value with line-precise errors),
/// semantic validation delegating to the owning modules, and round-trip
/// serialization.

#include "specloc/config.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specloc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// '#' and ';' start a comment wherever they appear (values cannot contain
// them; nothing in the schema needs to).
std::string strip_comment(const std::string& s) {
  std::size_t p = s.find_first_of("#;");
  return p == std::string::npos ? s : s.substr(0, p);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Line-scoped error reporting shared by every value parser.
struct Cursor {
  std::string origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg, line);
  }

  double num(const std::string& v) const {
    try {
      std::size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos == v.size()) return d;
    } catch (const std::exception&) {
    }
    fail("invalid number '" + v + "'");
  }

  int integer(const std::string& v) const {
    try {
      std::size_t pos = 0;
      int i = std::stoi(v, &pos);
      if (pos == v.size()) return i;
    } catch (const std::exception&) {
    }
    fail("invalid integer '" + v + "'");
  }

  std::uint64_t u64(const std::string& v) const {
    // stoull wraps negatives silently, so reject the sign up front
    if (v.empty() || v[0] == '-' || v[0] == '+') fail("invalid seed '" + v + "'");
    try {
      std::size_t pos = 0;
      unsigned long long u = std::stoull(v, &pos);
      if (pos == v.size()) return static_cast<std::uint64_t>(u);
    } catch (const std::exception&) {
    }
    fail("invalid seed '" + v + "'");
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail("invalid boolean '" + v + "' (use true/false)");
  }

  std::vector<double> num_list(const std::string& v) const {
    std::vector<double> out;
    for (const std::string& tok : split_list(v)) out.push_back(num(tok));
    return out;
  }
};

void apply_key(ExperimentConfig& cfg, const std::string& section,
               const std::string& key, const std::string& val, const Cursor& at) {
  auto unknown = [&]() -> void {
    at.fail("unknown key '" + key + "' in [" + section + "]");
  };
  if (section == "grid") {
    if (key == "half_width") cfg.half_width = at.num(val);
    else if (key == "points") cfg.points = at.integer(val);
    else unknown();
  } else if (section == "initial") {
    InitialSpec& ini = cfg.initial;
    if (key == "bound_amplitude") ini.bound_amplitude = at.num(val);
    else if (key == "packet_amplitude") ini.packet_amplitude = at.num(val);
    else if (key == "packet_width") ini.packet_width = at.num(val);
    else if (key == "packet_velocity") ini.packet_velocity = at.num(val);
    else if (key == "normalize") ini.normalize = at.boolean(val);
    else unknown();
  } else if (section == "potential") {
    PotentialSpec& p = cfg.potential;
    if (key == "family") {
      try {
        p.family = family_from_string(val);
      } catch (const std::exception& e) {
        at.fail(e.what());
      }
    } else if (key == "amplitude") p.amplitude = at.num(val);
    else if (key == "modulation") p.modulation = at.num(val);
    else if (key == "frequency") p.frequency = at.num(val);
    else if (key == "width") p.width = at.num(val);
    else if (key == "phase") p.phase = at.num(val);
    else if (key == "sigma") p.sigma = at.num(val);
    else if (key == "symbol_order") p.symbol_order = at.integer(val);
    else unknown();
  } else if (section == "channel") {
    if (key == "alpha") cfg.microloc.channel.alpha = at.num(val);
    else if (key == "delta") cfg.microloc.channel.delta = at.num(val);
    else unknown();
  } else if (section == "microloc") {
    MicrolocParams& m = cfg.microloc;
    if (key == "theta") m.theta = at.num(val);
    else if (key == "rho") m.rho = at.num(val);
    else if (key == "n") m.n_iter = at.integer(val);
    else if (key == "eps_weak") m.eps_weak = at.num(val);
    else if (key == "consistency_tol") m.consistency_tol = at.num(val);
    else unknown();
  } else if (section == "evolution") {
    EvolutionConfig& ev = cfg.evolution;
    if (key == "dt") ev.dt = at.num(val);
    else if (key == "t_hor") ev.t_final = at.num(val);
    else if (key == "stride") ev.snapshot_stride = at.integer(val);
    else if (key == "boundary_warn") ev.boundary_warn = at.num(val);
    else unknown();
  } else if (section == "report") {
    if (key == "times") cfg.report_times = at.num_list(val);
    else unknown();
  } else if (section == "output") {
    if (key == "dir") cfg.out_dir = val;
    else unknown();
  } else if (section == "run") {
    if (key == "suites") {
      std::vector<Suite> suites;
      for (const std::string& tok : split_list(val)) {
        try {
          suites.push_back(suite_from_string(tok));
        } catch (const std::exception& e) {
          at.fail(e.what());
        }
      }
      cfg.suites = suites;
    } else if (key == "seed") cfg.seed = at.u64(val);
    else unknown();
  } else {
    // parse_config rejects unknown section headers before any key arrives
    unknown();
  }
}

const char* const kSections[] = {"grid",      "initial", "potential",
                                 "channel",   "microloc", "evolution",
                                 "report",    "output",  "run"};

bool known_section(const std::string& s) {
  for (const char* k : kSections)
    if (s == k) return true;
  return false;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Suite s) {
  switch (s) {
    case Suite::simulate: return "simulate";
    case Suite::cook: return "cook";
    case Suite::decompose: return "decompose";
    case Suite::lemma_lab: return "lemma-lab";
    case Suite::validate_potential: return "validate-potential";
  }
  throw std::logic_error("to_string: bad Suite");
}

Suite suite_from_string(const std::string& name) {
  for (Suite s : {Suite::simulate, Suite::cook, Suite::decompose,
                  Suite::lemma_lab, Suite::validate_potential})
    if (to_string(s) == name) return s;
  throw std::invalid_argument(
      "unknown suite '" + name +
      "' (expected simulate, cook, decompose, lemma-lab, or validate-potential)");
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.potential.family = PotentialFamily::breathing_sech2;
  cfg.potential.amplitude = 2.0;
  cfg.potential.modulation = 0.5;
  cfg.potential.frequency = 1.0;
  cfg.potential.width = 1.0;
  cfg.potential.sigma = 3.0;
  cfg.potential.symbol_order = 4;
  return cfg;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg = default_config();
  Cursor at{origin, 0};
  std::string raw, section;
  while (std::getline(in, raw)) {
    ++at.line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') at.fail("unterminated section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (!known_section(section)) at.fail("unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) at.fail("expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) at.fail("empty key");
    if (section.empty()) at.fail("key '" + key + "' before any [section]");
    apply_key(cfg, section, key, val, at);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
  ExperimentConfig cfg = parse_config(in, path);
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.half_width > 0.0))
    throw std::domain_error("[grid] half_width: must be > 0");
  make_grid(cfg);

  const InitialSpec& ini = cfg.initial;
  if (!(ini.packet_width > 0.0))
    throw std::domain_error("[initial] packet_width: must be > 0");
  if (ini.bound_amplitude == 0.0 && ini.packet_amplitude == 0.0)
    throw std::domain_error(
        "[initial] bound_amplitude, packet_amplitude: datum is identically zero");

  check_spec(cfg.potential);
  if (cfg.microloc.relax_wedge)
    throw std::domain_error(
        "[microloc] relax_wedge: config-driven runs keep the strict wedge");
  check_params(cfg.microloc);

  const EvolutionConfig& ev = cfg.evolution;
  if (!(ev.dt > 0.0)) throw std::domain_error("[evolution] dt: must be > 0");
  if (!(ev.t_final >= ev.dt))
    throw std::domain_error("[evolution] t_hor: must cover at least one step");
  if (ev.snapshot_stride < 1)
    throw std::domain_error("[evolution] stride: must be >= 1");
  if (!(ev.boundary_warn > 0.0))
    throw std::domain_error("[evolution] boundary_warn: must be > 0");

  if (cfg.report_times.empty())
    throw std::domain_error("[report] times: at least one report time");
  double prev = 1.0;
  for (double t : cfg.report_times) {
    if (!(t > prev))
      throw std::domain_error(
          "[report] times: must be strictly increasing and > 1");
    prev = t;
  }
  if (cfg.report_times.back() > ev.t_final)
    throw std::domain_error(
        "[report] times: last report time exceeds [evolution] t_hor");

  if (cfg.out_dir.empty()) throw std::domain_error("[output] dir: must be nonempty");
  if (cfg.suites.empty())
    throw std::domain_error("[run] suites: at least one suite");
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[grid]\n";
  os << "half_width = " << fmt(cfg.half_width) << "\n";
  os << "points = " << cfg.points << "\n\n";

  const InitialSpec& ini = cfg.initial;
  os << "[initial]\n";
  os << "bound_amplitude = " << fmt(ini.bound_amplitude) << "\n";
  os << "packet_amplitude = " << fmt(ini.packet_amplitude) << "\n";
  os << "packet_width = " << fmt(ini.packet_width) << "\n";
  os << "packet_velocity = " << fmt(ini.packet_velocity) << "\n";
  os << "normalize = " << (ini.normalize ? "true" : "false") << "\n\n";

  const PotentialSpec& p = cfg.potential;
  os << "[potential]\n";
  os << "family = " << to_string(p.family) << "\n";
  os << "amplitude = " << fmt(p.amplitude) << "\n";
  os << "modulation = " << fmt(p.modulation) << "\n";
  os << "frequency = " << fmt(p.frequency) << "\n";
  os << "width = " << fmt(p.width) << "\n";
  os << "phase = " << fmt(p.phase) << "\n";
  os << "sigma = " << fmt(p.sigma) << "\n";
  os << "symbol_order = " << p.symbol_order << "\n\n";

  os << "[channel]\n";
  os << "alpha = " << fmt(cfg.microloc.channel.alpha) << "\n";
  os << "delta = " << fmt(cfg.microloc.channel.delta) << "\n\n";

  const MicrolocParams& m = cfg.microloc;
  os << "[microloc]\n";
  os << "theta = " << fmt(m.theta) << "\n";
  os << "rho = " << fmt(m.rho) << "\n";
  os << "n = " << m.n_iter << "\n";
  os << "eps_weak = " << fmt(m.eps_weak) << "\n";
  os << "consistency_tol = " << fmt(m.consistency_tol) << "\n\n";

  const EvolutionConfig& ev = cfg.evolution;
  os << "[evolution]\n";
  os << "dt = " << fmt(ev.dt) << "\n";
  os << "t_hor = " << fmt(ev.t_final) << "\n";
  os << "stride = " << ev.snapshot_stride << "\n";
  os << "boundary_warn = " << fmt(ev.boundary_warn) << "\n\n";

  os << "[report]\n";
  os << "times =";
  for (double t : cfg.report_times) os << " " << fmt(t);
  os << "\n\n";

  os << "[output]\n";
  os << "dir = " << cfg.out_dir << "\n\n";

  os << "[run]\n";
  os << "suites =";
  for (Suite s : cfg.suites) os << " " << to_string(s);
  os << "\n";
  os << "seed = " << cfg.seed << "\n";
  return os.str();
}

Grid make_grid(const ExperimentConfig& cfg) {
  try {
    return Grid(cfg.points, cfg.half_width);
  } catch (const std::domain_error& e) {
    throw std::domain_error(std::string("[grid] points/half_width: ") + e.what());
  }
}

Field make_initial(const ExperimentConfig& cfg) {
  const Grid g = make_grid(cfg);
  const InitialSpec& ini = cfg.initial;
  const double two_w2 = 2.0 * ini.packet_width * ini.packet_width;
  Field u0 = sample_position(g, [&](double x) {
    const std::complex<double> carrier(std::cos(ini.packet_velocity * x),
                                       std::sin(ini.packet_velocity * x));
    return ini.bound_amplitude / std::cosh(x) +
           ini.packet_amplitude * std::exp(-x * x / two_w2) * carrier;
  });
  if (ini.normalize) {
    const double mass = weighted_norm(u0, 0.0, 0, 0.0);
    if (!(mass > 0.0))
      throw std::domain_error("[initial]: datum has no mass to normalize");
    u0.data /= mass;
  }
  return u0;
}

}  // namespace specloc
