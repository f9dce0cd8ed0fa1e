#include "fchflow/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fchflow/errors.hpp"
#include "fchflow/verification.hpp"

namespace fchflow {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct RawValue {
  std::string raw;
  std::vector<std::string> tokens;
};

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {
      "grid",   "model", "model.viscosity", "model.mobility", "solver",
      "ic",     "output", "twin",           "diagnostics",
  };
  return s;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> s = {
      "grid.dim", "grid.n", "grid.length", "grid.dealias_fraction",
      "model.eta", "model.nu_bar", "model.m_bar", "model.potential",
      "model.viscosity.kind", "model.viscosity.value",
      "model.viscosity.base", "model.viscosity.amplitude",
      "model.viscosity.floor",
      "model.mobility.kind", "model.mobility.value", "model.mobility.base",
      "model.mobility.amplitude", "model.mobility.floor",
      "solver.scheme", "solver.dt", "solver.t_end", "solver.cfl_safety",
      "solver.forcing",
      "ic.phi", "ic.phi_mean", "ic.amplitude", "ic.seed", "ic.filter",
      "ic.mode", "ic.width", "ic.velocity", "ic.velocity_amplitude",
      "ic.restart",
      "output.directory", "output.diagnostics_every", "output.lp_every",
      "output.snapshot_times",
      "twin.enabled", "twin.perturbation", "twin.seed",
      "twin.fit_window_fraction", "twin.sample_every",
      "diagnostics.gamma",
  };
  return s;
}

std::map<std::string, RawValue> scan(const std::string& text) {
  std::map<std::string, RawValue> kv;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw BadValueError(line, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_sections().count(section)) throw UnknownKeyError(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw BadValueError(line, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw BadValueError(line, "empty key");
    if (section.empty())
      throw BadValueError(key, "key appears before any [section] header");
    const std::string full = section + "." + key;
    if (!known_keys().count(full)) throw UnknownKeyError(full);
    const std::string raw = trim(line.substr(eq + 1));
    kv[full] = RawValue{raw, tokenize(raw)};
  }
  return kv;
}

double parse_double(const std::string& key, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw BadValueError(key, "not a number: '" + tok + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
    throw BadValueError(key, "not an integer: '" + tok + "'");
  return v;
}

// Pulls one typed value out of the scanned map, falling back to `def`.
class Reader {
 public:
  explicit Reader(std::map<std::string, RawValue> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  const RawValue& at(const std::string& key) const { return kv_.at(key); }

  std::string text(const std::string& key, const std::string& def) const {
    return has(key) ? kv_.at(key).raw : def;
  }

  double number(const std::string& key, double def) const {
    if (!has(key)) return def;
    return parse_double(key, single(key));
  }

  long long integer(const std::string& key, long long def) const {
    if (!has(key)) return def;
    return parse_int(key, single(key));
  }

  unsigned long long counter(const std::string& key,
                             unsigned long long def) const {
    if (!has(key)) return def;
    const std::string& tok = single(key);
    errno = 0;
    char* end = nullptr;
    if (!tok.empty() && tok.front() == '-')
      throw BadValueError(key, "must be non-negative");
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
      throw BadValueError(key, "not an integer: '" + tok + "'");
    return v;
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string& tok = single(key);
    if (tok == "true") return true;
    if (tok == "false") return false;
    throw BadValueError(key, "expected true or false");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    for (const auto& tok : kv_.at(key).tokens)
      out.push_back(parse_double(key, tok));
    return out;
  }

 private:
  const std::string& single(const std::string& key) const {
    const auto& v = kv_.at(key);
    if (v.tokens.size() != 1)
      throw BadValueError(key, "expected exactly one value");
    return v.tokens.front();
  }

  std::map<std::string, RawValue> kv_;
};

CoefficientLaw read_law(const Reader& r, const std::string& prefix) {
  const std::string kind = r.text(prefix + ".kind", "constant");
  if (kind == "constant") {
    for (const char* extra : {".base", ".amplitude", ".floor"})
      if (r.has(prefix + extra))
        throw BadValueError(prefix + extra,
                            "only bounded-smooth laws take this key");
    const double value = r.number(prefix + ".value", 1.0);
    if (!(value > 0.0)) throw NonPositiveFloorError(prefix + ".value");
    return CoefficientLaw::constant(value);
  }
  if (kind == "bounded-smooth") {
    if (r.has(prefix + ".value"))
      throw BadValueError(prefix + ".value",
                          "only constant laws take this key");
    for (const char* need : {".base", ".amplitude", ".floor"})
      if (!r.has(prefix + need)) throw MissingKeyError(prefix + need);
    const double floor = r.number(prefix + ".floor", 0.0);
    if (!(floor > 0.0)) throw NonPositiveFloorError(prefix + ".floor");
    try {
      return CoefficientLaw::bounded_smooth(r.number(prefix + ".base", 0.0),
                                            r.number(prefix + ".amplitude", 0.0),
                                            floor);
    } catch (const BadValueError&) {
      throw;
    } catch (const ConfigError& e) {
      throw BadValueError(prefix, e.what());
    }
  }
  throw BadValueError(prefix + ".kind", "expected constant or bounded-smooth");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const double* v, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += fmt(v[i]);
  }
  return out;
}

void emit_law(std::ostringstream& out, const std::string& section,
              const CoefficientLaw& law) {
  out << "[" << section << "]\n";
  if (law.kind() == CoefficientLaw::Kind::Constant) {
    out << "kind = constant\n";
    out << "value = " << fmt(law.base()) << "\n";
  } else {
    out << "kind = bounded-smooth\n";
    out << "base = " << fmt(law.base()) << "\n";
    out << "amplitude = " << fmt(law.amplitude()) << "\n";
    out << "floor = " << fmt(law.floor()) << "\n";
  }
  out << "\n";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  Reader r(scan(text));
  RunConfig cfg;

  const long long dim = r.integer("grid.dim", 2);
  if (dim != 2 && dim != 3) throw BadValueError("grid.dim", "expected 2 or 3");
  cfg.grid.dim = static_cast<int>(dim);
  cfg.grid.n = {64, 64, 1};
  if (cfg.grid.dim == 3) cfg.grid.n = {32, 32, 32};
  if (r.has("grid.n")) {
    const auto& toks = r.at("grid.n").tokens;
    if (static_cast<int>(toks.size()) != cfg.grid.dim)
      throw BadValueError("grid.n", "expected one entry per axis");
    for (int a = 0; a < cfg.grid.dim; ++a) {
      const long long n = parse_int("grid.n", toks[a]);
      if (n % 2 != 0) throw OddGridSizeError("grid.n", n);
      if (n < 8 || n > (1 << 20))
        throw BadValueError("grid.n", "axis sizes must lie in [8, 2^20]");
      cfg.grid.n[a] = static_cast<int>(n);
    }
    if (cfg.grid.dim == 2) cfg.grid.n[2] = 1;
  }
  cfg.grid.length = {kTwoPi, kTwoPi, kTwoPi};
  if (r.has("grid.length")) {
    const auto& toks = r.at("grid.length").tokens;
    if (static_cast<int>(toks.size()) != cfg.grid.dim)
      throw BadValueError("grid.length", "expected one entry per axis");
    for (int a = 0; a < cfg.grid.dim; ++a) {
      const double l = parse_double("grid.length", toks[a]);
      if (!(l > 0.0))
        throw BadValueError("grid.length", "box lengths must be > 0");
      cfg.grid.length[a] = l;
    }
  }
  cfg.grid.dealias_fraction = r.number("grid.dealias_fraction", 1.0 / 3.0);
  if (!(cfg.grid.dealias_fraction > 0.0) || cfg.grid.dealias_fraction > 1.0)
    throw BadValueError("grid.dealias_fraction", "expected a value in (0, 1]");

  if (!r.has("model.eta")) throw MissingKeyError("model.eta");
  cfg.model.eta = r.number("model.eta", 0.0);
  cfg.model.nu_bar = r.number("model.nu_bar", 0.0);
  cfg.model.m_bar = r.number("model.m_bar", 0.0);
  if (r.has("model.potential")) {
    try {
      cfg.model.potential = Potential(r.numbers("model.potential"));
    } catch (const BadValueError&) {
      throw;
    } catch (const ConfigError& e) {
      throw BadValueError("model.potential", e.what());
    }
  }
  cfg.model.viscosity = read_law(r, "model.viscosity");
  cfg.model.mobility = read_law(r, "model.mobility");
  cfg.model.finalize();

  const std::string scheme = r.text("solver.scheme", "semi-implicit-euler");
  if (scheme == "semi-implicit-euler")
    cfg.solver.scheme = Scheme::SemiImplicitEuler;
  else if (scheme == "explicit-rk4")
    cfg.solver.scheme = Scheme::ExplicitRK4;
  else
    throw BadValueError("solver.scheme",
                        "expected semi-implicit-euler or explicit-rk4");
  cfg.solver.dt = r.number("solver.dt", 1e-3);
  if (!(cfg.solver.dt > 0.0)) throw NonPositiveStepError("solver.dt");
  cfg.solver.t_end = r.number("solver.t_end", 1.0);
  if (!(cfg.solver.t_end > 0.0)) throw NonPositiveStepError("solver.t_end");
  cfg.solver.cfl_safety = r.number("solver.cfl_safety", 0.5);
  if (!(cfg.solver.cfl_safety > 0.0) || cfg.solver.cfl_safety > 1.0)
    throw BadValueError("solver.cfl_safety", "expected a value in (0, 1]");
  cfg.solver.forcing = r.text("solver.forcing", "none");
  if (cfg.solver.forcing != "none" &&
      cfg.solver.forcing != "decaying-product" &&
      cfg.solver.forcing != "steady-stripe")
    throw BadValueError("solver.forcing",
                        "expected none, decaying-product, or steady-stripe");

  cfg.ic.phi = r.text("ic.phi", "random");
  if (cfg.ic.phi != "constant" && cfg.ic.phi != "random" &&
      cfg.ic.phi != "single-mode" && cfg.ic.phi != "tanh-stripe" &&
      cfg.ic.phi != "restart")
    throw BadValueError("ic.phi",
                        "expected constant, random, single-mode, tanh-stripe, "
                        "or restart");
  cfg.ic.phi_mean = r.number("ic.phi_mean", 0.0);
  cfg.ic.amplitude = r.number("ic.amplitude", 0.01);
  cfg.ic.seed = r.counter("ic.seed", 1);
  cfg.ic.filter = r.number("ic.filter", 0.0);
  if (cfg.ic.filter < 0.0)
    throw BadValueError("ic.filter", "must be non-negative");
  if (r.has("ic.mode")) {
    const auto& toks = r.at("ic.mode").tokens;
    if (toks.empty() || static_cast<int>(toks.size()) > cfg.grid.dim)
      throw BadValueError("ic.mode", "expected at most one entry per axis");
    cfg.ic.mode = {0, 0, 0};
    for (std::size_t a = 0; a < toks.size(); ++a)
      cfg.ic.mode[a] = static_cast<int>(parse_int("ic.mode", toks[a]));
  }
  cfg.ic.width = r.number("ic.width", 0.2);
  if (!(cfg.ic.width > 0.0)) throw BadValueError("ic.width", "must be > 0");
  cfg.ic.velocity = r.text("ic.velocity", "zero");
  if (cfg.ic.velocity != "zero" && cfg.ic.velocity != "taylor-green")
    throw BadValueError("ic.velocity", "expected zero or taylor-green");
  cfg.ic.velocity_amplitude = r.number("ic.velocity_amplitude", 1.0);
  cfg.ic.restart = r.text("ic.restart", "");
  if (cfg.ic.phi == "restart" && cfg.ic.restart.empty())
    throw MissingKeyError("ic.restart");

  cfg.output.directory = r.text("output.directory", "out");
  if (cfg.output.directory.empty())
    throw BadValueError("output.directory", "must not be empty");
  cfg.output.diagnostics_every =
      static_cast<int>(r.integer("output.diagnostics_every", 1));
  if (cfg.output.diagnostics_every < 1)
    throw BadValueError("output.diagnostics_every", "must be >= 1");
  cfg.output.lp_every = static_cast<int>(r.integer("output.lp_every", 10));
  if (cfg.output.lp_every < 1)
    throw BadValueError("output.lp_every", "must be >= 1");
  cfg.output.snapshot_times = r.numbers("output.snapshot_times");
  for (double t : cfg.output.snapshot_times)
    if (!(t >= 0.0))
      throw BadValueError("output.snapshot_times", "times must be >= 0");

  cfg.twin.enabled = r.flag("twin.enabled", false);
  cfg.twin.perturbation = r.number("twin.perturbation", 0.0);
  if (cfg.twin.perturbation < 0.0)
    throw BadValueError("twin.perturbation", "must be non-negative");
  cfg.twin.seed = r.counter("twin.seed", 2);
  cfg.twin.fit_window_fraction = r.number("twin.fit_window_fraction", 0.25);
  if (!(cfg.twin.fit_window_fraction > 0.0) ||
      !(cfg.twin.fit_window_fraction < 1.0))
    throw BadValueError("twin.fit_window_fraction",
                        "expected a value in (0, 1)");
  cfg.twin.sample_every = static_cast<int>(r.integer("twin.sample_every", 1));
  if (cfg.twin.sample_every < 1)
    throw BadValueError("twin.sample_every", "must be >= 1");

  cfg.gamma = r.number("diagnostics.gamma", 1.0);
  if (cfg.gamma < 0.0)
    throw BadValueError("diagnostics.gamma", "must be non-negative");

  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  const int dim = cfg.grid.dim;

  out << "[grid]\n";
  out << "dim = " << dim << "\n";
  out << "n =";
  for (int a = 0; a < dim; ++a) out << " " << cfg.grid.n[a];
  out << "\n";
  out << "length = " << fmt_list(cfg.grid.length.data(), dim) << "\n";
  out << "dealias_fraction = " << fmt(cfg.grid.dealias_fraction) << "\n\n";

  out << "[model]\n";
  out << "eta = " << fmt(cfg.model.eta) << "\n";
  out << "nu_bar = " << fmt(cfg.model.nu_bar) << "\n";
  out << "m_bar = " << fmt(cfg.model.m_bar) << "\n";
  out << "potential = "
      << fmt_list(cfg.model.potential.coef().data(),
                  static_cast<int>(cfg.model.potential.coef().size()))
      << "\n\n";
  emit_law(out, "model.viscosity", cfg.model.viscosity);
  emit_law(out, "model.mobility", cfg.model.mobility);

  out << "[solver]\n";
  out << "scheme = "
      << (cfg.solver.scheme == Scheme::SemiImplicitEuler ? "semi-implicit-euler"
                                                         : "explicit-rk4")
      << "\n";
  out << "dt = " << fmt(cfg.solver.dt) << "\n";
  out << "t_end = " << fmt(cfg.solver.t_end) << "\n";
  out << "cfl_safety = " << fmt(cfg.solver.cfl_safety) << "\n";
  out << "forcing = " << cfg.solver.forcing << "\n\n";

  out << "[ic]\n";
  out << "phi = " << cfg.ic.phi << "\n";
  out << "phi_mean = " << fmt(cfg.ic.phi_mean) << "\n";
  out << "amplitude = " << fmt(cfg.ic.amplitude) << "\n";
  out << "seed = " << cfg.ic.seed << "\n";
  out << "filter = " << fmt(cfg.ic.filter) << "\n";
  out << "mode =";
  for (int a = 0; a < dim; ++a) out << " " << cfg.ic.mode[a];
  out << "\n";
  out << "width = " << fmt(cfg.ic.width) << "\n";
  out << "velocity = " << cfg.ic.velocity << "\n";
  out << "velocity_amplitude = " << fmt(cfg.ic.velocity_amplitude) << "\n";
  if (!cfg.ic.restart.empty()) out << "restart = " << cfg.ic.restart << "\n";
  out << "\n";

  out << "[output]\n";
  out << "directory = " << cfg.output.directory << "\n";
  out << "diagnostics_every = " << cfg.output.diagnostics_every << "\n";
  out << "lp_every = " << cfg.output.lp_every << "\n";
  if (!cfg.output.snapshot_times.empty())
    out << "snapshot_times = "
        << fmt_list(cfg.output.snapshot_times.data(),
                    static_cast<int>(cfg.output.snapshot_times.size()))
        << "\n";
  out << "\n";

  out << "[twin]\n";
  out << "enabled = " << (cfg.twin.enabled ? "true" : "false") << "\n";
  out << "perturbation = " << fmt(cfg.twin.perturbation) << "\n";
  out << "seed = " << cfg.twin.seed << "\n";
  out << "fit_window_fraction = " << fmt(cfg.twin.fit_window_fraction) << "\n";
  out << "sample_every = " << cfg.twin.sample_every << "\n\n";

  out << "[diagnostics]\n";
  out << "gamma = " << fmt(cfg.gamma) << "\n";
  return out.str();
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

SolverConfig make_solver_config(const RunConfig& cfg, const Grid& g) {
  SolverConfig s;
  s.dt = cfg.solver.dt;
  s.t_end = cfg.solver.t_end;
  s.scheme = cfg.solver.scheme;
  s.cfl_safety = cfg.solver.cfl_safety;
  if (cfg.solver.forcing != "none")
    s.forcing = make_mms(cfg.solver.forcing, g, cfg.model).forcing;
  return s;
}

}  // namespace fchflow
