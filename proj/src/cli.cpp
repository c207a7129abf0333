#include "msle/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "msle/burgers.hpp"
#include "msle/convergence.hpp"
#include "msle/delta0.hpp"
#include "msle/error.hpp"
#include "msle/io.hpp"
#include "msle/loewner.hpp"
#include "msle/sde.hpp"

namespace msle::cli {

namespace {

using boost::property_tree::ptree;
using nlohmann::json;

// --- value parsing -----------------------------------------------------------

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw DomainError(key + ": not a number: '" + s + "'");
  }
}

long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw DomainError(key + ": not an integer: '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_double(key, p));
  return out;
}

// "4i", "-1+2i", "0.5-i", "3", "i", "1e-3+2e+1i".
cplx parse_complex(const std::string& key, std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) throw DomainError(key + ": empty complex number");
  if (s.back() != 'i') return {parse_double(key, s), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  auto coef = [&](const std::string& c) {
    if (c.empty() || c == "+") return 1.0;
    if (c == "-") return -1.0;
    return parse_double(key, c);
  };
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      return {parse_double(key, body.substr(0, k)), coef(body.substr(k))};
    }
  }
  return {0.0, coef(body)};
}

std::vector<cplx> parse_complexes(const std::string& key, const std::string& s) {
  std::vector<cplx> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_complex(key, p));
  if (out.empty()) throw DomainError(key + ": empty list");
  return out;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

// --- effective configuration ---------------------------------------------------

class Config {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read config '" + path + "'");
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
      // A sidecar from an earlier run: its "config" block is the effective config.
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw DomainError("config '" + path + "': " + e.what());
      }
      const json& c = j.contains("config") ? j["config"] : j;
      if (!c.is_object()) throw DomainError("config '" + path + "': expected an object");
      for (const auto& [section, kv] : c.items()) {
        if (!kv.is_object()) throw DomainError("config '" + path + "': section " + section + " is not a table");
        for (const auto& [k, v] : kv.items()) set(section + "." + k, v.is_string() ? v.get<std::string>() : v.dump());
      }
      return;
    }
    try {
      ptree p;
      boost::property_tree::read_ini(in, p);
      for (const auto& [section, kv] : p) {
        if (kv.empty()) throw DomainError("config '" + path + "': key '" + section + "' outside a section");
        for (const auto& [k, v] : kv) set(section + "." + k, v.data());
      }
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw DomainError("config '" + path + "': " + e.message());
    }
  }

  void set(const std::string& key, const std::string& value) {
    static const std::set<std::string> sections{"measure", "sde", "run"};
    const auto dot = key.find('.');
    if (dot == std::string::npos || !sections.count(key.substr(0, dot))) {
      throw DomainError("config: unknown section in key '" + key + "'");
    }
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      values_[key] = fallback;
      return fallback;
    }
    return it->second;
  }
  double num(const std::string& key, double fallback) {
    if (!has(key)) values_[key] = fmt17(fallback);
    return parse_double(key, values_[key]);
  }
  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) values_[key] = std::to_string(fallback);
    return parse_int(key, values_[key]);
  }

  /// Every key that was read or set, grouped by section; echoed into sidecars.
  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : values_) {
      const auto dot = k.find('.');
      j[k.substr(0, dot)][k.substr(dot + 1)] = v;
    }
    return j;
  }

 private:
  std::map<std::string, std::string> values_;
};

ProbabilityMeasure parse_base(const std::string& s, const std::string& weights) {
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  const auto args = parse_doubles("measure.base", rest);
  auto need = [&](std::size_t n) {
    if (args.size() != n) throw DomainError("measure.base: '" + kind + "' takes " + std::to_string(n) + " values");
  };
  if (kind == "delta0") {
    need(0);
    return ProbabilityMeasure::point_mass(0.0);
  }
  if (kind == "point") {
    need(1);
    return ProbabilityMeasure::point_mass(args[0]);
  }
  if (kind == "uniform") {
    need(2);
    return ProbabilityMeasure::uniform(args[0], args[1]);
  }
  if (kind == "semicircle") {
    need(2);
    return ProbabilityMeasure::semicircle(args[0], args[1]);
  }
  if (kind == "atoms") {
    if (args.empty()) throw DomainError("measure.base: 'atoms' needs at least one value");
    if (weights.empty()) return ProbabilityMeasure::equal_weights(args);
    return ProbabilityMeasure::atomic(args, parse_doubles("measure.weights", weights));
  }
  throw DomainError("measure.base: unknown kind '" + kind + "' (delta0, point:x, uniform:a,b, semicircle:c,r, atoms:...)");
}

ProbabilityMeasure base_of(Config& c) {
  const std::string w = c.has("measure.weights") ? c.str("measure.weights", "") : "";
  return parse_base(c.str("measure.base", "delta0"), w);
}

SdeConfig sde_of(Config& c) {
  SdeConfig s;
  s.kappa = c.num("sde.kappa", 2.0);
  s.theta = c.num("sde.theta", 0.0);
  s.t_max = c.num("sde.t_max", 1.0);
  s.dt_base = c.num("sde.dt", 1e-4);
  s.c_gap = c.num("sde.c_gap", 0.1);
  const long long seed = c.integer("sde.seed", 0);
  if (seed < 0) throw DomainError("sde.seed must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  const std::string scheme = c.str("sde.scheme", "euler");
  if (scheme == "euler") {
    s.scheme = Scheme::Euler;
  } else if (scheme == "heun") {
    s.scheme = Scheme::Heun;
  } else {
    throw DomainError("sde.scheme must be euler or heun");
  }
  if (c.has("sde.x0")) {
    s.x0 = parse_doubles("sde.x0", c.str("sde.x0", ""));
    if (c.has("sde.n") && c.integer("sde.n", 0) != static_cast<long long>(s.x0.size())) {
      throw DomainError("sde.n does not match the length of sde.x0");
    }
  } else {
    const long long n = c.integer("sde.n", 10);
    if (n < 1) throw DomainError("sde.n must be positive");
    const auto start = discretize(base_of(c), static_cast<std::size_t>(n));
    s.x0.assign(start.atoms().begin(), start.atoms().end());
  }
  if (c.has("sde.lambdas")) s.lambdas = parse_doubles("sde.lambdas", c.str("sde.lambdas", ""));
  return s.validated();
}

EnsembleOptions ensemble_of(Config& c) {
  EnsembleOptions o;
  o.kappa = c.num("sde.kappa", 2.0);
  o.dt_base = c.num("sde.dt", 1e-3);
  o.c_gap = c.num("sde.c_gap", 0.1);
  o.seeds = static_cast<int>(c.integer("run.seeds", 50));
  const long long seed = c.integer("sde.seed", 0);
  if (seed < 0) throw DomainError("sde.seed must be non-negative");
  o.seed = static_cast<std::uint64_t>(seed);
  return o;
}

std::vector<std::size_t> ns_of(Config& c) {
  std::vector<std::size_t> ns;
  for (double v : parse_doubles("run.ns", c.str("run.ns", "10,40,160"))) {
    if (!(v >= 1) || v != std::floor(v)) throw DomainError("run.ns must hold positive integers");
    ns.push_back(static_cast<std::size_t>(v));
  }
  return ns;
}

// --- commands ------------------------------------------------------------------

struct Output {
  std::string out_dir;
  json sidecar = json::object();

  std::string artifact(const std::string& stem, const std::string& ext, const std::string& content) {
    const auto path = write_artifact(out_dir, stem, ext, content);
    sidecar["artifacts"].push_back(path);
    return path;
  }
};

void cmd_simulate(Config& c, Output& o) {
  const SdeConfig s = sde_of(c);
  RecordPolicy rec;
  if (c.has("run.times")) rec.observe = parse_doubles("run.times", c.str("run.times", ""));
  const DrivingPaths p = simulate(s, rec);
  std::ostringstream csv;
  p.write_csv(csv);
  o.artifact("paths", "csv", csv.str());
  const auto last = p.row(p.size() - 1);
  o.sidecar["result"] = {{"rows", p.size()}, {"t_end", p.t_end()}, {"final", std::vector<double>(last.begin(), last.end())}};
}

void cmd_hull(Config& c, Output& o) {
  const auto base = base_of(c);
  const double t = c.num("run.t", 1.0);
  const long long cols = c.integer("run.columns", 64);
  if (cols < 8 || cols > 100000) throw DomainError("run.columns must lie in [8, 100000]");
  const Hull h = hull_boundary(base, t, static_cast<int>(cols));
  std::ostringstream csv;
  write_hull_csv(csv, h);
  o.artifact("hull", "csv", csv.str());
  o.artifact("hull", "svg", hull_svg(h));
  json r = h.to_json();
  r.erase("boundary");
  o.sidecar["result"] = r;
}

void cmd_oracle(Config& c, Output& o) {
  const auto zs = parse_complexes("run.z", c.str("run.z", "4i"));
  const auto ts = parse_doubles("run.t", c.str("run.t", "1"));
  if (ts.empty()) throw DomainError("run.t: empty list");
  json rows = json::array();
  for (double t : ts) {
    for (const cplx z : zs) {
      const auto m = delta0::oracle_maps(z, t);
      json row = {{"z", cjson(z)}, {"t", t}, {"M", cjson(delta0::oracle_transform(z, t))}, {"h", cjson(m.h)}, {"g", cjson(m.g)}};
      if (t > 0.0) {
        const auto iv = delta0::oracle_intervals(t);
        row["support"] = {iv.support.lo, iv.support.hi};
        row["footprint"] = {iv.footprint.lo, iv.footprint.hi};
      }
      rows.push_back(row);
    }
  }
  o.sidecar["result"] = rows.size() == 1 ? rows[0] : rows;
}

void cmd_converge(Config& c, Output& o) {
  const ExperimentKind kind = experiment_kind_from_string(c.str("run.kind", "transform"));
  ExperimentReport r;
  switch (kind) {
    case ExperimentKind::TransformConvergence:
      r = run_transform_convergence(base_of(c), ns_of(c), c.num("run.t", 1.0),
                                    parse_complexes("run.points", c.str("run.points", "2i,1+2i")), ensemble_of(c));
      break;
    case ExperimentKind::MapConvergence:
      r = run_map_convergence(base_of(c), ns_of(c), c.num("run.t", 1.0),
                              parse_complexes("run.points", c.str("run.points", "2i,3i,1+2i,-1+2i")), ensemble_of(c));
      break;
    case ExperimentKind::MomentLaw: {
      const auto s = sde_of(c);
      r = run_moment_law(s, static_cast<int>(c.integer("run.seeds", 2000)));
      break;
    }
    case ExperimentKind::SemicircleTheta: {
      if (!c.has("sde.theta")) c.set("sde.theta", "2");
      const auto s = sde_of(c);
      if (!(s.theta > 0.0)) throw DomainError("semicircle experiment needs sde.theta > 0");
      r = run_semicircle_theta(s, c.num("run.t_long", 10.0 / s.theta), static_cast<int>(c.integer("run.seeds", 50)));
      break;
    }
    case ExperimentKind::HullScaling: {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& p : split(c.str("run.pairs", "1:2"), ',')) {
        const auto tc = split(p, ':');
        if (tc.size() != 2) throw DomainError("run.pairs: expected t:c entries");
        pairs.push_back({parse_double("run.pairs", tc[0]), parse_double("run.pairs", tc[1])});
      }
      r = run_hull_scaling(pairs, static_cast<int>(c.integer("run.columns", 64)), o.out_dir);
      for (const auto& a : r.artifacts) o.sidecar["artifacts"].push_back(a);
      break;
    }
    case ExperimentKind::FootprintCheck:
      r = run_footprint_check(parse_doubles("run.ts", c.str("run.ts", "0.25,1,4")));
      break;
  }
  o.sidecar["result"] = r.to_json();
}

void cmd_trace(Config& c, Output& o) {
  const SdeConfig s = sde_of(c);
  std::vector<double> times = c.has("run.times") ? parse_doubles("run.times", c.str("run.times", ""))
                                                 : std::vector<double>{s.t_max};
  const double eps = c.num("run.eps_lift", 1e-6);
  const DrivingPaths p = simulate(s);
  const auto tips = tip_history(p, times, eps);
  std::ostringstream csv;
  write_tips_csv(csv, tips);
  o.artifact("tips", "csv", csv.str());
  json last = json::array();
  for (const auto& tp : tips) {
    if (tp.t == times.back()) last.push_back(cjson(tp.tip));
  }
  o.sidecar["result"] = {{"samples", tips.size()}, {"tips_at_last_time", last}};
}

// Values that start with '-' followed by a digit (e.g. `--x0 -1,1`) are glued
// to their flag so the parser never mistakes them for options.
std::vector<std::string> glue_negative_values(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) == 0 && a.find('=') == std::string::npos && i + 1 < args.size()) {
      const auto& v = args[i + 1];
      if (v.size() > 1 && v[0] == '-' && (std::isdigit(static_cast<unsigned char>(v[1])) || v[1] == '.')) {
        out.push_back(a + "=" + v);
        ++i;
        continue;
      }
    }
    out.push_back(a);
  }
  return out;
}

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const std::vector<Flag> kMeasureFlags = {
    {"--base", "measure.base", "delta0 | point:x | uniform:a,b | semicircle:c,r | atoms:x1,x2,..."},
    {"--weights", "measure.weights", "weights for atoms:..."},
};
const std::vector<Flag> kSdeFlags = {
    {"--n", "sde.n", "number of particles (x0 from discretising the base)"},
    {"--x0", "sde.x0", "comma-separated starting points"},
    {"--lambdas", "sde.lambdas", "comma-separated weights"},
    {"--kappa", "sde.kappa", "kappa in [0, 4]"},
    {"--theta", "sde.theta", "restoring force"},
    {"--dt", "sde.dt", "base step"},
    {"--c-gap", "sde.c_gap", "gap-adaptive step factor"},
    {"--t-max", "sde.t_max", "final time"},
    {"--seed", "sde.seed", "RNG seed"},
    {"--scheme", "sde.scheme", "euler | heun"},
};

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple SLE: particle simulation, Loewner flows and the Burgers limit", "msle"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = "out";
  std::map<std::string, std::string> given;
  std::map<std::string, CLI::Option*> opts;

  auto add_flags = [&](CLI::App* sub, const std::vector<Flag>& flags) {
    for (const auto& f : flags) {
      opts[std::string(sub->get_name()) + f.key] = sub->add_option(f.name, given[std::string(sub->get_name()) + f.key], f.help);
    }
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI file with [measure] [sde] [run], or a JSON sidecar");
    sub->add_option("--out", out_dir, "artifact directory");
  };

  auto* sim = app.add_subcommand("simulate", "particle SDE paths -> CSV");
  common(sim);
  add_flags(sim, kMeasureFlags);
  add_flags(sim, kSdeFlags);
  add_flags(sim, {{"--times", "run.times", "store only these times"}});

  auto* hull = app.add_subcommand("hull", "hull of the limit flow -> CSV + SVG");
  common(hull);
  add_flags(hull, kMeasureFlags);
  add_flags(hull, {{"--t", "run.t", "time"}, {"--columns", "run.columns", "boundary columns"}});

  auto* oracle = app.add_subcommand("oracle", "point-mass closed forms -> JSON");
  common(oracle);
  add_flags(oracle, {{"--z", "run.z", "points, e.g. 4i,1+2i"}, {"--t", "run.t", "times, comma-separated"}});

  auto* conv = app.add_subcommand("converge", "experiment reports");
  common(conv);
  add_flags(conv, kMeasureFlags);
  add_flags(conv, kSdeFlags);
  add_flags(conv, {{"--kind", "run.kind", "transform | map | moment | semicircle | hull-scaling | footprint"},
                   {"--ns", "run.ns", "particle counts"},
                   {"--t", "run.t", "time"},
                   {"--points", "run.points", "evaluation points"},
                   {"--seeds", "run.seeds", "trajectories per N"},
                   {"--t-long", "run.t_long", "semicircle horizon"},
                   {"--pairs", "run.pairs", "hull scaling t:c pairs"},
                   {"--columns", "run.columns", "hull columns"},
                   {"--ts", "run.ts", "footprint check times"}});

  auto* trace = app.add_subcommand("trace", "slit tips -> CSV");
  common(trace);
  add_flags(trace, kMeasureFlags);
  add_flags(trace, kSdeFlags);
  add_flags(trace, {{"--times", "run.times", "tip times"}, {"--eps-lift", "run.eps_lift", "lift above the driver"}});

  std::vector<std::string> args = glue_negative_values(raw_args);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    Config cfg;
    if (!config_path.empty()) cfg.load(config_path);
    for (const auto& [k, opt] : opts) {
      if (k.rfind(name, 0) == 0 && opt->count() > 0) cfg.set(k.substr(name.size()), given[k]);
    }
    if (cfg.has("run.out_dir") && !sub->get_option("--out")->count()) out_dir = cfg.str("run.out_dir", out_dir);

    Output o;
    o.out_dir = out_dir;
    o.sidecar["command"] = name;
    o.sidecar["artifacts"] = json::array();
    if (name == "simulate") cmd_simulate(cfg, o);
    if (name == "hull") cmd_hull(cfg, o);
    if (name == "oracle") cmd_oracle(cfg, o);
    if (name == "converge") cmd_converge(cfg, o);
    if (name == "trace") cmd_trace(cfg, o);
    o.sidecar["config"] = cfg.to_json();
    const std::string body = o.sidecar.dump(2);
    o.sidecar["sidecar"] = write_artifact(out_dir, name, "json", body);
    out << o.sidecar.dump(2) << "\n";
    return 0;
  } catch (const DomainError& e) {
    err << e.to_json().dump() << "\n";
    return 1;
  } catch (const Error& e) {
    err << e.to_json().dump() << "\n";
    return 2;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace msle::cli
