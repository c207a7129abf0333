#include "msle/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "msle/burgers.hpp"
#include "msle/delta0.hpp"
#include "msle/error.hpp"
#include "msle/io.hpp"
#include "msle/loewner.hpp"
#include "msle/parallel.hpp"
#include "msle/rng.hpp"

namespace msle {

namespace {

nlohmann::json points_json(const std::vector<cplx>& pts) {
  nlohmann::json j = nlohmann::json::array();
  for (const cplx& p : pts) j.push_back({p.real(), p.imag()});
  return j;
}

void check_ns(const std::vector<std::size_t>& ns) {
  if (ns.empty()) throw DomainError("experiment: Ns must not be empty");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1])) {
      throw DomainError("experiment: Ns must be positive and increasing");
    }
  }
}

void check_points(const std::vector<cplx>& pts) {
  if (pts.empty()) throw DomainError("experiment: evaluation points must not be empty");
  for (const cplx& p : pts) {
    if (!(p.imag() >= 1.0)) {
      throw DomainError("experiment: evaluation points need Im >= 1", {{"re", p.real()}, {"im", p.imag()}});
    }
  }
}

void check_options(const EnsembleOptions& o) {
  if (o.seeds < 1) throw DomainError("experiment: seeds must be positive");
}

SdeConfig ensemble_config(const ProbabilityMeasure& base, std::size_t n, double t,
                          const EnsembleOptions& o) {
  const ProbabilityMeasure start = discretize(base, n);
  SdeConfig c;
  c.kappa = o.kappa;
  c.x0.assign(start.atoms().begin(), start.atoms().end());
  c.dt_base = o.dt_base;
  c.c_gap = o.c_gap;
  c.t_max = t > 0.0 ? t : 1.0;
  return c;
}

// Deterministic ordered mean of per-seed values.
double ordered_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

ExperimentReport finish_convergence(ExperimentReport r, const std::vector<std::size_t>& ns,
                                    const std::vector<double>& e) {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    r.metrics["e_N" + std::to_string(ns[i])] = e[i];
    r.series.push_back({{"N", ns[i]}, {"e", e[i]}});
  }
  r.metrics["ratio_last_first"] = e.front() > 0.0 ? e.back() / e.front() : 0.0;
  r.pass = decreasing_and_halved(e);
  return r;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TransformConvergence: return "transform";
    case ExperimentKind::MapConvergence: return "map";
    case ExperimentKind::MomentLaw: return "moment";
    case ExperimentKind::HullScaling: return "hull-scaling";
    case ExperimentKind::SemicircleTheta: return "semicircle";
    case ExperimentKind::FootprintCheck: return "footprint";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::TransformConvergence, ExperimentKind::MapConvergence,
                 ExperimentKind::MomentLaw, ExperimentKind::HullScaling,
                 ExperimentKind::SemicircleTheta, ExperimentKind::FootprintCheck}) {
    if (s == to_string(k)) return k;
  }
  throw DomainError("unknown experiment kind: " + s);
}

double ExperimentReport::metric(const std::string& name) const {
  auto it = metrics.find(name);
  if (it == metrics.end()) throw DomainError("report has no metric " + name);
  return it->second;
}

std::string ExperimentReport::digest() const {
  return hex16(fnv1a(std::string(to_string(kind)) + "|" + params.dump()));
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  return {{"kind", to_string(kind)}, {"params", params},   {"digest", digest()},
          {"metrics", m},            {"series", series},   {"pass", pass},
          {"artifacts", artifacts}};
}

nlohmann::json EnsembleOptions::to_json() const {
  return {{"kappa", kappa}, {"seeds", seeds}, {"seed", seed}, {"dt_base", dt_base}, {"c_gap", c_gap}};
}

bool decreasing_and_halved(const std::vector<double>& e) {
  if (e.size() < 2) return true;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (!(e[i] < e[i - 1])) return false;
  }
  return e.back() <= 0.5 * e.front();
}

std::string write_artifact(const std::string& out_dir, const std::string& stem,
                           const std::string& ext, const std::string& content) {
  const std::string path = out_dir + "/" + stem + "-" + hex16(fnv1a(content)) + "." + ext;
  write_text_file(path, content);
  return path;
}

ExperimentReport run_transform_convergence(const ProbabilityMeasure& base,
                                           const std::vector<std::size_t>& ns, double t,
                                           const std::vector<cplx>& points,
                                           const EnsembleOptions& opts) {
  check_ns(ns);
  check_points(points);
  check_options(opts);
  if (!(t >= 0.0)) throw DomainError("run_transform_convergence: t must be >= 0");
  ExperimentReport r;
  r.kind = ExperimentKind::TransformConvergence;
  r.params = {{"base", base.to_json()}, {"Ns", ns}, {"t", t}, {"points", points_json(points)},
              {"ensemble", opts.to_json()}};
  r.series = nlohmann::json::array();

  const TransportedState limit(base, t);
  std::vector<cplx> target(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) target[j] = transform_at(limit, points[j]);

  std::vector<double> e;
  for (std::size_t n : ns) {
    const SdeConfig cfg = ensemble_config(base, n, t, opts);
    const int seeds = t > 0.0 ? opts.seeds : 1;
    std::vector<double> per_seed(static_cast<std::size_t>(seeds));
    parallel_for(per_seed.size(), [&](std::size_t s) {
      ProbabilityMeasure emp = discretize(base, n);
      if (t > 0.0) {
        SdeConfig c = cfg;
        c.seed = derive_seed(opts.seed, n, s);
        emp = empirical_measure(simulate(c, RecordPolicy{{t}}), t);
      }
      double d = 0.0;
      for (std::size_t j = 0; j < points.size(); ++j) {
        d = std::max(d, std::abs(cauchy_transform(emp, points[j]) - target[j]));
      }
      per_seed[s] = d;
    });
    e.push_back(ordered_mean(per_seed));
  }
  return finish_convergence(std::move(r), ns, e);
}

ExperimentReport run_map_convergence(const ProbabilityMeasure& base,
                                     const std::vector<std::size_t>& ns, double t,
                                     const std::vector<cplx>& grid, const EnsembleOptions& opts) {
  check_ns(ns);
  check_points(grid);
  check_options(opts);
  if (!(t >= 0.0)) throw DomainError("run_map_convergence: t must be >= 0");
  ExperimentReport r;
  r.kind = ExperimentKind::MapConvergence;
  r.params = {{"base", base.to_json()}, {"Ns", ns}, {"t", t}, {"grid", points_json(grid)},
              {"ensemble", opts.to_json()}};
  r.series = nlohmann::json::array();

  std::vector<cplx> target(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) target[j] = limit_map(base, grid[j], t);

  std::vector<double> e;
  for (std::size_t n : ns) {
    if (t == 0.0) {
      e.push_back(0.0);
      continue;
    }
    const SdeConfig cfg = ensemble_config(base, n, t, opts);
    std::vector<double> per_seed(static_cast<std::size_t>(opts.seeds));
    parallel_for(per_seed.size(), [&](std::size_t s) {
      SdeConfig c = cfg;
      c.seed = derive_seed(opts.seed, n, s);
      const DrivingPaths paths = simulate(c);
      double d = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const FlowResult f = flow_map(paths, grid[j], t);
        if (!f.alive()) {
          throw NumericalError("swallowed", "run_map_convergence: grid point swallowed",
                               {{"re", grid[j].real()}, {"im", grid[j].imag()}, {"N", n}});
        }
        d = std::max(d, std::abs(f.value - target[j]));
      }
      per_seed[s] = d;
    });
    e.push_back(ordered_mean(per_seed));
  }
  return finish_convergence(std::move(r), ns, e);
}

ExperimentReport run_moment_law(const SdeConfig& raw, int seeds, std::vector<double> t_grid) {
  const SdeConfig cfg = raw.validated();
  if (seeds < 1) throw DomainError("run_moment_law: seeds must be positive");
  if (cfg.theta != 0.0) throw DomainError("run_moment_law: requires theta = 0");
  const std::size_t n = cfg.n();
  for (double l : cfg.lambdas) {
    if (std::abs(l - 1.0 / static_cast<double>(n)) > 1e-12) {
      throw DomainError("run_moment_law: requires equal weights");
    }
  }
  if (t_grid.empty()) {
    for (int i = 0; i <= 10; ++i) t_grid.push_back(cfg.t_max * i / 10.0);
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0 && t_grid[i] <= cfg.t_max) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw DomainError("run_moment_law: t_grid must increase within [0, t_max]");
    }
  }
  if (t_grid.size() < 2) throw DomainError("run_moment_law: t_grid needs two times");

  ExperimentReport r;
  r.kind = ExperimentKind::MomentLaw;
  r.params = {{"sde", cfg.to_json()}, {"seeds", seeds}, {"t_grid", t_grid}};

  const double tbar = ordered_mean(t_grid);
  double stt = 0.0;
  for (double t : t_grid) stt += (t - tbar) * (t - tbar);

  std::vector<double> slopes(static_cast<std::size_t>(seeds));
  std::vector<std::vector<double>> m2(static_cast<std::size_t>(seeds));
  parallel_for(slopes.size(), [&](std::size_t s) {
    SdeConfig c = cfg;
    c.seed = derive_seed(cfg.seed, s);
    const DrivingPaths p = simulate(c, RecordPolicy{t_grid});
    std::vector<double> v(n), m(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      p.values_at(t_grid[i], v);
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += cfg.lambdas[k] * v[k] * v[k];
      m[i] = acc;
    }
    const double mbar = ordered_mean(m);
    double stm = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) stm += (t_grid[i] - tbar) * (m[i] - mbar);
    slopes[s] = stm / stt;
    m2[s] = std::move(m);
  });

  const double mean = ordered_mean(slopes);
  double var = 0.0;
  for (double x : slopes) var += (x - mean) * (x - mean);
  const double se = seeds > 1 ? std::sqrt(var / (seeds - 1) / seeds) : 0.0;
  const double target = 4.0 + (cfg.kappa - 4.0) / static_cast<double>(n);

  r.metrics["slope"] = mean;
  r.metrics["standard_error"] = se;
  r.metrics["target"] = target;
  r.metrics["deviation"] = std::abs(mean - target);
  r.metrics["tolerance"] = 3.0 * se + 1e-6;
  r.series = nlohmann::json::array();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double acc = 0.0;
    for (const auto& m : m2) acc += m[i];
    r.series.push_back({{"t", t_grid[i]}, {"m2", acc / seeds}});
  }
  r.pass = r.metrics["deviation"] <= r.metrics["tolerance"];
  return r;
}

ExperimentReport run_semicircle_theta(const SdeConfig& raw, double t_long, int seeds) {
  SdeConfig cfg = raw.validated();
  if (!(cfg.theta > 0.0)) throw DomainError("run_semicircle_theta: requires theta > 0");
  if (!(t_long > 0.0)) throw DomainError("run_semicircle_theta: t_long must be positive");
  if (seeds < 1) throw DomainError("run_semicircle_theta: seeds must be positive");
  cfg.t_max = t_long;
  const std::size_t n = cfg.n();

  ExperimentReport r;
  r.kind = ExperimentKind::SemicircleTheta;
  r.params = {{"sde", cfg.to_json()}, {"seeds", seeds}, {"t_long", t_long}};

  std::vector<std::vector<double>> finals(static_cast<std::size_t>(seeds));
  std::vector<double> m2(static_cast<std::size_t>(seeds));
  parallel_for(finals.size(), [&](std::size_t s) {
    SdeConfig c = cfg;
    c.seed = derive_seed(cfg.seed, s);
    const DrivingPaths p = simulate(c, RecordPolicy{{t_long}});
    const auto row = p.row(p.size() - 1);
    finals[s].assign(row.begin(), row.end());
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += cfg.lambdas[k] * row[k] * row[k];
    m2[s] = acc;
  });
  std::vector<double> pooled;
  pooled.reserve(n * finals.size());
  for (const auto& f : finals) pooled.insert(pooled.end(), f.begin(), f.end());

  const double radius = std::sqrt(8.0 / cfg.theta);
  const double ks = kolmogorov_distance(std::move(pooled), ProbabilityMeasure::semicircle(0.0, radius));
  const double m2_mean = ordered_mean(m2);
  const double m2_target = radius * radius / 4.0;
  r.metrics["radius"] = radius;
  r.metrics["kolmogorov"] = ks;
  r.metrics["m2"] = m2_mean;
  r.metrics["m2_target"] = m2_target;
  r.metrics["m2_relative_error"] = std::abs(m2_mean / m2_target - 1.0);
  r.pass = ks <= 0.02 && r.metrics["m2_relative_error"] <= 0.05;
  return r;
}

ExperimentReport run_hull_scaling(const std::vector<std::pair<double, double>>& t_pairs,
                                  int n_columns, const std::string& out_dir) {
  if (t_pairs.empty()) throw DomainError("run_hull_scaling: t_pairs must not be empty");
  ExperimentReport r;
  r.kind = ExperimentKind::HullScaling;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [t, c] : t_pairs) {
    if (!(t > 0.0) || !(c > 0.0)) throw DomainError("run_hull_scaling: t and c must be positive");
    pairs.push_back({t, c});
  }
  r.params = {{"t_pairs", pairs}, {"columns", n_columns}};
  r.series = nlohmann::json::array();
  r.pass = true;
  const ProbabilityMeasure d0 = ProbabilityMeasure::point_mass(0.0);
  for (const auto& [t, c] : t_pairs) {
    const Hull small = hull_boundary(d0, t, n_columns);
    const Hull large = hull_boundary(d0, c * c * t, n_columns);
    double dist = 0.0;
    for (std::size_t j = 0; j < small.boundary.size(); ++j) {
      dist = std::max(dist, std::abs(large.boundary[j] - c * small.boundary[j]));
    }
    const double tol = 2e-3 * c * (1.0 + std::sqrt(t));
    std::ostringstream key;
    key << "t" << t << "_c" << c;
    r.metrics["distance_" + key.str()] = dist;
    r.series.push_back({{"t", t}, {"c", c}, {"distance", dist}, {"tolerance", tol},
                        {"flags", small.flags.size() + large.flags.size()}});
    r.pass = r.pass && dist <= tol;
    if (!out_dir.empty()) {
      for (const Hull* h : {&small, &large}) {
        std::ostringstream csv;
        write_hull_csv(csv, *h);
        r.artifacts.push_back(write_artifact(out_dir, "hull", "csv", csv.str()));
        r.artifacts.push_back(write_artifact(out_dir, "hull", "svg", hull_svg(*h)));
      }
    }
  }
  return r;
}

ExperimentReport run_footprint_check(const std::vector<double>& ts) {
  if (ts.empty()) throw DomainError("run_footprint_check: ts must not be empty");
  ExperimentReport r;
  r.kind = ExperimentKind::FootprintCheck;
  r.params = {{"ts", ts}};
  r.series = nlohmann::json::array();
  const ProbabilityMeasure d0 = ProbabilityMeasure::point_mass(0.0);
  double worst_fp = 0.0, worst_map = 0.0;
  for (double t : ts) {
    const Interval fp = real_footprint(d0, t);
    const auto ref = delta0::oracle_intervals(t);
    const double efp = std::max(std::abs(fp.lo - ref.footprint.lo), std::abs(fp.hi - ref.footprint.hi));
    const double g_hi = limit_map(d0, cplx(fp.hi, 0.0), t).real();
    const double g_lo = limit_map(d0, cplx(fp.lo, 0.0), t).real();
    const double emap = std::max(std::abs(g_hi - ref.support.hi), std::abs(g_lo - ref.support.lo));
    worst_fp = std::max(worst_fp, efp);
    worst_map = std::max(worst_map, emap);
    r.series.push_back({{"t", t}, {"footprint", {fp.lo, fp.hi}}, {"g_endpoints", {g_lo, g_hi}}});
  }
  r.metrics["footprint_error"] = worst_fp;
  r.metrics["endpoint_map_error"] = worst_map;
  r.pass = worst_fp <= 1e-3 && worst_map <= 1e-3;
  return r;
}

}  // namespace msle
