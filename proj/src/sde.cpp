#include "msle/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <limits>
#include <numeric>
#include <ostream>

#include "msle/error.hpp"
#include "msle/io.hpp"
#include "msle/rng.hpp"

namespace msle {

namespace {

constexpr int kMaxHalvings = 40;

// out[k] = sum_{j != k} 2 (l_k + l_j) / (v_k - v_j) - theta v_k, O(n^2) with the
// antisymmetric pair term evaluated once.
void accumulate_drift(const double* v, const double* lam, double theta, std::size_t n,
                      double* out) {
  for (std::size_t k = 0; k < n; ++k) out[k] = -theta * v[k];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double vk = v[k];
    const double lk = lam[k];
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = k + 1; j < n; ++j) {
      const double f = 2.0 * (lk + lam[j]) / (v[j] - vk);
      acc += f;
      out[j] += f;
    }
    out[k] -= acc;
  }
}

void check_ordering(std::span<const double> v, double gap_floor, const char* op) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) throw DomainError(std::string(op) + ": non-finite position");
    if (k > 0 && !(v[k] - v[k - 1] >= gap_floor)) {
      throw NumericalError("collision", std::string(op) + ": gap below floor",
                           {{"index", k - 1}, {"gap", v[k] - v[k - 1]}, {"gap_floor", gap_floor}});
    }
  }
}

}  // namespace

SdeConfig SdeConfig::validated() const {
  SdeConfig c = *this;
  const std::size_t n = c.x0.size();
  if (n == 0) throw DomainError("sde config: x0 must contain at least one point");
  if (!(c.kappa >= 0.0 && c.kappa <= 4.0)) {
    throw DomainError("sde config: kappa must lie in [0, 4]", {{"kappa", c.kappa}});
  }
  if (c.lambdas.empty()) c.lambdas.assign(n, 1.0 / static_cast<double>(n));
  if (c.lambdas.size() != n) {
    throw DomainError("sde config: lambdas must have one entry per particle",
                      {{"n", n}, {"lambdas", c.lambdas.size()}});
  }
  double total = 0.0;
  for (double l : c.lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw DomainError("sde config: each lambda must lie in [0, 1]");
    total += l;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("sde config: lambdas must sum to one", {{"sum", total}});
  }
  if (!(c.theta >= 0.0)) throw DomainError("sde config: theta must be >= 0");
  if (!(c.dt_base > 0.0) || !(c.t_max > 0.0) || !(c.gap_floor > 0.0) || !(c.c_gap > 0.0)) {
    throw DomainError("sde config: dt_base, t_max, gap_floor and c_gap must be positive");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(c.x0[k])) throw DomainError("sde config: non-finite starting point");
    if (k > 0 && !(c.x0[k] > c.x0[k - 1])) {
      throw DomainError("sde config: x0 must be strictly increasing", {{"index", k}});
    }
  }
  return c;
}

nlohmann::json SdeConfig::to_json() const {
  return {{"kappa", kappa}, {"lambdas", lambdas}, {"theta", theta},   {"x0", x0},
          {"dt_base", dt_base}, {"t_max", t_max}, {"seed", seed}, {"gap_floor", gap_floor},
          {"c_gap", c_gap}, {"scheme", scheme == Scheme::Heun ? "heun" : "euler"}};
}

SdeConfig SdeConfig::from_json(const nlohmann::json& j) {
  SdeConfig c;
  try {
    c.kappa = j.value("kappa", c.kappa);
    c.lambdas = j.value("lambdas", c.lambdas);
    c.theta = j.value("theta", c.theta);
    c.x0 = j.at("x0").get<std::vector<double>>();
    c.dt_base = j.value("dt_base", c.dt_base);
    c.t_max = j.value("t_max", c.t_max);
    c.seed = j.value("seed", c.seed);
    c.gap_floor = j.value("gap_floor", c.gap_floor);
    c.c_gap = j.value("c_gap", c.c_gap);
    const std::string scheme = j.value("scheme", std::string("euler"));
    if (scheme == "heun") {
      c.scheme = Scheme::Heun;
    } else if (scheme == "euler") {
      c.scheme = Scheme::Euler;
    } else {
      throw DomainError("sde config: scheme must be heun or euler", {{"scheme", scheme}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("sde config json: ") + e.what());
  }
  return c;
}

DrivingPaths::DrivingPaths(SdeConfig config, std::vector<double> times, std::vector<double> values)
    : config_(config.validated()), times_(std::move(times)), values_(std::move(values)) {
  const std::size_t n = config_.n();
  if (times_.empty() || times_.front() != 0.0) {
    throw DomainError("driving paths: times must start at 0");
  }
  if (values_.size() != times_.size() * n) {
    throw DomainError("driving paths: value table does not match times x n");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw DomainError("driving paths: times must be strictly increasing", {{"index", i}});
    }
    auto r = row(i);
    for (std::size_t k = 1; k < n; ++k) {
      if (!(r[k] > r[k - 1])) {
        throw DomainError("driving paths: values must be strictly increasing at every time",
                          {{"time", times_[i]}, {"index", k}});
      }
    }
  }
}

DrivingPaths DrivingPaths::from_samples(std::vector<double> times,
                                        std::vector<std::vector<double>> rows,
                                        std::vector<double> lambdas) {
  if (rows.empty() || rows.size() != times.size()) {
    throw DomainError("driving paths: one row per time required");
  }
  SdeConfig cfg;
  cfg.kappa = 0.0;
  cfg.x0 = rows.front();
  cfg.lambdas = std::move(lambdas);
  cfg.t_max = times.back() > 0.0 ? times.back() : 1.0;
  std::vector<double> values;
  values.reserve(rows.size() * cfg.x0.size());
  for (const auto& r : rows) {
    if (r.size() != cfg.x0.size()) throw DomainError("driving paths: ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return DrivingPaths(std::move(cfg), std::move(times), std::move(values));
}

std::size_t DrivingPaths::interval_index(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times_.begin());
  if (i == 0) return 0;
  i -= 1;
  if (i + 1 >= times_.size()) i = times_.size() >= 2 ? times_.size() - 2 : 0;
  return i;
}

void DrivingPaths::values_at(double t, std::span<double> out) const {
  if (times_.size() == 1) {
    std::copy_n(values_.begin(), n(), out.begin());
    return;
  }
  const std::size_t i = interval_index(t);
  const double t0 = times_[i], t1 = times_[i + 1];
  const double s = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  auto a = row(i);
  auto b = row(i + 1);
  for (std::size_t k = 0; k < n(); ++k) out[k] = a[k] + s * (b[k] - a[k]);
}

double DrivingPaths::max_abs_value() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void DrivingPaths::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t k = 0; k < n(); ++k) os << ",V" << (k + 1);
  os << '\n';
  for (std::size_t i = 0; i < times_.size(); ++i) {
    os << fmt17(times_[i]);
    for (double v : row(i)) os << ',' << fmt17(v);
    os << '\n';
  }
}

double partition_function(std::span<const double> x, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("partition_function: kappa must be positive");
  double log_h = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k > 0 && !(x[k] > x[k - 1])) {
      throw DomainError("partition_function: points must be strictly increasing", {{"index", k}});
    }
    for (std::size_t j = 0; j < k; ++j) log_h += std::log(x[k] - x[j]);
  }
  return std::exp(2.0 / kappa * log_h);
}

std::vector<double> drift(std::span<const double> v, const SdeConfig& cfg) {
  if (v.size() != cfg.lambdas.size()) throw DomainError("drift: lambdas do not match positions");
  check_ordering(v, cfg.gap_floor, "drift");
  std::vector<double> out(v.size());
  accumulate_drift(v.data(), cfg.lambdas.data(), cfg.theta, v.size(), out.data());
  return out;
}

std::vector<double> drift_from_log_partition(std::span<const double> v, const SdeConfig& cfg) {
  if (v.size() != cfg.lambdas.size()) throw DomainError("drift: lambdas do not match positions");
  if (cfg.theta != 0.0) throw DomainError("drift_from_log_partition: requires theta = 0");
  if (!(cfg.kappa > 0.0)) throw DomainError("drift_from_log_partition: requires kappa > 0");
  check_ordering(v, cfg.gap_floor, "drift_from_log_partition");
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double grad_log_h = 0.0;
    double loewner = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      grad_log_h += 2.0 / cfg.kappa / (v[k] - v[j]);
      loewner += 2.0 * cfg.lambdas[j] / (v[k] - v[j]);
    }
    out[k] = cfg.kappa * cfg.lambdas[k] * grad_log_h + loewner;
  }
  return out;
}

DrivingPaths simulate(const SdeConfig& raw, const RecordPolicy& record) {
  const SdeConfig cfg = raw.validated();
  const std::size_t n = cfg.n();

  std::vector<double> observe = record.observe;
  std::sort(observe.begin(), observe.end());
  observe.erase(std::unique(observe.begin(), observe.end()), observe.end());
  for (double t : observe) {
    if (!(t >= 0.0 && t <= cfg.t_max)) {
      throw DomainError("simulate: observation time outside [0, t_max]", {{"t", t}});
    }
  }
  const bool store_all = observe.empty();
  if (store_all || observe.back() < cfg.t_max) observe.push_back(cfg.t_max);

  std::vector<NormalStream> streams;
  streams.reserve(n);
  for (std::size_t k = 0; k < n; ++k) streams.emplace_back(derive_seed(cfg.seed, k));

  std::vector<double> noise_scale(n);
  for (std::size_t k = 0; k < n; ++k) noise_scale[k] = std::sqrt(cfg.kappa * cfg.lambdas[k]);
  const bool noisy = cfg.kappa > 0.0;

  std::vector<double> v = cfg.x0;
  std::vector<double> a(n), a2(n), trial(n), xi(n);
  const bool heun = cfg.scheme == Scheme::Heun;
  auto ordered = [&](const std::vector<double>& x) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(x[k]) || (k > 0 && !(x[k] - x[k - 1] >= cfg.gap_floor))) return false;
    }
    return true;
  };
  std::vector<double> times{0.0};
  std::vector<double> values(v);

  double t = 0.0;
  std::size_t next_obs = 0;
  while (next_obs < observe.size() && observe[next_obs] <= 0.0) ++next_obs;

  while (next_obs < observe.size()) {
    const double target = observe[next_obs];
    accumulate_drift(v.data(), cfg.lambdas.data(), cfg.theta, n, a.data());

    double dt = cfg.dt_base;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double gap = v[k + 1] - v[k];
      const double coupling = 2.0 * (cfg.lambdas[k] + cfg.lambdas[k + 1]);
      if (coupling > 0.0) dt = std::min(dt, cfg.c_gap * gap * gap / coupling);
    }
    if (cfg.theta > 0.0) dt = std::min(dt, 0.1 / cfg.theta);
    bool lands = false;
    if (t + dt >= target) {
      dt = target - t;
      lands = true;
    }

    int halvings = 0;
    while (true) {
      const double sq = std::sqrt(dt);
      if (noisy) {
        for (std::size_t k = 0; k < n; ++k) xi[k] = streams[k].next();
      }
      for (std::size_t k = 0; k < n; ++k) {
        trial[k] = v[k] + a[k] * dt + (noisy ? noise_scale[k] * sq * xi[k] : 0.0);
      }
      bool ok = ordered(trial);
      if (ok && heun) {
        accumulate_drift(trial.data(), cfg.lambdas.data(), cfg.theta, n, a2.data());
        for (std::size_t k = 0; k < n; ++k) {
          trial[k] = v[k] + 0.5 * (a[k] + a2[k]) * dt + (noisy ? noise_scale[k] * sq * xi[k] : 0.0);
        }
        ok = ordered(trial);
      }
      if (ok) break;
      if (++halvings > kMaxHalvings) {
        std::size_t bad = 0;
        for (std::size_t k = 1; k < n; ++k) {
          if (!(trial[k] - trial[k - 1] >= cfg.gap_floor)) {
            bad = k - 1;
            break;
          }
        }
        throw NumericalError("collision", "simulate: ordering violation unresolved after 40 halvings",
                             {{"t", t}, {"indices", {bad, bad + 1}}, {"dt", dt}});
      }
      dt *= 0.5;
      lands = false;
    }

    v.swap(trial);
    t = lands ? target : t + dt;
    if (lands) ++next_obs;
    if (store_all || lands) {
      times.push_back(t);
      values.insert(values.end(), v.begin(), v.end());
    }
  }
  return DrivingPaths(cfg, std::move(times), std::move(values));
}

ProbabilityMeasure empirical_measure(const DrivingPaths& paths, double t) {
  if (!(t >= 0.0 && t <= paths.t_end())) {
    throw DomainError("empirical_measure: time outside the simulated range", {{"t", t}});
  }
  std::vector<double> v(paths.n());
  paths.values_at(t, v);
  std::vector<double> atoms, weights;
  for (std::size_t k = 0; k < paths.n(); ++k) {
    if (paths.lambdas()[k] > 0.0) {
      atoms.push_back(v[k]);
      weights.push_back(paths.lambdas()[k]);
    }
  }
  return ProbabilityMeasure::atomic(std::move(atoms), std::move(weights));
}

}  // namespace msle
