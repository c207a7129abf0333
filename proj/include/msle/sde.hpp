#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"
#include "msle/measure.hpp"

namespace msle {

/// Parameters of the interacting driving-function system
///   dV_k = [sum_{j != k} 2 (l_k + l_j) / (V_k - V_j) - theta V_k] dt + sqrt(kappa l_k) dB_k.
enum class Scheme { Heun, Euler };

struct SdeConfig {
  double kappa = 2.0;
  std::vector<double> lambdas;  // empty: equal weights 1/n
  double theta = 0.0;
  std::vector<double> x0;
  double dt_base = 1e-4;
  double t_max = 1.0;
  std::uint64_t seed = 0;
  double gap_floor = 1e-12;
  /// Gap-adaptive step factor: dt <= c_gap * gap^2 / (2 (l_k + l_j)).
  double c_gap = 0.1;
  /// Euler-Maruyama by default. Heun (predictor-corrector) is weak order 2
  /// for this additive noise and removes the O(dt) bias in moment statistics.
  Scheme scheme = Scheme::Euler;

  std::size_t n() const { return x0.size(); }

  /// Fills defaulted fields (equal weights) and throws DomainError on any
  /// violated invariant.
  SdeConfig validated() const;

  nlohmann::json to_json() const;
  static SdeConfig from_json(const nlohmann::json& j);
};

/// Which stored times simulate() keeps. Empty `observe` stores every accepted
/// step; otherwise steps are clipped to land on each observation time and only
/// those (plus t = 0) are stored.
struct RecordPolicy {
  std::vector<double> observe;
};

/// A time-discretised ensemble of n driving functions, strictly ordered at every
/// stored time. Immutable after construction.
class DrivingPaths {
 public:
  /// `values` is row-major, one row of n values per time.
  DrivingPaths(SdeConfig config, std::vector<double> times, std::vector<double> values);

  /// Deterministic drivers given as samples; weights default to 1/n.
  static DrivingPaths from_samples(std::vector<double> times, std::vector<std::vector<double>> rows,
                                   std::vector<double> lambdas = {});

  std::size_t n() const { return config_.n(); }
  std::size_t size() const { return times_.size(); }
  const SdeConfig& config() const { return config_; }
  std::span<const double> lambdas() const { return config_.lambdas; }
  std::span<const double> times() const { return times_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n(), n()}; }
  double t_end() const { return times_.back(); }

  /// Index i with times[i] <= t < times[i+1] (last interval for t = t_end).
  std::size_t interval_index(double t) const;
  /// Piecewise-linear interpolation of all drivers at time t.
  void values_at(double t, std::span<double> out) const;
  double max_abs_value() const;

  void write_csv(std::ostream& os) const;

 private:
  SdeConfig config_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// prod_{j<k} (x_k - x_j)^{2/kappa}.
double partition_function(std::span<const double> x, double kappa);

std::vector<double> drift(std::span<const double> v, const SdeConfig& cfg);
/// kappa l_k d/dx_k log H + sum_{j != k} 2 l_j / (v_k - v_j), evaluated from the
/// analytic log-gradient of the partition function (theta must be zero).
std::vector<double> drift_from_log_partition(std::span<const double> v, const SdeConfig& cfg);

/// Gap-adaptive stepping with the configured scheme; rejected (order-violating) steps are
/// halved with fresh noise, up to 40 times.
DrivingPaths simulate(const SdeConfig& cfg, const RecordPolicy& record = {});

/// Atoms at the interpolated driver values, weights l_k (zero-weight drivers
/// are omitted).
ProbabilityMeasure empirical_measure(const DrivingPaths& paths, double t);

}  // namespace msle
