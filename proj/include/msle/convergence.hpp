#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "msle/measure.hpp"
#include "msle/sde.hpp"

// Ensemble experiments comparing the particle system with its mean-field limit.

namespace msle {

enum class ExperimentKind {
  TransformConvergence,
  MapConvergence,
  MomentLaw,
  HullScaling,
  SemicircleTheta,
  FootprintCheck
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::TransformConvergence;
  nlohmann::json params;
  std::map<std::string, double> metrics;
  nlohmann::json series;  // per-N / per-t detail
  bool pass = false;
  std::vector<std::string> artifacts;

  double metric(const std::string& name) const;
  /// Hash of kind and params; equal digests reproduce identical reports.
  std::string digest() const;
  nlohmann::json to_json() const;
};

struct EnsembleOptions {
  double kappa = 2.0;
  int seeds = 50;
  std::uint64_t seed = 0;
  double dt_base = 1e-3;
  double c_gap = 0.1;

  nlohmann::json to_json() const;
};

/// e(N) = seed-mean of max_j |M_emp(z_j) - M_t(z_j)| for N equal-weight
/// particles started from the discretised base.
ExperimentReport run_transform_convergence(const ProbabilityMeasure& base,
                                           const std::vector<std::size_t>& ns, double t,
                                           const std::vector<cplx>& points,
                                           const EnsembleOptions& opts = {});

/// e(N) = seed-mean of max_j |g^N_t(z_j) - g_t(z_j)|.
ExperimentReport run_map_convergence(const ProbabilityMeasure& base,
                                     const std::vector<std::size_t>& ns, double t,
                                     const std::vector<cplx>& grid,
                                     const EnsembleOptions& opts = {});

/// Per-seed OLS slope of sum_k l_k V_k^2 over t_grid against 4 + (kappa - 4)/N.
/// Requires equal weights and theta = 0. Empty t_grid means {0, 0.1, ..., t_max}.
ExperimentReport run_moment_law(const SdeConfig& cfg, int seeds, std::vector<double> t_grid = {});

/// Pooled final positions at t_long against the semicircle of radius sqrt(8/theta).
ExperimentReport run_semicircle_theta(const SdeConfig& cfg, double t_long, int seeds);

/// max column distance between K_{c^2 t} and c K_t for the point mass at 0.
/// Writes CSV/SVG artifacts to out_dir when it is non-empty.
ExperimentReport run_hull_scaling(const std::vector<std::pair<double, double>>& t_pairs,
                                  int n_columns = 64, const std::string& out_dir = "");

/// Real footprint and endpoint images for the point mass against closed forms.
ExperimentReport run_footprint_check(const std::vector<double>& ts);

/// True when the sequence strictly decreases and the last value is at most
/// half of the first. A single value passes vacuously.
bool decreasing_and_halved(const std::vector<double>& e);

/// Writes `content` to out_dir/stem-<hash>.ext and returns the path.
std::string write_artifact(const std::string& out_dir, const std::string& stem,
                           const std::string& ext, const std::string& content);

}  // namespace msle
