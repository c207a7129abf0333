#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "msle/measure.hpp"
#include "msle/sde.hpp"

namespace msle {

struct FlowResult {
  enum class Status { Alive, Dead };

  Status status = Status::Alive;
  cplx value{};               // g_t(z) when alive
  double swallow_time = 0.0;  // when dead

  bool alive() const { return status == Status::Alive; }
  static FlowResult Alive(cplx v) { return {Status::Alive, v, 0.0}; }
  static FlowResult Dead(double t) { return {Status::Dead, {}, t}; }
};

struct LoewnerOptions {
  /// A trajectory is swallowed once it comes this close to a driver.
  double eps_swallow = 1e-9;
  double rtol = 1e-11;
  double atol = 1e-13;
  /// Step cap c * |g - V_k|^2 / (2 l_k) near the drivers.
  double c_singular = 0.05;
};

/// Solves dg/ds = sum_k 2 l_k / (g - V_k(s)), g(0) = z, up to time t, with the
/// drivers interpolated linearly between stored times.
FlowResult flow_map(const DrivingPaths& paths, cplx z, double t, const LoewnerOptions& opts = {});

/// Swallowing time over [0, t_end]; nullopt when z survives.
std::optional<double> lifetime(const DrivingPaths& paths, cplx z, const LoewnerOptions& opts = {});

/// Runs the same vector field backwards from time t to 0 starting at w, i.e.
/// evaluates the inverse map g_t^{-1}(w).
cplx reverse_flow(const DrivingPaths& paths, cplx w, double t, const LoewnerOptions& opts = {});

/// Slit tips g_t^{-1}(V_k(t)), approximated by reverse flow from V_k(t) + i eps_lift.
std::vector<cplx> trace_tips(const DrivingPaths& paths, double t, double eps_lift = 1e-6,
                             const LoewnerOptions& opts = {});

struct HcapFit {
  double coefficient = 0.0;
  double relative_residual = 0.0;
};

/// Fits g_t(z) - z = sum_{m=1}^{4} c_m z^{-m} on 8 points of the upper half of
/// |z| = 100 (1 + max |V|) and reports Re c_1, which equals 2t for a
/// hydrodynamically normalised flow.
HcapFit fit_hcap(const DrivingPaths& paths, double t, const LoewnerOptions& opts = {});
double hcap_coefficient(const DrivingPaths& paths, double t, const LoewnerOptions& opts = {});

struct TipSample {
  std::size_t k = 0;
  double t = 0.0;
  cplx tip{};
};

std::vector<TipSample> tip_history(const DrivingPaths& paths, std::span<const double> times,
                                   double eps_lift = 1e-6, const LoewnerOptions& opts = {});

struct LifetimeSample {
  cplx z{};
  std::optional<double> lifetime;
};

std::vector<LifetimeSample> lifetime_grid(const DrivingPaths& paths, std::span<const double> re,
                                          std::span<const double> im,
                                          const LoewnerOptions& opts = {});

/// CSV `k,t,re,im`.
void write_tips_csv(std::ostream& os, std::span<const TipSample> tips);
/// CSV `re,im,lifetime`; survivors are written as `inf`.
void write_lifetime_csv(std::ostream& os, std::span<const LifetimeSample> grid);

}  // namespace msle
