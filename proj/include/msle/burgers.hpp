#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "msle/measure.hpp"

// Mean-field limit: M_t solves dM/dt = -2 M dM/dz with M_0 the transform of the
// base measure, and the limit Loewner flow is dg/dt = M_t(g).

namespace msle {

/// M_t for a given base measure at a fixed time.
struct TransportedState {
  ProbabilityMeasure base;
  double t = 0.0;

  TransportedState(ProbabilityMeasure base, double t);
};

/// w in H with z = w + 2t M_0(w) (characteristic preimage of z); damped Newton
/// from w = z, falling back to continuation in t.
cplx solve_shift(const TransportedState& s, cplx z);
/// M_t(z) = M_0(solve_shift(s, z)).
cplx transform_at(const TransportedState& s, cplx z);
/// Real-analytic extension of M_t to real x outside the support of mu_t.
double transform_at_real(const TransportedState& s, double x);

/// h_t(z) from dh/dtau = -M_0(h) / (1 + 2 tau M_0'(h)), h_0 = z.
cplx inverse_char_ode(const ProbabilityMeasure& base, cplx z, double t);

/// g_t(z) = h + 2t M_0(h) with h = inverse_char_ode. Real z (outside the
/// footprint, endpoints included) is handled on the real axis.
cplx limit_map(const ProbabilityMeasure& base, cplx z, double t);
/// Same map by direct integration of dg/dtau = M_tau(g); independent check.
cplx limit_map_direct(const ProbabilityMeasure& base, cplx z, double t);

/// Time -1 / (2 M_0'(x0)) at which the characteristic from x0 meets the support.
double exit_time_real(const ProbabilityMeasure& base, double x0);

/// Outer interval [inf supp mu_t, sup supp mu_t].
Interval support_endpoints(const ProbabilityMeasure& base, double t);

/// Lifetime of the real trajectory started at x0 (0 inside the support hull).
/// Uses the first integral tau(w) M_0(w)^2 = L(x0) - L(w) of the real
/// characteristic ODE: the trajectory dies at the first maximum of tau(w).
double real_lifetime(const ProbabilityMeasure& base, double x0);

/// Closure of K_t on the real line: the x0 with real_lifetime(x0) <= t.
Interval real_footprint(const ProbabilityMeasure& base, double t);

/// Swallowing time of z (first time Im g hits 0), or nullopt if alive at t_max.
std::optional<double> hull_lifetime(const ProbabilityMeasure& base, cplx z, double t_max);

struct Hull {
  double t = 0.0;
  std::vector<cplx> boundary;  // left to right
  Interval footprint;
  std::vector<std::string> flags;

  double max_height() const;
  nlohmann::json to_json() const;
};

/// Boundary heights on n_columns equally spaced columns over the footprint,
/// located by bisection on the lifetime along each column.
Hull hull_boundary(const ProbabilityMeasure& base, double t, int n_columns);

struct LineLifetime {
  double time = 0.0;     // when z0 + 2 t M_0(z0) reaches the real line
  double landing = 0.0;  // where it lands
  bool landing_in_support = false;
};

/// Straight characteristic z0 + 2t M_0(z0) hitting the real line.
LineLifetime line_hull_lifetime(const ProbabilityMeasure& base, cplx z0);

struct MomentFlow {
  std::vector<double> t;
  std::vector<double> m2;
  double max_deviation = 0.0;  // max |m2(t) - m2(0) - 4t|
};

MomentFlow moment_flow_check(const ProbabilityMeasure& base, std::span<const double> t_grid);

/// CSV `x,y`.
void write_hull_csv(std::ostream& os, const Hull& hull);
/// SVG of the boundary over [-4, 4] x [0, 4], scaled by sqrt(t).
std::string hull_svg(const Hull& hull);

}  // namespace msle
