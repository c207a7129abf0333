#include "msle/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "msle/detail/dopri.hpp"
#include "msle/error.hpp"
#include "msle/io.hpp"
#include "msle/parallel.hpp"

namespace msle {

namespace {

using detail::deriv_unchecked;
using detail::transform_unchecked;

void require_upper(cplx z, const char* op) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError(std::string(op) + ": requires Im z > 0", {{"re", z.real()}, {"im", z.imag()}});
  }
}

void require_time(double t, const char* op, bool strict) {
  if (!std::isfinite(t) || (strict ? !(t > 0.0) : !(t >= 0.0))) {
    throw DomainError(std::string(op) + (strict ? ": requires t > 0" : ": requires t >= 0"),
                      {{"t", t}});
  }
}

// Root of f on [a, b] given a sign change.
template <typename F>
double bracketed_root(F f, double a, double b, const char* op) {
  const double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(fa * fb < 0.0)) {
    throw NumericalError("bracket", std::string(op) + ": root not bracketed",
                         {{"a", a}, {"b", b}, {"fa", fa}, {"fb", fb}});
  }
  std::uintmax_t iters = 300;
  const auto r = boost::math::tools::toms748_solve(
      f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// Characteristic shift z = w + 2t M_0(w).

struct NewtonState {
  cplx w;
  double residual;
  bool converged;
  int iterations;
};

NewtonState newton_shift(const ProbabilityMeasure& m, double t, cplx z, cplx w, int max_iter) {
  const double tol = 1e-12 * (1.0 + std::abs(z));
  auto F = [&](cplx v) { return v + 2.0 * t * transform_unchecked(m, v) - z; };
  cplx f = F(w);
  double res = std::abs(f);
  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) return {w, res, true, it};
    const cplx step = f / (1.0 + 2.0 * t * deriv_unchecked(m, w));
    double lam = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, lam *= 0.5) {
      const cplx wn = w - lam * step;
      if (!(wn.imag() > z.imag()) || !std::isfinite(wn.real()) || !std::isfinite(wn.imag())) continue;
      const cplx fn = F(wn);
      const double rn = std::abs(fn);
      if (rn < res || (lam == 1.0 && rn <= tol)) {
        w = wn;
        f = fn;
        res = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return {w, res, res <= tol, it};
  }
  return {w, res, res <= tol, max_iter};
}

cplx shift_impl(const ProbabilityMeasure& m, double t, cplx z) {
  if (t == 0.0) return z;
  NewtonState st = newton_shift(m, t, z, z, 200);
  if (st.converged) return st.w;
  // Continuation in t from the identity at t = 0.
  for (int pieces : {8, 64}) {
    cplx w = z;
    bool ok = true;
    for (int k = 1; k <= pieces && ok; ++k) {
      NewtonState s = newton_shift(m, t * k / pieces, z, w, 200);
      w = s.w;
      ok = s.converged || k < pieces;
      st = s;
    }
    if (st.converged) return st.w;
  }
  throw NumericalError("newton", "solve_shift: Newton iteration did not converge",
                       {{"re", z.real()}, {"im", z.imag()}, {"t", t}, {"residual", st.residual}});
}

cplx transform_impl(const ProbabilityMeasure& m, double t, cplx z) {
  return transform_unchecked(m, shift_impl(m, t, z));
}

// ---------------------------------------------------------------------------
// Real axis, right of the support. Left-side quantities use the reflection.

double exit_time(const ProbabilityMeasure& m, double x0) {
  return -1.0 / (2.0 * cauchy_transform_deriv_real(m, x0));
}

// Smallest offset d > 0 to try right of the support edge b.
double min_offset(double b) { return 4e-16 * std::max(1.0, std::abs(b)); }

struct Edge {
  double w;  // characteristic foot with exit time t
  double s;  // sup supp mu_t
};

Edge right_edge(const ProbabilityMeasure& m, double t) {
  const double b = m.support().hi;
  auto f = [&](double x) { return exit_time(m, x) - t; };
  double lo = 1.0, hi = 1.0;
  while (f(b + lo) >= 0.0) {
    lo *= 0.5;
    if (lo < min_offset(b)) {
      throw NumericalError("bracket", "support_endpoints: t below resolvable scale", {{"t", t}});
    }
  }
  while (f(b + hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("bracket", "support_endpoints: no upper bracket", {{"t", t}});
  }
  const double w = bracketed_root(f, b + lo, b + hi, "support_endpoints");
  return {w, w + 2.0 * t * cauchy_transform_real(m, w)};
}

struct Peak {
  double w;    // preimage at death
  double tau;  // lifetime
};

// Along the real characteristic from x0 the preimage w decreases and
// tau(w) M_0(w)^2 = L(x0) - L(w); death is the first maximum of tau(w).
Peak lifetime_peak(const ProbabilityMeasure& m, double x0) {
  const double b = m.support().hi;
  const double l0 = log_potential_real(m, x0);
  auto tau = [&](double w) {
    const double mw = cauchy_transform_real(m, w);
    return (l0 - log_potential_real(m, w)) / (mw * mw);
  };
  auto dfun = [&](double w) { return 1.0 + 2.0 * tau(w) * cauchy_transform_deriv_real(m, w); };
  const double u0 = x0 - b;
  constexpr int kScan = 600;
  const double ratio = std::pow(1e-14, 1.0 / kScan);
  double prev = x0;
  double u = u0;
  for (int j = 1; j <= kScan; ++j) {
    u *= ratio;
    const double w = b + u;
    if (!(w > b)) break;
    if (dfun(w) <= 0.0) {
      const double wp = bracketed_root(dfun, w, prev, "real_lifetime");
      return {wp, tau(wp)};
    }
    prev = w;
  }
  throw NumericalError("bracket", "real_lifetime: no turning point found", {{"x0", x0}});
}

double real_lifetime_right(const ProbabilityMeasure& m, double x0) {
  return lifetime_peak(m, x0).tau;
}

double footprint_right(const ProbabilityMeasure& m, double t) {
  const double b = m.support().hi;
  auto f = [&](double x) { return real_lifetime_right(m, x) - t; };
  double lo = 1.0, hi = 1.0;
  while (f(b + lo) >= 0.0) {
    lo *= 0.5;
    if (lo < 1e3 * min_offset(b)) {
      throw NumericalError("bracket", "real_footprint: t below resolvable scale", {{"t", t}});
    }
  }
  while (f(b + hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("bracket", "real_footprint: no upper bracket", {{"t", t}});
  }
  return bracketed_root(f, b + lo, b + hi, "real_footprint");
}

// g_t(x0) for real x0 right of the footprint (or on its endpoint).
double limit_map_right(const ProbabilityMeasure& m, double x0, double t) {
  const Peak pk = lifetime_peak(m, x0);
  if (t > pk.tau * (1.0 + 1e-6) + 1e-14) {
    throw DomainError("limit_map: real point swallowed before t",
                      {{"x", x0}, {"t", t}, {"lifetime", pk.tau}});
  }
  double w = pk.w;
  if (t < pk.tau) {
    const double l0 = log_potential_real(m, x0);
    auto f = [&](double v) {
      const double mv = cauchy_transform_real(m, v);
      return (l0 - log_potential_real(m, v)) / (mv * mv) - t;
    };
    w = t == 0.0 ? x0 : bracketed_root(f, pk.w, x0, "limit_map");
  }
  return w + 2.0 * t * cauchy_transform_real(m, w);
}

// ---------------------------------------------------------------------------
// Inverse characteristic ODE.

struct AndiResult {
  cplx h;
  double tau;
  bool crossed;
};

AndiResult andi_integrate(const ProbabilityMeasure& m, cplx z, double t_end, bool stop_on_cross) {
  constexpr double rtol = 1e-12, atol = 1e-14;
  auto rhs = [&](double tau, cplx h) {
    return -transform_unchecked(m, h) / (1.0 + 2.0 * tau * deriv_unchecked(m, h));
  };
  auto im_g = [&](double tau, cplx h) {
    return (h + 2.0 * tau * transform_unchecked(m, h)).imag();
  };
  double tau = 0.0;
  cplx h = z;
  double step = std::min(t_end, 1e-3 * (1.0 + z.imag() * z.imag()));
  while (tau < t_end) {
    const double remaining = t_end - tau;
    const double hs = std::min(step, remaining);
    if (hs < 1e-15 * std::max(1.0, tau)) {
      throw NumericalError("andi_stall", "inverse characteristic ODE cannot advance",
                           {{"tau", tau}, {"re", h.real()}, {"im", h.imag()}});
    }
    const auto r = detail::dopri5_step(rhs, tau, h, hs, rtol, atol);
    if (!(r.error <= 1.0) || !std::isfinite(r.y.real()) || !std::isfinite(r.y.imag()) ||
        !(r.y.imag() > 0.0)) {
      step = std::isfinite(r.error) ? std::min(detail::next_step(hs, r.error), 0.5 * hs) : 0.25 * hs;
      continue;
    }
    const double tau_new = hs == remaining ? t_end : tau + hs;
    if (std::abs(1.0 + 2.0 * tau_new * deriv_unchecked(m, r.y)) < 1e-10) {
      throw NumericalError("andi_singular", "inverse characteristic ODE: denominator vanished",
                           {{"tau", tau_new}, {"re", r.y.real()}, {"im", r.y.imag()}});
    }
    if (stop_on_cross && !(im_g(tau_new, r.y) > 0.0)) {
      double lo = 0.0, hi = hs;
      for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, tau); ++it) {
        const double mid = 0.5 * (lo + hi);
        const cplx y = detail::dopri5_step(rhs, tau, h, mid, rtol, atol).y;
        if (im_g(tau + mid, y) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return {h, tau + 0.5 * (lo + hi), true};
    }
    tau = tau_new;
    h = r.y;
    step = detail::next_step(hs, r.error);
  }
  return {h, tau, false};
}

bool dead_by(const ProbabilityMeasure& m, cplx z, double t) {
  try {
    return andi_integrate(m, z, t, true).crossed;
  } catch (const NumericalError&) {
    // Only reachable at the real turning point, i.e. at the moment of death.
    return true;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

TransportedState::TransportedState(ProbabilityMeasure b, double time) : base(std::move(b)), t(time) {
  require_time(t, "TransportedState", false);
}

cplx solve_shift(const TransportedState& s, cplx z) {
  require_upper(z, "solve_shift");
  return shift_impl(s.base, s.t, z);
}

cplx transform_at(const TransportedState& s, cplx z) {
  require_upper(z, "transform_at");
  return transform_impl(s.base, s.t, z);
}

double transform_at_real(const TransportedState& s, double x) {
  const Interval supp = support_endpoints(s.base, s.t);
  if (supp.contains(x)) {
    throw DomainError("transform_at_real: x lies in the support of mu_t",
                      {{"x", x}, {"lo", supp.lo}, {"hi", supp.hi}});
  }
  if (s.t == 0.0) return cauchy_transform_real(s.base, x);
  const bool right = x > supp.hi;
  const ProbabilityMeasure m = right ? s.base : s.base.reflected();
  const double xr = right ? x : -x;
  const Edge e = right_edge(m, s.t);
  auto f = [&](double w) { return w + 2.0 * s.t * cauchy_transform_real(m, w) - xr; };
  const double w = bracketed_root(f, e.w, xr, "transform_at_real");
  const double v = cauchy_transform_real(m, w);
  return right ? v : -v;
}

cplx inverse_char_ode(const ProbabilityMeasure& base, cplx z, double t) {
  require_upper(z, "inverse_char_ode");
  require_time(t, "inverse_char_ode", false);
  if (t == 0.0) return z;
  return andi_integrate(base, z, t, false).h;
}

cplx limit_map(const ProbabilityMeasure& base, cplx z, double t) {
  require_time(t, "limit_map", false);
  if (z.imag() == 0.0 && std::isfinite(z.real())) {
    const Interval supp = base.support();
    if (t == 0.0 && !supp.contains(z.real())) return z;
    if (z.real() > supp.hi) return limit_map_right(base, z.real(), t);
    if (z.real() < supp.lo) return -limit_map_right(base.reflected(), -z.real(), t);
    throw DomainError("limit_map: real point inside the support", {{"x", z.real()}});
  }
  require_upper(z, "limit_map");
  if (t == 0.0) return z;
  if (dead_by(base, z, t)) {
    throw DomainError("limit_map: z swallowed before t", {{"re", z.real()}, {"im", z.imag()}, {"t", t}});
  }
  const cplx h = andi_integrate(base, z, t, false).h;
  return h + 2.0 * t * transform_unchecked(base, h);
}

cplx limit_map_direct(const ProbabilityMeasure& base, cplx z, double t) {
  require_upper(z, "limit_map_direct");
  require_time(t, "limit_map_direct", false);
  constexpr double rtol = 1e-12, atol = 1e-14;
  auto rhs = [&](double tau, cplx g) {
    if (!(g.imag() > 0.0)) return cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    return transform_impl(base, tau, g);
  };
  double tau = 0.0;
  cplx g = z;
  double step = std::min(t, 1e-3 * (1.0 + z.imag() * z.imag()));
  while (tau < t) {
    const double remaining = t - tau;
    const double hs = std::min(step, remaining);
    if (hs < 1e-15 * std::max(1.0, tau)) {
      throw DomainError("limit_map_direct: z swallowed before t",
                        {{"re", z.real()}, {"im", z.imag()}, {"tau", tau}});
    }
    const auto r = detail::dopri5_step(rhs, tau, g, hs, rtol, atol);
    if (!(r.error <= 1.0) || !std::isfinite(r.y.real()) || !std::isfinite(r.y.imag()) ||
        !(r.y.imag() > 0.0)) {
      step = std::isfinite(r.error) ? std::min(detail::next_step(hs, r.error), 0.5 * hs) : 0.25 * hs;
      continue;
    }
    tau = hs == remaining ? t : tau + hs;
    g = r.y;
    step = detail::next_step(hs, r.error);
  }
  return g;
}

double exit_time_real(const ProbabilityMeasure& base, double x0) {
  if (!(base.distance_to_support(x0) > 0.0) || !std::isfinite(x0)) {
    throw DomainError("exit_time_real: x0 must lie outside the support", {{"x0", x0}});
  }
  return exit_time(base, x0);
}

Interval support_endpoints(const ProbabilityMeasure& base, double t) {
  require_time(t, "support_endpoints", true);
  const double hi = right_edge(base, t).s;
  const double lo = -right_edge(base.reflected(), t).s;
  return {lo, hi};
}

double real_lifetime(const ProbabilityMeasure& base, double x0) {
  if (!std::isfinite(x0)) throw DomainError("real_lifetime: x0 must be finite");
  const Interval supp = base.support();
  if (x0 > supp.hi) return real_lifetime_right(base, x0);
  if (x0 < supp.lo) return real_lifetime_right(base.reflected(), -x0);
  return 0.0;
}

Interval real_footprint(const ProbabilityMeasure& base, double t) {
  require_time(t, "real_footprint", true);
  return {-footprint_right(base.reflected(), t), footprint_right(base, t)};
}

std::optional<double> hull_lifetime(const ProbabilityMeasure& base, cplx z, double t_max) {
  require_upper(z, "hull_lifetime");
  require_time(t_max, "hull_lifetime", false);
  const AndiResult r = andi_integrate(base, z, t_max, true);
  if (!r.crossed) return std::nullopt;
  return r.tau;
}

// ---------------------------------------------------------------------------

double Hull::max_height() const {
  double m = 0.0;
  for (const cplx& p : boundary) m = std::max(m, p.imag());
  return m;
}

nlohmann::json Hull::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const cplx& p : boundary) pts.push_back({p.real(), p.imag()});
  return {{"t", t},
          {"footprint", {footprint.lo, footprint.hi}},
          {"flags", flags},
          {"columns", boundary.size()},
          {"max_height", max_height()},
          {"boundary", pts}};
}

Hull hull_boundary(const ProbabilityMeasure& base, double t, int n_columns) {
  require_time(t, "hull_boundary", true);
  if (n_columns < 8) throw DomainError("hull_boundary: n_columns must be at least 8", {{"n_columns", n_columns}});
  Hull hull;
  hull.t = t;
  hull.footprint = real_footprint(base, t);
  const std::size_t n = static_cast<std::size_t>(n_columns);
  hull.boundary.assign(n, cplx{});
  std::vector<std::string> column_flags(n);
  const double scale = std::sqrt(t);
  const double width = hull.footprint.width();
  // Im g^2 drops by at most 4t, so anything above 2 sqrt(t) survives.
  const double y_top = 2.0 * scale * (1.0 + 1e-9) + 1e-12;
  const double tol = 1e-10 * std::max(1.0, scale);

  parallel_for(n, [&](std::size_t j) {
    const double x = j + 1 == n ? hull.footprint.hi
                                : hull.footprint.lo + width * static_cast<double>(j) / (n - 1);
    if (j == 0 || j + 1 == n) {
      hull.boundary[j] = {x, 0.0};
      return;
    }
    auto dead = [&](double y) { return dead_by(base, cplx(x, y), t); };
    double hi = y_top;
    double lo = 1e-3 * scale;
    while (!dead(lo) && lo > 1e-12 * scale) lo *= 0.1;
    bool valid = dead(lo) && !dead(hi);
    // Spot check of monotonicity below the bracket top.
    if (valid && !dead(0.5 * lo)) valid = false;
    if (!valid) {
      // Scan the column and keep the highest dead-to-alive transition.
      column_flags[j] = "non_monotone_column";
      constexpr int kScan = 2000;
      double best = -1.0;
      for (int k = kScan; k >= 1; --k) {
        const double y = y_top * k / kScan;
        if (dead(y)) {
          best = y;
          break;
        }
      }
      if (best < 0.0) {
        hull.boundary[j] = {x, 0.0};
        return;
      }
      lo = best;
      hi = std::min(y_top, best + y_top / kScan);
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (dead(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    hull.boundary[j] = {x, 0.5 * (lo + hi)};
  });
  for (std::size_t j = 0; j < n; ++j) {
    if (!column_flags[j].empty()) hull.flags.push_back(column_flags[j] + ":" + std::to_string(j));
  }
  return hull;
}

LineLifetime line_hull_lifetime(const ProbabilityMeasure& base, cplx z0) {
  require_upper(z0, "line_hull_lifetime");
  const cplx m = cauchy_transform(base, z0);
  if (!(m.imag() < 0.0)) throw DomainError("line_hull_lifetime: requires Im M_0(z0) < 0");
  LineLifetime out;
  out.time = -z0.imag() / (2.0 * m.imag());
  out.landing = (z0 + 2.0 * out.time * m).real();
  const Interval supp = support_endpoints(base, out.time);
  const double slack = 1e-9 * (1.0 + std::abs(out.landing));
  out.landing_in_support = out.landing >= supp.lo - slack && out.landing <= supp.hi + slack;
  return out;
}

MomentFlow moment_flow_check(const ProbabilityMeasure& base, std::span<const double> t_grid) {
  MomentFlow out;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    require_time(t, "moment_flow_check", false);
    if (i == 0 ? t != 0.0 : !(t > t_grid[i - 1])) {
      throw DomainError("moment_flow_check: t_grid must increase from 0");
    }
  }
  for (double t : t_grid) {
    double radius;
    if (t == 0.0) {
      radius = default_moment_radius(base);
    } else {
      const Interval s = support_endpoints(base, t);
      radius = 4.0 * (std::max(std::abs(s.lo), std::abs(s.hi)) + 1.0);
    }
    const auto m = moments_from_transform([&](cplx z) { return transform_impl(base, t, z); }, 2, radius);
    out.t.push_back(t);
    out.m2.push_back(m[2]);
  }
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    out.max_deviation = std::max(out.max_deviation, std::abs(out.m2[i] - out.m2[0] - 4.0 * out.t[i]));
  }
  return out;
}

void write_hull_csv(std::ostream& os, const Hull& hull) {
  os << "x,y\n";
  for (const cplx& p : hull.boundary) os << fmt17(p.real()) << ',' << fmt17(p.imag()) << '\n';
}

std::string hull_svg(const Hull& hull) {
  const double s = std::sqrt(hull.t);
  const double w = 800.0, h = 400.0;
  auto px = [&](double x) { return (x / (4.0 * s) + 1.0) * 0.5 * w; };
  auto py = [&](double y) { return h - y / (4.0 * s) * h; };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h + 40
     << "\" viewBox=\"0 0 " << w << ' ' << h + 40 << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"0\" y1=\"" << h << "\" x2=\"" << w << "\" y2=\"" << h
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<polygon fill=\"#c8d6f0\" stroke=\"#1f3f8f\" stroke-width=\"2\" points=\"";
  for (const cplx& p : hull.boundary) os << px(p.real()) << ',' << py(p.imag()) << ' ';
  os << "\"/>\n";
  for (double x : {hull.footprint.lo, hull.footprint.hi}) {
    os << "<line x1=\"" << px(x) << "\" y1=\"" << h - 8 << "\" x2=\"" << px(x) << "\" y2=\"" << h + 8
       << "\" stroke=\"#b00000\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << h + 26 << "\" font-size=\"14\" text-anchor=\"middle\">"
       << x << "</text>\n";
  }
  os << "<text x=\"10\" y=\"20\" font-size=\"14\">t = " << hull.t << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace msle
