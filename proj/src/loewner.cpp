#include "msle/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "msle/detail/dopri.hpp"
#include "msle/error.hpp"
#include "msle/io.hpp"

namespace msle {

namespace {

void require_time(const DrivingPaths& paths, double t, const char* op) {
  if (!(t >= 0.0 && t <= paths.t_end())) {
    throw DomainError(std::string(op) + ": time outside the driver range",
                      {{"t", t}, {"t_end", paths.t_end()}});
  }
}

void require_upper(cplx z, const char* op) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError(std::string(op) + ": requires Im z > 0", {{"re", z.real()}, {"im", z.imag()}});
  }
}

// Integrates the Loewner field from t_from to t_to (either direction) in terms
// of the displacement u = g - z, one driver interval at a time.
FlowResult integrate(const DrivingPaths& paths, cplx z, double t_from, double t_to,
                     const LoewnerOptions& opts) {
  if (t_from == t_to) return FlowResult::Alive(z);
  const bool forward = t_to > t_from;
  const double dir = forward ? 1.0 : -1.0;
  const std::size_t n = paths.n();
  const auto lam = paths.lambdas();
  const auto times = paths.times();

  std::vector<double> va(n), slope(n);
  double seg_t0 = 0.0;
  auto rhs = [&](double s, cplx u) {
    const cplx g = z + u;
    const double ds = s - seg_t0;
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (lam[k] == 0.0) continue;
      acc += 2.0 * lam[k] / (g - (va[k] + ds * slope[k]));
    }
    return acc;
  };
  // Smallest |g - V_k| and the singular step cap at time s.
  auto proximity = [&](double s, cplx g, double& cap) {
    const double ds = s - seg_t0;
    double dmin = std::numeric_limits<double>::infinity();
    cap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (lam[k] == 0.0) continue;
      const double d = std::abs(g - (va[k] + ds * slope[k]));
      dmin = std::min(dmin, d);
      cap = std::min(cap, opts.c_singular * d * d / (2.0 * lam[k]));
    }
    return dmin;
  };

  cplx u = 0.0;
  double s = t_from;
  double h_prev = std::min(1e-2, std::abs(t_to - t_from));
  std::size_t i = paths.interval_index(s);
  if (!forward && times.size() > 1 && i > 0 && times[i] == s) --i;

  while (forward ? s < t_to : s > t_to) {
    double seg_end;
    if (times.size() == 1) {
      std::copy(paths.row(0).begin(), paths.row(0).end(), va.begin());
      std::fill(slope.begin(), slope.end(), 0.0);
      seg_t0 = 0.0;
      seg_end = t_to;
    } else {
      const double t0 = times[i], t1 = times[i + 1];
      auto r0 = paths.row(i);
      auto r1 = paths.row(i + 1);
      for (std::size_t k = 0; k < n; ++k) {
        va[k] = r0[k];
        slope[k] = (r1[k] - r0[k]) / (t1 - t0);
      }
      seg_t0 = t0;
      seg_end = forward ? std::min(t1, t_to) : std::max(t0, t_to);
    }

    while (forward ? s < seg_end : s > seg_end) {
      double cap = 0.0;
      const double dmin = proximity(s, z + u, cap);
      const double remaining = std::abs(seg_end - s);
      double h = std::min({h_prev, cap, remaining});
      if (h < remaining && h < 1e-15 * std::max(1.0, std::abs(s))) {
        if (forward && dmin < 1e-6) return FlowResult::Dead(s);
        throw NumericalError("loewner_stall", "Loewner integration cannot advance",
                             {{"s", s}, {"re", (z + u).real()}, {"im", (z + u).imag()}});
      }
      const auto step = detail::dopri5_step(rhs, s, u, dir * h, opts.rtol, opts.atol);
      const cplx g_new = z + step.y;
      if (!(step.error <= 1.0) || !std::isfinite(g_new.real()) || !std::isfinite(g_new.imag())) {
        h_prev = std::isfinite(step.error) ? detail::next_step(h, step.error) : 0.25 * h;
        h_prev = std::min(h_prev, 0.5 * h);
        continue;
      }
      if (!(g_new.imag() > 0.0)) {
        h_prev = 0.5 * h;
        continue;
      }
      const bool clipped = h == remaining && h < h_prev;
      s = (h == remaining) ? seg_end : s + dir * h;
      u = step.y;
      // A step clipped to a short driver interval says nothing about the
      // scale the field allows.
      h_prev = clipped ? std::max(h_prev, detail::next_step(h, step.error))
                       : detail::next_step(h, step.error);
      if (forward) {
        double unused = 0.0;
        if (proximity(s, z + u, unused) < opts.eps_swallow) return FlowResult::Dead(s);
      }
    }
    if (times.size() > 1) {
      if (forward && i + 2 < times.size()) ++i;
      if (!forward && i > 0) --i;
    }
  }
  return FlowResult::Alive(z + u);
}

}  // namespace

FlowResult flow_map(const DrivingPaths& paths, cplx z, double t, const LoewnerOptions& opts) {
  require_upper(z, "flow_map");
  require_time(paths, t, "flow_map");
  return integrate(paths, z, 0.0, t, opts);
}

std::optional<double> lifetime(const DrivingPaths& paths, cplx z, const LoewnerOptions& opts) {
  require_upper(z, "lifetime");
  FlowResult r = integrate(paths, z, 0.0, paths.t_end(), opts);
  if (r.alive()) return std::nullopt;
  return r.swallow_time;
}

cplx reverse_flow(const DrivingPaths& paths, cplx w, double t, const LoewnerOptions& opts) {
  require_upper(w, "reverse_flow");
  require_time(paths, t, "reverse_flow");
  try {
    return integrate(paths, w, t, 0.0, opts).value;
  } catch (const NumericalError& e) {
    throw NumericalError("reverse_flow", "reverse flow left the upper half-plane", e.payload());
  }
}

std::vector<cplx> trace_tips(const DrivingPaths& paths, double t, double eps_lift,
                             const LoewnerOptions& opts) {
  if (!(eps_lift > 0.0)) throw DomainError("trace_tips: eps_lift must be positive");
  if (!(t > 0.0)) throw DomainError("trace_tips: requires t > 0");
  require_time(paths, t, "trace_tips");
  std::vector<double> v(paths.n());
  paths.values_at(t, v);
  std::vector<cplx> tips(paths.n());
  for (std::size_t k = 0; k < paths.n(); ++k) {
    tips[k] = reverse_flow(paths, cplx(v[k], eps_lift), t, opts);
  }
  return tips;
}

HcapFit fit_hcap(const DrivingPaths& paths, double t, const LoewnerOptions& opts) {
  require_time(paths, t, "hcap_coefficient");
  if (t == 0.0) return {};
  constexpr int kPoints = 8;
  constexpr int kTerms = 4;
  const double radius = 100.0 * (1.0 + paths.max_abs_value());
  Eigen::MatrixXcd a(kPoints, kTerms);
  Eigen::VectorXcd rhs(kPoints);
  for (int j = 0; j < kPoints; ++j) {
    const cplx z = std::polar(radius, std::numbers::pi * (j + 0.5) / kPoints);
    FlowResult r = flow_map(paths, z, t, opts);
    if (!r.alive()) {
      throw NumericalError("hcap_fit", "hcap_coefficient: a far-field point was swallowed",
                           {{"re", z.real()}, {"im", z.imag()}});
    }
    rhs(j) = r.value - z;
    for (int m = 1; m <= kTerms; ++m) a(j, m - 1) = std::pow(radius / z, m);
  }
  Eigen::VectorXcd d = a.colPivHouseholderQr().solve(rhs);
  HcapFit fit;
  fit.coefficient = (d(0) * radius).real();
  fit.relative_residual = (a * d - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (!(fit.relative_residual < 1e-6)) {
    throw NumericalError("hcap_fit", "hcap_coefficient: fit residual too large",
                         {{"residual", fit.relative_residual}});
  }
  return fit;
}

double hcap_coefficient(const DrivingPaths& paths, double t, const LoewnerOptions& opts) {
  return fit_hcap(paths, t, opts).coefficient;
}

std::vector<TipSample> tip_history(const DrivingPaths& paths, std::span<const double> times,
                                   double eps_lift, const LoewnerOptions& opts) {
  std::vector<TipSample> out;
  for (double t : times) {
    auto tips = trace_tips(paths, t, eps_lift, opts);
    for (std::size_t k = 0; k < tips.size(); ++k) out.push_back({k, t, tips[k]});
  }
  return out;
}

std::vector<LifetimeSample> lifetime_grid(const DrivingPaths& paths, std::span<const double> re,
                                          std::span<const double> im, const LoewnerOptions& opts) {
  std::vector<LifetimeSample> out;
  out.reserve(re.size() * im.size());
  for (double y : im) {
    for (double x : re) {
      const cplx z(x, y);
      out.push_back({z, lifetime(paths, z, opts)});
    }
  }
  return out;
}

void write_tips_csv(std::ostream& os, std::span<const TipSample> tips) {
  os << "k,t,re,im\n";
  for (const auto& s : tips) {
    os << (s.k + 1) << ',' << fmt17(s.t) << ',' << fmt17(s.tip.real()) << ','
       << fmt17(s.tip.imag()) << '\n';
  }
}

void write_lifetime_csv(std::ostream& os, std::span<const LifetimeSample> grid) {
  os << "re,im,lifetime\n";
  for (const auto& s : grid) {
    os << fmt17(s.z.real()) << ',' << fmt17(s.z.imag()) << ','
       << (s.lifetime ? fmt17(*s.lifetime) : std::string("inf")) << '\n';
  }
}

}  // namespace msle
