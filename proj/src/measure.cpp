#include "msle/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "msle/error.hpp"

namespace msle {

namespace {

constexpr double kWeightTolerance = 1e-9;

void require_upper(cplx z, const char* op) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError(std::string(op) + ": requires Im z > 0",
                      {{"re", z.real()}, {"im", z.imag()}});
  }
}

void require_off_support(const ProbabilityMeasure& m, double x, const char* op) {
  if (!(m.distance_to_support(x) > 0.0)) {
    throw DomainError(std::string(op) + ": real argument lies in the support", {{"x", x}});
  }
}

// log(1 + q) for complex q; the series branch avoids the cancellation in
// log(z - a) - log(z - b) far from the interval.
cplx log1p_complex(cplx q) {
  if (std::abs(q) < 0.1) {
    cplx term = q;
    cplx sum = 0.0;
    for (int k = 1; k < 40; ++k) {
      sum += (k % 2 == 1 ? 1.0 : -1.0) * term / static_cast<double>(k);
      term *= q;
    }
    return sum;
  }
  return std::log(1.0 + q);
}

// sqrt(w - R) sqrt(w + R): the branch of sqrt(w^2 - R^2) that behaves like w
// at infinity, cut along [-R, R].
cplx semicircle_root(cplx w, double radius) {
  return std::sqrt(w - radius) * std::sqrt(w + radius);
}

double semicircle_root_real(double w, double radius) {
  double s = std::sqrt((w - radius) * (w + radius));
  return w > 0 ? s : -s;
}

double semicircle_cdf_unit(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Atomic: return "atomic";
    case MeasureKind::PointMass: return "point_mass";
    case MeasureKind::UniformInterval: return "uniform";
    case MeasureKind::Semicircle: return "semicircle";
  }
  return "unknown";
}

ProbabilityMeasure ProbabilityMeasure::atomic(std::vector<double> atoms,
                                              std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw DomainError("atomic measure: atoms and weights must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw DomainError("atomic measure: non-finite atom");
    if (i > 0 && !(atoms[i] > atoms[i - 1])) {
      throw DomainError("atomic measure: atoms must be strictly increasing",
                        {{"index", i}, {"previous", atoms[i - 1]}, {"value", atoms[i]}});
    }
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw DomainError("atomic measure: weights must be positive", {{"index", i}});
    }
  }
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw DomainError("atomic measure: weights must sum to one", {{"sum", total}});
  }
  if (total != 1.0) {
    for (auto& w : weights) w /= total;
  }
  ProbabilityMeasure m;
  m.kind_ = MeasureKind::Atomic;
  m.atoms_ = std::move(atoms);
  m.weights_ = std::move(weights);
  return m;
}

ProbabilityMeasure ProbabilityMeasure::equal_weights(std::vector<double> atoms) {
  std::vector<double> weights(atoms.size(), atoms.empty() ? 0.0 : 1.0 / atoms.size());
  return atomic(std::move(atoms), std::move(weights));
}

ProbabilityMeasure ProbabilityMeasure::point_mass(double at) {
  if (!std::isfinite(at)) throw DomainError("point mass: non-finite location");
  ProbabilityMeasure m;
  m.kind_ = MeasureKind::PointMass;
  m.p0_ = at;
  return m;
}

ProbabilityMeasure ProbabilityMeasure::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("uniform measure: requires lo < hi", {{"lo", lo}, {"hi", hi}});
  }
  ProbabilityMeasure m;
  m.kind_ = MeasureKind::UniformInterval;
  m.p0_ = lo;
  m.p1_ = hi;
  return m;
}

ProbabilityMeasure ProbabilityMeasure::semicircle(double center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(center)) {
    throw DomainError("semicircle: requires radius > 0", {{"radius", radius}});
  }
  ProbabilityMeasure m;
  m.kind_ = MeasureKind::Semicircle;
  m.p0_ = center;
  m.p1_ = radius;
  return m;
}

Interval ProbabilityMeasure::support() const {
  switch (kind_) {
    case MeasureKind::Atomic: return {atoms_.front(), atoms_.back()};
    case MeasureKind::PointMass: return {p0_, p0_};
    case MeasureKind::UniformInterval: return {p0_, p1_};
    case MeasureKind::Semicircle: return {p0_ - p1_, p0_ + p1_};
  }
  return {};
}

double ProbabilityMeasure::support_radius() const {
  Interval s = support();
  return std::max(std::abs(s.lo), std::abs(s.hi));
}

double ProbabilityMeasure::distance_to_support(double x) const {
  if (kind_ == MeasureKind::Atomic) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x);
    double d = std::numeric_limits<double>::infinity();
    if (it != atoms_.end()) d = *it - x;
    if (it != atoms_.begin()) d = std::min(d, x - *(it - 1));
    return d;
  }
  Interval s = support();
  if (x < s.lo) return s.lo - x;
  if (x > s.hi) return x - s.hi;
  return 0.0;
}

double ProbabilityMeasure::cdf(double x) const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      auto end = std::upper_bound(atoms_.begin(), atoms_.end(), x);
      double c = std::accumulate(weights_.begin(), weights_.begin() + (end - atoms_.begin()), 0.0);
      return std::min(c, 1.0);
    }
    case MeasureKind::PointMass: return x >= p0_ ? 1.0 : 0.0;
    case MeasureKind::UniformInterval: return std::clamp((x - p0_) / (p1_ - p0_), 0.0, 1.0);
    case MeasureKind::Semicircle: return semicircle_cdf_unit((x - p0_) / p1_);
  }
  return 0.0;
}

double ProbabilityMeasure::cdf_left(double x) const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      auto end = std::lower_bound(atoms_.begin(), atoms_.end(), x);
      return std::accumulate(weights_.begin(), weights_.begin() + (end - atoms_.begin()), 0.0);
    }
    case MeasureKind::PointMass: return x > p0_ ? 1.0 : 0.0;
    default: return cdf(x);
  }
}

double ProbabilityMeasure::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: level outside [0, 1]", {{"p", p}});
  switch (kind_) {
    case MeasureKind::Atomic: {
      double c = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        c += weights_[i];
        if (c >= p - 1e-14) return atoms_[i];
      }
      return atoms_.back();
    }
    case MeasureKind::PointMass: return p0_;
    case MeasureKind::UniformInterval: return p0_ + p * (p1_ - p0_);
    case MeasureKind::Semicircle: {
      double lo = -1.0, hi = 1.0;
      for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        double mid = 0.5 * (lo + hi);
        (semicircle_cdf_unit(mid) < p ? lo : hi) = mid;
      }
      return p0_ + p1_ * 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

double ProbabilityMeasure::moment(int k) const {
  if (k < 0) throw DomainError("moment: negative order");
  switch (kind_) {
    case MeasureKind::Atomic: {
      double s = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * std::pow(atoms_[i], k);
      return s;
    }
    case MeasureKind::PointMass: return std::pow(p0_, k);
    case MeasureKind::UniformInterval:
      return (std::pow(p1_, k + 1) - std::pow(p0_, k + 1)) / ((k + 1) * (p1_ - p0_));
    case MeasureKind::Semicircle: {
      // Centered moments are Catalan numbers times (R/2)^{2j}.
      double s = 0.0;
      for (int j = 0; 2 * j <= k; ++j) {
        double catalan = binomial(2 * j, j) / (j + 1);
        double centered = catalan * std::pow(p1_ / 2.0, 2 * j);
        s += binomial(k, 2 * j) * centered * std::pow(p0_, k - 2 * j);
      }
      return s;
    }
  }
  return 0.0;
}

ProbabilityMeasure ProbabilityMeasure::reflected() const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      std::vector<double> a(atoms_.rbegin(), atoms_.rend());
      std::vector<double> w(weights_.rbegin(), weights_.rend());
      for (auto& x : a) x = -x;
      return atomic(std::move(a), std::move(w));
    }
    case MeasureKind::PointMass: return point_mass(-p0_);
    case MeasureKind::UniformInterval: return uniform(-p1_, -p0_);
    case MeasureKind::Semicircle: return semicircle(-p0_, p1_);
  }
  return *this;
}

nlohmann::json ProbabilityMeasure::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["atoms"] = atoms_;
  j["weights"] = weights_;
  nlohmann::json params = nlohmann::json::object();
  switch (kind_) {
    case MeasureKind::Atomic: break;
    case MeasureKind::PointMass: params["at"] = p0_; break;
    case MeasureKind::UniformInterval: params["lo"] = p0_; params["hi"] = p1_; break;
    case MeasureKind::Semicircle: params["center"] = p0_; params["radius"] = p1_; break;
  }
  j["params"] = params;
  return j;
}

ProbabilityMeasure ProbabilityMeasure::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    if (kind == "atomic") {
      return atomic(j.at("atoms").get<std::vector<double>>(),
                    j.at("weights").get<std::vector<double>>());
    }
    if (kind == "point_mass") return point_mass(params.value("at", 0.0));
    if (kind == "uniform") return uniform(params.at("lo").get<double>(), params.at("hi").get<double>());
    if (kind == "semicircle") {
      return semicircle(params.value("center", 0.0), params.at("radius").get<double>());
    }
    throw DomainError("measure json: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("measure json: ") + e.what());
  }
}

cplx detail::transform_unchecked(const ProbabilityMeasure& m, cplx z) {
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      cplx s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) s += w[i] / (z - a[i]);
      return 2.0 * s;
    }
    case MeasureKind::PointMass: return 2.0 / (z - m.first_param());
    case MeasureKind::UniformInterval: {
      double lo = m.first_param(), hi = m.second_param();
      return 2.0 / (hi - lo) * log1p_complex((hi - lo) / (z - hi));
    }
    case MeasureKind::Semicircle: {
      cplx w = z - m.first_param();
      return 4.0 / (w + semicircle_root(w, m.second_param()));
    }
  }
  return 0.0;
}

double cauchy_transform_real(const ProbabilityMeasure& m, double x) {
  require_off_support(m, x, "cauchy_transform_real");
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      double s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) s += w[i] / (x - a[i]);
      return 2.0 * s;
    }
    case MeasureKind::PointMass: return 2.0 / (x - m.first_param());
    case MeasureKind::UniformInterval: {
      double lo = m.first_param(), hi = m.second_param();
      return 2.0 / (hi - lo) * std::log1p((hi - lo) / (x - hi));
    }
    case MeasureKind::Semicircle: {
      double w = x - m.first_param();
      return 4.0 / (w + semicircle_root_real(w, m.second_param()));
    }
  }
  return 0.0;
}

double log_potential_real(const ProbabilityMeasure& m, double x) {
  if (!(x >= m.support().hi)) {
    throw DomainError("log_potential_real: x must lie right of the support", {{"x", x}});
  }
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      double s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::log(x - a[i]);
      return 2.0 * s;
    }
    case MeasureKind::PointMass: return 2.0 * std::log(x - m.first_param());
    case MeasureKind::UniformInterval: {
      const double lo = m.first_param(), hi = m.second_param();
      const double right = x > hi ? (x - hi) * std::log(x - hi) : 0.0;
      return 2.0 / (hi - lo) * ((x - lo) * std::log(x - lo) - right);
    }
    case MeasureKind::Semicircle: {
      const double w = x - m.first_param(), r = m.second_param();
      const double s = semicircle_root_real(std::max(w, r), r);
      return 4.0 / (r * r) * (0.5 * w * w - 0.5 * w * s + 0.5 * r * r * std::log(w + s));
    }
  }
  return 0.0;
}

cplx detail::deriv_unchecked(const ProbabilityMeasure& m, cplx z) {
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      cplx s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) {
        cplx d = z - a[i];
        s += w[i] / (d * d);
      }
      return -2.0 * s;
    }
    case MeasureKind::PointMass: {
      cplx d = z - m.first_param();
      return -2.0 / (d * d);
    }
    case MeasureKind::UniformInterval:
      return -2.0 / ((z - m.first_param()) * (z - m.second_param()));
    case MeasureKind::Semicircle: {
      cplx w = z - m.first_param();
      cplx s = semicircle_root(w, m.second_param());
      return -4.0 / (s * (w + s));
    }
  }
  return 0.0;
}

double cauchy_transform_deriv_real(const ProbabilityMeasure& m, double x) {
  require_off_support(m, x, "cauchy_transform_deriv");
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      double s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = x - a[i];
        s += w[i] / (d * d);
      }
      return -2.0 * s;
    }
    case MeasureKind::PointMass: {
      double d = x - m.first_param();
      return -2.0 / (d * d);
    }
    case MeasureKind::UniformInterval:
      return -2.0 / ((x - m.first_param()) * (x - m.second_param()));
    case MeasureKind::Semicircle: {
      double w = x - m.first_param();
      double s = semicircle_root_real(w, m.second_param());
      return -4.0 / (s * (w + s));
    }
  }
  return 0.0;
}

cplx detail::deriv2_unchecked(const ProbabilityMeasure& m, cplx z) {
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      cplx s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) {
        cplx d = z - a[i];
        s += w[i] / (d * d * d);
      }
      return 4.0 * s;
    }
    case MeasureKind::PointMass: {
      cplx d = z - m.first_param();
      return 4.0 / (d * d * d);
    }
    case MeasureKind::UniformInterval: {
      cplx da = z - m.first_param(), db = z - m.second_param();
      return 2.0 * (da + db) / (da * da * db * db);
    }
    case MeasureKind::Semicircle: {
      cplx s = semicircle_root(z - m.first_param(), m.second_param());
      return 4.0 / (s * s * s);
    }
  }
  return 0.0;
}

double cauchy_transform_deriv2_real(const ProbabilityMeasure& m, double x) {
  require_off_support(m, x, "cauchy_transform_deriv2");
  switch (m.kind()) {
    case MeasureKind::Atomic: {
      double s = 0.0;
      auto a = m.atoms();
      auto w = m.weights();
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = x - a[i];
        s += w[i] / (d * d * d);
      }
      return 4.0 * s;
    }
    case MeasureKind::PointMass: {
      double d = x - m.first_param();
      return 4.0 / (d * d * d);
    }
    case MeasureKind::UniformInterval: {
      double da = x - m.first_param(), db = x - m.second_param();
      return 2.0 * (da + db) / (da * da * db * db);
    }
    case MeasureKind::Semicircle: {
      double s = semicircle_root_real(x - m.first_param(), m.second_param());
      return 4.0 / (s * s * s);
    }
  }
  return 0.0;
}

cplx cauchy_transform(const ProbabilityMeasure& m, cplx z) {
  require_upper(z, "cauchy_transform");
  return detail::transform_unchecked(m, z);
}

cplx cauchy_transform_deriv(const ProbabilityMeasure& m, cplx z) {
  if (z.imag() == 0.0) return cauchy_transform_deriv_real(m, z.real());
  require_upper(z, "cauchy_transform_deriv");
  return detail::deriv_unchecked(m, z);
}

cplx cauchy_transform_deriv2(const ProbabilityMeasure& m, cplx z) {
  if (z.imag() == 0.0) return cauchy_transform_deriv2_real(m, z.real());
  require_upper(z, "cauchy_transform_deriv2");
  return detail::deriv2_unchecked(m, z);
}

ProbabilityMeasure discretize(const ProbabilityMeasure& target, std::size_t n) {
  if (n == 0) throw DomainError("discretize: n must be positive");
  const double nd = static_cast<double>(n);
  std::vector<double> atoms(n);
  if (target.kind() == MeasureKind::PointMass) {
    const double c = target.first_param();
    const double spread = 1.0 / (nd * nd);
    if (n == 1) {
      atoms[0] = c;
    } else {
      for (std::size_t k = 0; k < n; ++k) atoms[k] = c - spread + 2.0 * spread * k / (nd - 1.0);
    }
    return ProbabilityMeasure::equal_weights(std::move(atoms));
  }
  for (std::size_t k = 0; k < n; ++k) atoms[k] = target.quantile((k + 0.5) / nd);
  if (target.kind() == MeasureKind::Atomic) {
    // Spread each run of equal quantiles symmetrically around its atom.
    std::vector<double> out(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && atoms[j + 1] == atoms[i]) ++j;
      const std::size_t run = j - i + 1;
      if (run == 1) {
        out[i] = atoms[i];
      } else {
        double room = std::numeric_limits<double>::infinity();
        if (i > 0) room = std::min(room, atoms[i] - atoms[i - 1]);
        if (j + 1 < n) room = std::min(room, atoms[j + 1] - atoms[i]);
        const double spread = std::min(1.0 / (nd * nd), 0.25 * room);
        for (std::size_t k = 0; k < run; ++k) {
          out[i + k] = atoms[i] - spread + 2.0 * spread * k / (run - 1.0);
        }
      }
      i = j + 1;
    }
    atoms = std::move(out);
  }
  return ProbabilityMeasure::equal_weights(std::move(atoms));
}

TransformFn transform_of(const ProbabilityMeasure& m) {
  return [m](cplx z) { return cauchy_transform(m, z); };
}

double default_moment_radius(const ProbabilityMeasure& m) {
  return 4.0 * (m.support_radius() + 1.0);
}

MomentFit fit_moments(const TransformFn& transform, int k_max, double radius) {
  if (k_max < 0) throw DomainError("moments_from_transform: k_max must be >= 0");
  if (!(radius > 0.0)) throw DomainError("moments_from_transform: radius must be positive");
  // Extra Laurent terms absorb the tail; unknowns are scaled by radius^k so the
  // system is a truncated Fourier fit on the half circle.
  const int terms = k_max + 21;
  const int points = 4 * (terms + 1);
  Eigen::MatrixXd a(2 * points, terms);
  Eigen::VectorXd rhs(2 * points);
  for (int j = 0; j < points; ++j) {
    const double phi = std::numbers::pi * (j + 0.5) / points;
    const cplx z = std::polar(radius, phi);
    const cplx y = transform(z) * radius / 2.0;
    rhs(2 * j) = y.real();
    rhs(2 * j + 1) = y.imag();
    for (int k = 0; k < terms; ++k) {
      const double ang = -(k + 1) * phi;
      a(2 * j, k) = std::cos(ang);
      a(2 * j + 1, k) = std::sin(ang);
    }
  }
  Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
  const double misfit = (a * sol - rhs).norm();
  const double scale = std::max(rhs.norm(), 1e-300);
  MomentFit fit;
  fit.relative_residual = misfit / scale;
  if (!(fit.relative_residual < 1e-9)) {
    throw NumericalError("moment_fit", "moments_from_transform: Laurent fit residual too large; "
                         "radius is too small for this transform",
                         {{"residual", fit.relative_residual}, {"radius", radius}});
  }
  fit.moments.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) fit.moments[k] = sol(k) * std::pow(radius, k);
  return fit;
}

std::vector<double> moments_from_transform(const TransformFn& transform, int k_max, double radius) {
  return fit_moments(transform, k_max, radius).moments;
}

double transform_distance(const TransformFn& a, const TransformFn& b, std::span<const cplx> points) {
  if (points.empty()) throw DomainError("transform_distance: empty point list");
  double d = 0.0;
  for (const cplx& z : points) {
    require_upper(z, "transform_distance");
    d = std::max(d, std::abs(a(z) - b(z)));
  }
  return d;
}

double transform_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b,
                          std::span<const cplx> points) {
  return transform_distance(transform_of(a), transform_of(b), points);
}

namespace {

std::vector<double> comparison_grid(const ProbabilityMeasure& a, const ProbabilityMeasure& b,
                                    double pad) {
  std::vector<double> xs;
  for (const auto* m : {&a, &b}) {
    for (double x : m->atoms()) xs.push_back(x);
    if (m->kind() == MeasureKind::PointMass) xs.push_back(m->first_param());
  }
  Interval sa = a.support(), sb = b.support();
  const double lo = std::min(sa.lo, sb.lo) - pad, hi = std::max(sa.hi, sb.hi) + pad;
  constexpr int kGrid = 4001;
  for (int i = 0; i < kGrid; ++i) xs.push_back(lo + (hi - lo) * i / (kGrid - 1.0));
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace

double kolmogorov_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b) {
  double d = 0.0;
  for (double x : comparison_grid(a, b, 1.0)) {
    d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
    d = std::max(d, std::abs(a.cdf_left(x) - b.cdf_left(x)));
  }
  return d;
}

double kolmogorov_distance(std::vector<double> samples, const ProbabilityMeasure& target) {
  if (samples.empty()) throw DomainError("kolmogorov_distance: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = target.cdf(samples[i]);
    const double fl = target.cdf_left(samples[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - fl));
  }
  return d;
}

double levy_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b) {
  const std::vector<double> xs = comparison_grid(a, b, 2.0);
  auto within = [&](double eps) {
    for (double x : xs) {
      for (double y : {x, x - 1e-13, x + 1e-13}) {
        if (a.cdf(y - eps) - eps > b.cdf(y) + 1e-15) return false;
        if (b.cdf(y) > a.cdf(y + eps) + eps + 1e-15) return false;
        if (b.cdf(y - eps) - eps > a.cdf(y) + 1e-15) return false;
        if (a.cdf(y) > b.cdf(y + eps) + eps + 1e-15) return false;
      }
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    (within(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace msle
