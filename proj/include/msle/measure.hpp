#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

namespace msle {

using cplx = std::complex<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

enum class MeasureKind { Atomic, PointMass, UniformInterval, Semicircle };

/// A probability measure on the real line with bounded support: either finitely
/// many weighted atoms or one of a few closed-form laws. Immutable.
class ProbabilityMeasure {
 public:
  /// Atoms must be strictly increasing and weights positive. Weights whose sum
  /// is within 1e-9 of one are renormalised; anything further off is rejected.
  static ProbabilityMeasure atomic(std::vector<double> atoms, std::vector<double> weights);
  static ProbabilityMeasure equal_weights(std::vector<double> atoms);
  static ProbabilityMeasure point_mass(double at);
  static ProbabilityMeasure uniform(double lo, double hi);
  /// Wigner semicircle with density 2/(pi R^2) sqrt(R^2 - (x-c)^2).
  static ProbabilityMeasure semicircle(double center, double radius);

  MeasureKind kind() const { return kind_; }
  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  /// Point-mass location, interval lower end, or semicircle center.
  double first_param() const { return p0_; }
  /// Interval upper end or semicircle radius.
  double second_param() const { return p1_; }

  Interval support() const;
  /// Largest |x| over the support.
  double support_radius() const;
  /// Distance from a real point to the (closed) support; for atomic measures
  /// the support is the atom set itself.
  double distance_to_support(double x) const;

  double cdf(double x) const;
  double cdf_left(double x) const;
  /// Generalised inverse: smallest x with cdf(x) >= p.
  double quantile(double p) const;
  double moment(int k) const;

  /// Image under x -> -x.
  ProbabilityMeasure reflected() const;

  nlohmann::json to_json() const;
  static ProbabilityMeasure from_json(const nlohmann::json& j);

 private:
  ProbabilityMeasure() = default;

  MeasureKind kind_ = MeasureKind::PointMass;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  double p0_ = 0.0;
  double p1_ = 0.0;
};

const char* to_string(MeasureKind kind);

// Cauchy transform M(z) = \int 2 m(du) / (z - u). The complex overloads require
// Im z > 0; the derivative overloads also accept real z away from the support.
cplx cauchy_transform(const ProbabilityMeasure& m, cplx z);
cplx cauchy_transform_deriv(const ProbabilityMeasure& m, cplx z);
cplx cauchy_transform_deriv2(const ProbabilityMeasure& m, cplx z);
double cauchy_transform_real(const ProbabilityMeasure& m, double x);
double cauchy_transform_deriv_real(const ProbabilityMeasure& m, double x);
double cauchy_transform_deriv2_real(const ProbabilityMeasure& m, double x);
/// Antiderivative L(x) = \int 2 log(x - u) m(du) of the transform, for real x
/// to the right of the support.
double log_potential_real(const ProbabilityMeasure& m, double x);

namespace detail {
// Same formulas without the domain checks, for integrators whose trial stages
// may graze the real axis.
cplx transform_unchecked(const ProbabilityMeasure& m, cplx z);
cplx deriv_unchecked(const ProbabilityMeasure& m, cplx z);
cplx deriv2_unchecked(const ProbabilityMeasure& m, cplx z);
}  // namespace detail

/// n equal-weight atoms at the target quantiles (k - 1/2)/n. Coincident
/// quantiles (point masses, atomic targets) are spread over at most 1/n^2 so
/// that the atoms stay strictly increasing.
ProbabilityMeasure discretize(const ProbabilityMeasure& target, std::size_t n);

using TransformFn = std::function<cplx(cplx)>;

TransformFn transform_of(const ProbabilityMeasure& m);

/// Default radius 4 (support radius + 1) for moment extraction.
double default_moment_radius(const ProbabilityMeasure& m);

struct MomentFit {
  std::vector<double> moments;
  double relative_residual = 0.0;
};

/// Least-squares fit of the Laurent expansion M(z) = sum_k 2 m_k / z^{k+1} on
/// the upper half of the circle |z| = radius. Returns m_0..m_{k_max}; throws
/// NumericalError when the residual shows the expansion does not converge on
/// that circle.
MomentFit fit_moments(const TransformFn& transform, int k_max, double radius);
std::vector<double> moments_from_transform(const TransformFn& transform, int k_max,
                                           double radius);

/// max_j |M_a(z_j) - M_b(z_j)|.
double transform_distance(const TransformFn& a, const TransformFn& b,
                          std::span<const cplx> points);
double transform_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b,
                          std::span<const cplx> points);

double kolmogorov_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b);
/// Kolmogorov distance between the empirical law of `samples` and `target`.
double kolmogorov_distance(std::vector<double> samples, const ProbabilityMeasure& target);
/// Levy distance; metrises weak convergence, unlike the Kolmogorov distance
/// for targets with atoms.
double levy_distance(const ProbabilityMeasure& a, const ProbabilityMeasure& b);

}  // namespace msle
