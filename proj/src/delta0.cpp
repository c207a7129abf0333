#include "msle/delta0.hpp"

#include <cmath>
#include <numbers>

#include "msle/error.hpp"

namespace msle::delta0 {

namespace {

constexpr double kInvE = 1.0 / std::numbers::e;

void require_upper(cplx z, const char* op) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError(std::string(op) + ": requires Im z > 0", {{"re", z.real()}, {"im", z.imag()}});
  }
}

cplx halley(cplx z, cplx w) {
  for (int it = 0; it < 100; ++it) {
    const cplx ew = std::exp(w);
    const cplx f = w * ew - z;
    const cplx wp1 = w + 1.0;
    const cplx denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const cplx dw = f / denom;
    w -= dw;
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) break;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

cplx initial_guess(cplx z) {
  if (std::abs(z + kInvE) < 0.3) {
    // Series about the branch point in p = sqrt(2 (e z + 1)).
    const cplx p = std::sqrt(2.0 * (std::numbers::e * z + 1.0));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  if (std::abs(z) <= std::numbers::e) return std::log(1.0 + z);
  const cplx lz = std::log(z);
  return lz - std::log(lz);
}

}  // namespace

BranchedValue sqrt_right_half(cplx w) {
  const double r = std::abs(w);
  const double phi = std::arg(w);  // (-pi, pi]
  const cplx root = std::polar(std::sqrt(r), 0.5 * phi);
  if (!(root.real() >= -1e-300)) {
    throw NumericalError("branch", "sqrt_right_half: root left the right half-plane");
  }
  return {root, "principal: arg in (-pi/2, pi/2], sqrt(1) = 1"};
}

BranchedValue sqrt_upper_half(cplx w) {
  // i * principal(-w): holomorphic off [0, inf), sqrt(-1) = i.
  const cplx root = cplx(0.0, 1.0) * sqrt_right_half(-w).value;
  if (!(root.imag() >= -1e-300)) {
    throw NumericalError("branch", "sqrt_upper_half: root left the upper half-plane");
  }
  return {root, "cut along [0, inf), sqrt(-1) = i"};
}

bool in_principal_range(cplx w) {
  const double y = w.imag();
  if (std::abs(y) >= std::numbers::pi) return false;
  if (y == 0.0) return w.real() >= -1.0;
  return w.real() > -y / std::tan(y) - 1e-12 * (1.0 + std::abs(w.real()));
}

cplx lambert_w0(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("lambert_w0: non-finite argument");
  }
  if (z.imag() == 0.0 && z.real() < -kInvE) {
    throw DomainError("lambert_w0: argument on the branch cut (-inf, -1/e)", {{"x", z.real()}});
  }
  if (z == cplx(0.0, 0.0)) return 0.0;
  if (z.imag() == 0.0 && std::abs(std::numbers::e * z.real() + 1.0) >= 5e-7) {
    // Real arguments stay real on the principal branch.
    const cplx w = halley(z, initial_guess(z));
    return {w.real(), 0.0};
  }
  {
    // At the branch point Halley's denominator vanishes; the series is exact enough.
    const cplx p = std::sqrt(2.0 * (std::numbers::e * z + 1.0));
    if (std::abs(p) < 1e-3) {
      return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p * p * p * p;
    }
  }
  cplx w = halley(z, initial_guess(z));
  if (in_principal_range(w) && std::abs(w * std::exp(w) - z) <= 1e-13 * (1.0 + std::abs(z))) {
    return w;
  }
  // Fall back to continuation along the ray 0 -> z, which never meets the cut.
  w = 0.0;
  constexpr int kSteps = 64;
  for (int k = 1; k <= kSteps; ++k) w = halley(z * (static_cast<double>(k) / kSteps), w);
  return w;
}

cplx oracle_transform(cplx z, double t) {
  require_upper(z, "oracle_transform");
  if (!(t >= 0.0)) throw DomainError("oracle_transform: requires t >= 0");
  return 4.0 / (z + sqrt_upper_half(z * z - 16.0 * t).value);
}

Maps oracle_maps(cplx z, double t) {
  require_upper(z, "oracle_maps");
  if (!(t >= 0.0)) throw DomainError("oracle_maps: requires t >= 0");
  if (t == 0.0) return {z, z};
  const cplx w = lambert_w0(-4.0 * t / (z * z));
  const cplx h = cplx(0.0, 1.0) * sqrt_right_half(4.0 * t / w).value;
  return {h, h + 4.0 * t / h};
}

Intervals oracle_intervals(double t) {
  if (!(t > 0.0)) throw DomainError("oracle_intervals: requires t > 0", {{"t", t}});
  const double s = 4.0 * std::sqrt(t);
  const double f = 2.0 * std::sqrt(std::numbers::e * t);
  return {{-s, s}, {-f, f}};
}

}  // namespace msle::delta0
