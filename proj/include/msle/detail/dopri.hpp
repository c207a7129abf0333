#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace msle::detail {

template <typename Y>
struct DopriStep {
  Y y{};
  double error = 0.0;  // scaled error estimate; accept when <= 1
};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

/// One Dormand-Prince 5(4) step of y' = f(t, y) for a scalar (real or complex)
/// state, with the error scaled by atol + rtol |y|.
template <typename Y, typename F>
DopriStep<Y> dopri5_step(const F& f, double t, const Y& y, double h, double rtol, double atol) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Y k1 = f(t, y);
  const Y k2 = f(t + c2 * h, y + h * (a21 * k1));
  const Y k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Y k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Y k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Y k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  DopriStep<Y> out;
  out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Y k7 = f(t + h, out.y);
  const Y err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  const double scale = atol + rtol * std::max(magnitude(y), magnitude(out.y));
  out.error = magnitude(err) / scale;
  return out;
}

/// Standard step-size update for a 5th-order pair.
inline double next_step(double h, double error) {
  const double factor =
      error == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
  return h * factor;
}

}  // namespace msle::detail
