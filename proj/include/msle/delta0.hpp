#pragma once

#include <string_view>

#include "msle/measure.hpp"

// Closed forms for the limit flow started from a point mass at the origin.

namespace msle::delta0 {

/// A square root together with the branch convention that produced it.
struct BranchedValue {
  cplx value;
  std::string_view branch;
};

/// Principal root (range Re >= 0) by explicit argument halving.
BranchedValue sqrt_right_half(cplx w);
/// Root holomorphic off [0, inf) with sqrt(-1) = i (range Im >= 0).
BranchedValue sqrt_upper_half(cplx w);

/// Principal branch of the Lambert W function (W(z) e^{W(z)} = z, W(e) = 1),
/// defined off the cut (-inf, -1/e).
cplx lambert_w0(cplx z);
/// True when w lies in the range of the principal branch.
bool in_principal_range(cplx w);

/// M_t(z) = 4 / (z + sqrt(z^2 - 16 t)).
cplx oracle_transform(cplx z, double t);

struct Maps {
  cplx h;  // inverse characteristic
  cplx g;  // Loewner map
};

/// h_t(z) = i sqrt(4t / W(-4t / z^2)) and g_t = h_t + 4t / h_t.
Maps oracle_maps(cplx z, double t);

struct Intervals {
  Interval support;    // [-4 sqrt(t), 4 sqrt(t)]
  Interval footprint;  // [-2 sqrt(e t), 2 sqrt(e t)]
};

Intervals oracle_intervals(double t);

}  // namespace msle::delta0
