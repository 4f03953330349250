#pragma once

#include "redfwi/field.hpp"

namespace redfwi {

struct RegularizerValue {
  double value = 0.0;
  Field2D gradient;
};

// First-order Tikhonov: (1/N) sum of squared forward differences (down and
// right, omitted at the last row/column); gradient is its exact derivative.
RegularizerValue tikhonov(const Field2D& x);

// Anisotropic TV: value is (1/N) sum of absolute forward differences; the
// gradient smooths d|d| as d/sqrt(d^2 + smoothing_eps^2) (sign(d) with
// sign(0) = 0 when smoothing_eps is 0).
RegularizerValue total_variation(const Field2D& x, double smoothing_eps = 1e-3);

}  // namespace redfwi
