#pragma once

// Shared helpers for the test binaries.

#include <cmath>
#include <cstdlib>
#include <string>

#include "redfwi/field.hpp"
#include "redfwi/rng.hpp"
#include "redfwi/velocity.hpp"
#include "redfwi/wave.hpp"

namespace testsup {

inline double rel_err(double got, double want, double floor = 1e-300) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

// |a - b| scaled by the largest |b| entry; robust where b_i is tiny
inline double rel_to_scale(double a, double b, double scale) {
  return std::abs(a - b) / std::max(std::abs(b), scale);
}

// ny x nx model with `bands` horizontal layers swept linearly over [v0, v1]
inline redfwi::VelocityModel layered(int ny, int nx, int bands, double v0, double v1,
                                     double dx = 10.0) {
  redfwi::VelocityModel m(ny, nx, dx);
  for (int i = 0; i < ny; ++i) {
    int b = std::min(bands - 1, i * bands / ny);
    double v = bands == 1 ? v0 : v0 + (v1 - v0) * b / (bands - 1);
    for (int j = 0; j < nx; ++j) m.values(i, j) = v;
  }
  return m;
}

inline redfwi::Field2D random_field(int ny, int nx, redfwi::Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
  redfwi::Field2D f(ny, nx);
  for (size_t k = 0; k < f.size(); ++k) f[k] = lo + (hi - lo) * rng.uniform();
  return f;
}

inline bool bitwise_equal(const redfwi::Field2D& a, const redfwi::Field2D& b) {
  if (!a.same_shape(b)) return false;
  for (size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

// scratch path under the build tree's working directory
inline std::string tmp_path(const std::string& name) { return "test_tmp_" + name; }

}  // namespace testsup
