#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <utility>
#include <vector>

#include "redfwi/errors.hpp"

namespace redfwi {

// Row-major 2D array of doubles. Row index i runs over depth (ny rows),
// column index j over the horizontal axis (nx columns).
class Field2D {
 public:
  Field2D() = default;
  Field2D(int ny, int nx, double fill = 0.0)
      : ny_(ny), nx_(nx), v_(static_cast<size_t>(ny) * nx, fill) {
    assert(ny >= 0 && nx >= 0);
  }

  int ny() const { return ny_; }
  int nx() const { return nx_; }
  size_t size() const { return v_.size(); }

  double& operator()(int i, int j) { return v_[static_cast<size_t>(i) * nx_ + j]; }
  double operator()(int i, int j) const { return v_[static_cast<size_t>(i) * nx_ + j]; }
  double& operator[](size_t k) { return v_[k]; }
  double operator[](size_t k) const { return v_[k]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& vec() { return v_; }
  const std::vector<double>& vec() const { return v_; }

  bool same_shape(const Field2D& o) const { return ny_ == o.ny_ && nx_ == o.nx_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::pair<double, double> min_max() const {
    auto [lo, hi] = std::minmax_element(v_.begin(), v_.end());
    return {*lo, *hi};
  }

 private:
  int ny_ = 0, nx_ = 0;
  std::vector<double> v_;
};

inline void require_same_shape(const Field2D& a, const Field2D& b, const char* where) {
  if (!a.same_shape(b))
    throw ContractError(std::string(where) + ": shape mismatch");
}

// sum of elementwise products
inline double dot(const Field2D& a, const Field2D& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline void axpy(double alpha, const Field2D& x, Field2D& y) {
  require_same_shape(x, y, "axpy");
  for (size_t k = 0; k < y.size(); ++k) y[k] += alpha * x[k];
}

inline void clamp_inplace(Field2D& f, double lo, double hi) {
  for (size_t k = 0; k < f.size(); ++k) f[k] = std::clamp(f[k], lo, hi);
}

}  // namespace redfwi
