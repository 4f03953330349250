#include "redfwi/regularizers.hpp"

#include <cmath>

#include "redfwi/errors.hpp"

namespace redfwi {

RegularizerValue tikhonov(const Field2D& x) {
  if (x.ny() < 2 || x.nx() < 2) throw ContractError("tikhonov: field must be at least 2x2");
  RegularizerValue r;
  r.gradient = Field2D(x.ny(), x.nx(), 0.0);
  const double invn = 1.0 / static_cast<double>(x.size());
  double sum = 0.0;
  for (int i = 0; i < x.ny(); ++i)
    for (int j = 0; j < x.nx(); ++j) {
      if (i + 1 < x.ny()) {
        double d = x(i + 1, j) - x(i, j);
        sum += d * d;
        r.gradient(i + 1, j) += 2.0 * d * invn;
        r.gradient(i, j) -= 2.0 * d * invn;
      }
      if (j + 1 < x.nx()) {
        double d = x(i, j + 1) - x(i, j);
        sum += d * d;
        r.gradient(i, j + 1) += 2.0 * d * invn;
        r.gradient(i, j) -= 2.0 * d * invn;
      }
    }
  r.value = sum * invn;
  return r;
}

RegularizerValue total_variation(const Field2D& x, double smoothing_eps) {
  if (x.ny() < 2 || x.nx() < 2) throw ContractError("total_variation: field must be at least 2x2");
  if (smoothing_eps < 0.0) throw ConfigError("total_variation: smoothing_eps must be >= 0");
  RegularizerValue r;
  r.gradient = Field2D(x.ny(), x.nx(), 0.0);
  const double invn = 1.0 / static_cast<double>(x.size());
  const double e2 = smoothing_eps * smoothing_eps;
  auto slope = [&](double d) {
    if (smoothing_eps > 0.0) return d / std::sqrt(d * d + e2);
    return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  };
  double sum = 0.0;
  for (int i = 0; i < x.ny(); ++i)
    for (int j = 0; j < x.nx(); ++j) {
      if (i + 1 < x.ny()) {
        double d = x(i + 1, j) - x(i, j);
        sum += std::fabs(d);
        double s = slope(d) * invn;
        r.gradient(i + 1, j) += s;
        r.gradient(i, j) -= s;
      }
      if (j + 1 < x.nx()) {
        double d = x(i, j + 1) - x(i, j);
        sum += std::fabs(d);
        double s = slope(d) * invn;
        r.gradient(i, j + 1) += s;
        r.gradient(i, j) -= s;
      }
    }
  r.value = sum * invn;
  return r;
}

}  // namespace redfwi
