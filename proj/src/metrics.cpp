#include "redfwi/metrics.hpp"

#include <cmath>

namespace redfwi {

double rmse(const Field2D& truth, const Field2D& recon) {
  require_same_shape(truth, recon, "rmse");
  double s = 0.0;
  for (size_t k = 0; k < truth.size(); ++k) {
    double d = truth[k] - recon[k];
    s += d * d;
  }
  return std::sqrt(s / truth.size());
}

double mae(const Field2D& truth, const Field2D& recon) {
  require_same_shape(truth, recon, "mae");
  double s = 0.0;
  for (size_t k = 0; k < truth.size(); ++k) s += std::fabs(truth[k] - recon[k]);
  return s / truth.size();
}

namespace {
constexpr int kWin = 11;
constexpr double kWinSigma = 1.5;

const double* window_weights() {
  static double w[kWin * kWin];
  static bool init = [] {
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i)
      for (int j = 0; j < kWin; ++j) {
        double di = i - kWin / 2, dj = j - kWin / 2;
        w[i * kWin + j] = std::exp(-(di * di + dj * dj) / (2.0 * kWinSigma * kWinSigma));
        sum += w[i * kWin + j];
      }
    for (double& x : w) x /= sum;
    return true;
  }();
  (void)init;
  return w;
}
}  // namespace

double ssim(const Field2D& truth, const Field2D& recon, double dynamic_range) {
  require_same_shape(truth, recon, "ssim");
  if (truth.ny() < kWin || truth.nx() < kWin)
    throw ContractError("ssim: fields must be at least 11x11");
  if (!(dynamic_range > 0.0)) throw ContractError("ssim: dynamic_range must be > 0");

  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  const double* w = window_weights();

  double total = 0.0;
  long count = 0;
  for (int i = 0; i + kWin <= truth.ny(); ++i) {
    for (int j = 0; j + kWin <= truth.nx(); ++j) {
      double mx = 0.0, my = 0.0;
      for (int a = 0; a < kWin; ++a)
        for (int b = 0; b < kWin; ++b) {
          double ww = w[a * kWin + b];
          mx += ww * truth(i + a, j + b);
          my += ww * recon(i + a, j + b);
        }
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (int a = 0; a < kWin; ++a)
        for (int b = 0; b < kWin; ++b) {
          double ww = w[a * kWin + b];
          double dx = truth(i + a, j + b) - mx;
          double dy = recon(i + a, j + b) - my;
          vx += ww * dx * dx;
          vy += ww * dy * dy;
          cxy += ww * dx * dy;
        }
      double num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
      double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total += num / den;
      ++count;
    }
  }
  return total / count;
}

MetricsReport evaluate(const Field2D& truth, const Field2D& recon) {
  auto [lo, hi] = truth.min_max();
  double range = hi > lo ? hi - lo : 1.0;
  return {rmse(truth, recon), mae(truth, recon), ssim(truth, recon, range)};
}

}  // namespace redfwi
