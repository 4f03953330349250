#pragma once

#include "redfwi/field.hpp"

namespace redfwi {

struct MetricsReport {
  double rmse = 0.0;  // m/s
  double mae = 0.0;   // m/s
  double ssim = 0.0;  // dimensionless, <= 1
};

double rmse(const Field2D& truth, const Field2D& recon);
double mae(const Field2D& truth, const Field2D& recon);

// Mean SSIM over all 11x11 windows fully inside the image, Gaussian
// weighting (sigma 1.5), C1 = (0.01 L)^2, C2 = (0.03 L)^2 with
// L = dynamic_range. Fields must be at least 11x11.
double ssim(const Field2D& truth, const Field2D& recon, double dynamic_range);

// dynamic range taken as max - min of `truth`
MetricsReport evaluate(const Field2D& truth, const Field2D& recon);

}  // namespace redfwi
