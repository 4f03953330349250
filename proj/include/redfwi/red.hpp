#pragma once

#include "redfwi/field.hpp"
#include "redfwi/prior.hpp"
#include "redfwi/rng.hpp"
#include "redfwi/schedule.hpp"

namespace redfwi {

// One Monte Carlo draw of the denoiser-residual regularizer.
struct RedSample {
  int t = 0;
  Field2D epsilon;    // injected noise
  Field2D corrupted;  // sqrt(g) x + sqrt(1-g) eps
  Field2D eps_hat;    // predictor output at (corrupted, t)
  double r_hat = 0.0; // x . (eps_hat - eps), times w(t) iff weighted
  Field2D grad;       // d r_hat / d x with eps_hat held constant (stop-gradient)
};

// x_t = sqrt(gamma(t)) x + sqrt(1 - gamma(t)) eps
Field2D vp_corrupt(const Field2D& x, int t, const Field2D& epsilon, const NoiseSchedule& sched);

// D(x_t) = (x_t - sqrt(1-gamma) eps_hat(x_t, t)) / sqrt(gamma); for the
// Gaussian oracle this is the exact posterior mean E[x | x_t].
Field2D tweedie_denoise(const Field2D& x_t, int t, const EpsilonPredictor& pred,
                        const NoiseSchedule& sched);

// Draws t ~ U{1..T} and eps ~ N(0, I), then evaluates the estimator at them.
RedSample red_estimate(const Field2D& x, const EpsilonPredictor& pred,
                       const NoiseSchedule& sched, Rng& rng, bool use_weight = false);

// Deterministic variant with (t, epsilon) injected; red_estimate delegates
// here, and tests pin the draw through it.
RedSample red_estimate_at(const Field2D& x, int t, const Field2D& epsilon,
                          const EpsilonPredictor& pred, const NoiseSchedule& sched,
                          bool use_weight = false);

}  // namespace redfwi
