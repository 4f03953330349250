#pragma once

#include <cstddef>
#include <vector>

#include "redfwi/field.hpp"
#include "redfwi/velocity.hpp"
#include "redfwi/wave.hpp"

namespace redfwi {

// Data misfit and its exact gradient with respect to the velocity model,
// computed by transposing the discrete time-stepping scheme (including the
// sponge taper and the padding replication).

struct MisfitReport {
  double value = 0.0;
  Field2D gradient;  // d(value)/d(velocity), ny x nx, units 1/(m/s)
};

struct AdjointOptions {
  SimOptions sim{};
  // Cap on stored forward wavefields per shot. Exceeding it without
  // checkpointing enabled raises ResourceError.
  size_t memory_budget_bytes = static_cast<size_t>(2) << 30;
  // 0 = store every step; k > 0 = keep a checkpoint every k steps and
  // recompute each segment during the reverse sweep.
  int checkpoint_interval = 0;
};

// Sum over masked (shot, receiver, time) of (observed - simulated)^2, where
// the simulation is normalized by observed.norm_factor.
double misfit(const VelocityModel& m, const AcquisitionGeometry& geom,
              const SeismicSurvey& observed, const SimOptions& opts = {});

// Misfit value plus its gradient, summed over shots in source order.
MisfitReport misfit_gradient(const VelocityModel& m, const AcquisitionGeometry& geom,
                             const SeismicSurvey& observed, const AdjointOptions& opts = {});

// Reverse-mode of the raw forward map for one shot: gradient of
// <gather, seed> with respect to velocity, seed being a receivers x nt
// data-space vector. Used by the adjoint (dot-product) test.
Field2D adjoint_apply(const VelocityModel& m, const AcquisitionGeometry& geom, int shot_index,
                      const std::vector<double>& seed, const AdjointOptions& opts = {});

}  // namespace redfwi
