#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "redfwi/field.hpp"
#include "redfwi/velocity.hpp"

namespace redfwi {

// Sources, receivers and recording parameters. Positions are (row, col)
// indices into the model grid; row 0 is the free surface.
struct AcquisitionGeometry {
  std::vector<std::pair<int, int>> source_positions;
  std::vector<std::pair<int, int>> receiver_positions;
  int nt = 1000;
  double dt = 1e-3;                      // seconds
  double wavelet_peak_frequency = 15.0;  // Hz
  double source_amplitude = 1.0;

  int n_shots() const { return static_cast<int>(source_positions.size()); }
  int n_receivers() const { return static_cast<int>(receiver_positions.size()); }
};

// Receiver gathers for all shots. data is (shot, receiver, time) row-major,
// stored divided by norm_factor. trace_mask marks traces that take part in
// the misfit.
struct SeismicSurvey {
  int n_shots = 0;
  int n_receivers = 0;
  int nt = 0;
  std::vector<double> data;
  std::vector<uint8_t> trace_mask;
  double norm_factor = 1.0;

  double& at(int s, int r, int t) {
    return data[(static_cast<size_t>(s) * n_receivers + r) * nt + t];
  }
  double at(int s, int r, int t) const {
    return data[(static_cast<size_t>(s) * n_receivers + r) * nt + t];
  }
  bool masked_in(int s, int r) const {
    return trace_mask[static_cast<size_t>(s) * n_receivers + r] != 0;
  }
};

struct SimOptions {
  int sponge_width = 20;          // absorbing cells on left/right/bottom
  double sponge_strength = 0.0053;  // per-cell decay exponent
  bool sponge_enabled = true;
  int space_order = 2;  // 2 (default) or 4
  int n_threads = 1;    // shot-level parallelism
};

// Ricker wavelet sampled at n*dt, peak 1 at t0 = 1.5/f. Throws ConfigError
// when f would be unresolvable at this dt (f > 0.2/dt) or the window is
// shorter than the delay.
std::vector<double> ricker_wavelet(double peak_frequency, int nt, double dt);

// Courant stability bound of the stencil (1/sqrt(2) for 2nd-order space).
double cfl_limit(int space_order);

// Returns C = v_max * dt / dx. Throws StabilityError (naming the largest
// stable dt) if C exceeds the stencil bound.
double cfl_check(const VelocityModel& m, double dt, int space_order = 2);

void validate(const AcquisitionGeometry& geom, const VelocityModel& m);

// One shot: explicit time stepping of (1/v^2) u_tt = lap(u) + q with a free
// surface on top and an absorbing sponge on the other sides. Returns the raw
// (unnormalized) gather, receivers x nt row-major.
std::vector<double> simulate_shot(const VelocityModel& m, const AcquisitionGeometry& geom,
                                  int shot_index, const SimOptions& opts = {});

// All shots; norm_factor = max |amplitude| over every shot (1 if silent),
// data stored divided by it, full trace mask.
SeismicSurvey simulate_survey(const VelocityModel& m, const AcquisitionGeometry& geom,
                              const SimOptions& opts = {});

// n_sources equispaced at row 1, receivers at every surface cell of row 0.
AcquisitionGeometry surface_geometry(int ny, int nx, int n_sources = 5, int nt = 1000,
                                     double dt = 1e-3, double peak_frequency = 15.0);

}  // namespace redfwi
