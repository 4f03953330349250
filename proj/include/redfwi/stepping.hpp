#pragma once

// Internal explicit time-stepping machinery shared by the forward solver and
// the discrete adjoint. Buffers carry a zero ghost ring (Dirichlet outside
// the padded domain), so stencils run branch-free; the ghost ring is never
// written, which makes the free surface a pressure-release boundary.

#include <cstddef>
#include <vector>

#include "redfwi/velocity.hpp"
#include "redfwi/wave.hpp"

namespace redfwi {

struct StepGrid {
  int ny = 0, nx = 0;   // model dims
  int pad = 0;          // sponge cells on left/right/bottom
  int halo = 1;         // ghost width, space_order / 2
  int pny = 0, pnx = 0; // padded dims (model + sponge)
  int rows = 0, cols = 0;  // buffer dims (padded + ghosts)
  double dx = 0.0;

  static StepGrid make(const VelocityModel& m, const SimOptions& opts);

  size_t bufsize() const { return static_cast<size_t>(rows) * cols; }
  // buffer index of padded-domain cell (i, j), i in [0, pny), j in [0, pnx)
  size_t at(int i, int j) const {
    return static_cast<size_t>(i + halo) * cols + (j + halo);
  }
  // buffer index of model cell (i, j)
  size_t model_at(int i, int j) const { return at(i, j + pad); }
};

// State and coefficients for one propagation. `c` holds (v*dt)^2 per cell,
// `taper` the per-step sponge factor (all 1 when the sponge is disabled).
class Stepper {
 public:
  Stepper(const VelocityModel& m, double dt, const SimOptions& opts);

  const StepGrid& grid() const { return g_; }
  int space_order() const { return order_; }
  bool sponge_on() const { return sponge_on_; }

  void reset();

  // u^{n+1} = 2 u^n - u^{n-1} + c (lap(u^n) + q^n) with q^n = w at src_cell,
  // then the sponge taper multiplies both the new and the current field.
  void step(size_t src_cell, double w);

  const std::vector<double>& curr() const { return curr_; }
  const std::vector<double>& prev() const { return prev_; }
  std::vector<double>& curr() { return curr_; }
  std::vector<double>& prev() { return prev_; }
  const std::vector<double>& coeff() const { return c_; }
  const std::vector<double>& taper() const { return taper_; }

  // out = lap(u) with Dirichlet ghosts, same stencil as step()
  void apply_laplacian(const std::vector<double>& u, std::vector<double>& out) const;

  // discrete energy sum((u^n - u^{n-1})/dt)^2 / v^2 + |grad u|^2 over cells
  double energy(double dt) const;

  bool finite() const;

 private:
  StepGrid g_;
  int order_;
  bool sponge_on_;
  std::vector<double> c_, taper_;
  std::vector<double> prev_, curr_, next_;
  double inv_dx2_;
};

// Velocity replication into the padded domain and its transpose (halo
// gradient contributions fold back onto the nearest model edge cell).
std::vector<double> pad_velocity(const VelocityModel& m, const StepGrid& g);
Field2D fold_padding(const std::vector<double>& padded_grad, const StepGrid& g);

}  // namespace redfwi
