#include "redfwi/stepping.hpp"

#include <algorithm>
#include <cmath>

#include "redfwi/errors.hpp"

namespace redfwi {

StepGrid StepGrid::make(const VelocityModel& m, const SimOptions& opts) {
  if (opts.space_order != 2 && opts.space_order != 4)
    throw ConfigError("space_order must be 2 or 4");
  StepGrid g;
  g.ny = m.ny;
  g.nx = m.nx;
  g.pad = opts.sponge_enabled ? opts.sponge_width : 0;
  g.halo = opts.space_order / 2;
  g.pny = g.ny + g.pad;
  g.pnx = g.nx + 2 * g.pad;
  g.rows = g.pny + 2 * g.halo;
  g.cols = g.pnx + 2 * g.halo;
  g.dx = m.dx;
  return g;
}

std::vector<double> pad_velocity(const VelocityModel& m, const StepGrid& g) {
  std::vector<double> v(g.bufsize(), 0.0);
  for (int i = 0; i < g.pny; ++i) {
    int mi = std::min(i, g.ny - 1);  // rows below the model copy the bottom row
    for (int j = 0; j < g.pnx; ++j) {
      int mj = std::clamp(j - g.pad, 0, g.nx - 1);
      v[g.at(i, j)] = m.values(mi, mj);
    }
  }
  return v;
}

Field2D fold_padding(const std::vector<double>& padded_grad, const StepGrid& g) {
  Field2D out(g.ny, g.nx, 0.0);
  for (int i = 0; i < g.pny; ++i) {
    int mi = std::min(i, g.ny - 1);
    for (int j = 0; j < g.pnx; ++j) {
      int mj = std::clamp(j - g.pad, 0, g.nx - 1);
      out(mi, mj) += padded_grad[g.at(i, j)];
    }
  }
  return out;
}

Stepper::Stepper(const VelocityModel& m, double dt, const SimOptions& opts)
    : g_(StepGrid::make(m, opts)),
      order_(opts.space_order),
      sponge_on_(opts.sponge_enabled && opts.sponge_width > 0),
      inv_dx2_(1.0 / (m.dx * m.dx)) {
  std::vector<double> v = pad_velocity(m, g_);
  c_.assign(g_.bufsize(), 0.0);
  for (int i = 0; i < g_.pny; ++i)
    for (int j = 0; j < g_.pnx; ++j) {
      size_t k = g_.at(i, j);
      c_[k] = (v[k] * dt) * (v[k] * dt);
    }

  taper_.assign(g_.bufsize(), 1.0);
  if (sponge_on_) {
    double s = opts.sponge_strength;
    for (int i = 0; i < g_.pny; ++i)
      for (int j = 0; j < g_.pnx; ++j) {
        int d_left = g_.pad - j;                  // >0 inside the left sponge
        int d_right = j - (g_.pnx - g_.pad - 1);  // >0 inside the right sponge
        int d_bottom = i - (g_.pny - g_.pad - 1);
        double f = 1.0;
        if (d_left > 0) f *= std::exp(-(s * d_left) * (s * d_left));
        if (d_right > 0) f *= std::exp(-(s * d_right) * (s * d_right));
        if (d_bottom > 0) f *= std::exp(-(s * d_bottom) * (s * d_bottom));
        taper_[g_.at(i, j)] = f;
      }
  }

  prev_.assign(g_.bufsize(), 0.0);
  curr_.assign(g_.bufsize(), 0.0);
  next_.assign(g_.bufsize(), 0.0);
}

void Stepper::reset() {
  std::fill(prev_.begin(), prev_.end(), 0.0);
  std::fill(curr_.begin(), curr_.end(), 0.0);
  std::fill(next_.begin(), next_.end(), 0.0);
}

void Stepper::apply_laplacian(const std::vector<double>& u, std::vector<double>& out) const {
  out.assign(g_.bufsize(), 0.0);
  const int cols = g_.cols;
  if (order_ == 2) {
    for (int i = 0; i < g_.pny; ++i) {
      const size_t base = g_.at(i, 0);
      for (int j = 0; j < g_.pnx; ++j) {
        size_t k = base + j;
        out[k] = (u[k - 1] + u[k + 1] + u[k - cols] + u[k + cols] - 4.0 * u[k]) * inv_dx2_;
      }
    }
  } else {
    const double a0 = -60.0 / 12.0, a1 = 16.0 / 12.0, a2 = -1.0 / 12.0;
    for (int i = 0; i < g_.pny; ++i) {
      const size_t base = g_.at(i, 0);
      for (int j = 0; j < g_.pnx; ++j) {
        size_t k = base + j;
        out[k] = (a0 * u[k] + a1 * (u[k - 1] + u[k + 1] + u[k - cols] + u[k + cols]) +
                  a2 * (u[k - 2] + u[k + 2] + u[k - 2 * cols] + u[k + 2 * cols])) *
                 inv_dx2_;
      }
    }
  }
}

void Stepper::step(size_t src_cell, double w) {
  const int cols = g_.cols;
  if (order_ == 2) {
    for (int i = 0; i < g_.pny; ++i) {
      const size_t base = g_.at(i, 0);
      for (int j = 0; j < g_.pnx; ++j) {
        size_t k = base + j;
        double lap =
            (curr_[k - 1] + curr_[k + 1] + curr_[k - cols] + curr_[k + cols] -
             4.0 * curr_[k]) * inv_dx2_;
        next_[k] = 2.0 * curr_[k] - prev_[k] + c_[k] * lap;
      }
    }
  } else {
    const double a0 = -60.0 / 12.0, a1 = 16.0 / 12.0, a2 = -1.0 / 12.0;
    for (int i = 0; i < g_.pny; ++i) {
      const size_t base = g_.at(i, 0);
      for (int j = 0; j < g_.pnx; ++j) {
        size_t k = base + j;
        double lap = (a0 * curr_[k] +
                      a1 * (curr_[k - 1] + curr_[k + 1] + curr_[k - cols] + curr_[k + cols]) +
                      a2 * (curr_[k - 2] + curr_[k + 2] + curr_[k - 2 * cols] +
                            curr_[k + 2 * cols])) *
                     inv_dx2_;
        next_[k] = 2.0 * curr_[k] - prev_[k] + c_[k] * lap;
      }
    }
  }
  next_[src_cell] += c_[src_cell] * w;
  if (sponge_on_) {
    for (int i = 0; i < g_.pny; ++i) {
      const size_t base = g_.at(i, 0);
      for (int j = 0; j < g_.pnx; ++j) {
        size_t k = base + j;
        next_[k] *= taper_[k];
        curr_[k] *= taper_[k];
      }
    }
  }
  std::swap(prev_, curr_);
  std::swap(curr_, next_);
}

double Stepper::energy(double dt) const {
  double e = 0.0;
  for (int i = 0; i < g_.pny; ++i)
    for (int j = 0; j < g_.pnx; ++j) {
      size_t k = g_.at(i, j);
      if (c_[k] == 0.0) continue;
      double v2 = c_[k] / (dt * dt);  // velocity squared
      double ut = (curr_[k] - prev_[k]) / dt;
      double gx = (curr_[k + 1] - curr_[k]) / g_.dx;
      double gy = (curr_[k + g_.cols] - curr_[k]) / g_.dx;
      e += ut * ut / v2 + gx * gx + gy * gy;
    }
  return e;
}

bool Stepper::finite() const {
  for (double x : curr_)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace redfwi
