#include "redfwi/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "redfwi/errors.hpp"
#include "redfwi/stepping.hpp"

namespace redfwi {

namespace {

void check_shapes(const AcquisitionGeometry& geom, const SeismicSurvey& observed) {
  if (observed.n_shots != geom.n_shots() || observed.n_receivers != geom.n_receivers() ||
      observed.nt != geom.nt) {
    std::ostringstream ss;
    ss << "observed survey (" << observed.n_shots << ", " << observed.n_receivers << ", "
       << observed.nt << ") does not match geometry (" << geom.n_shots() << ", "
       << geom.n_receivers() << ", " << geom.nt << ")";
    throw ContractError(ss.str());
  }
  if (observed.norm_factor <= 0.0) throw ContractError("observed norm_factor must be > 0");
  size_t want = static_cast<size_t>(observed.n_shots) * observed.n_receivers * observed.nt;
  if (observed.data.size() != want || observed.trace_mask.size() != want / observed.nt)
    throw ContractError("observed survey storage does not match its declared shape");
}

// Forward propagation of one shot keeping enough state to run the exact
// transpose backwards: either every pre-step field, or checkpoints every k
// steps with segment recomputation.
class ShotAdjoint {
 public:
  ShotAdjoint(const VelocityModel& m, const AcquisitionGeometry& geom, int shot,
              const AdjointOptions& opts)
      : geom_(geom), st_(m, geom.dt, opts.sim), dt_(geom.dt) {
    validate(geom, m);
    if (shot < 0 || shot >= geom.n_shots())
      throw ContractError("adjoint: shot_index out of range");
    cfl_check(m, geom.dt, opts.sim.space_order);

    const StepGrid& g = st_.grid();
    const size_t field_bytes = g.bufsize() * sizeof(double);
    const int nt = geom.nt;
    interval_ = opts.checkpoint_interval;
    if (interval_ < 0) throw ConfigError("adjoint: checkpoint_interval must be >= 0");
    size_t need = interval_ == 0
                      ? static_cast<size_t>(nt) * field_bytes
                      : (static_cast<size_t>(nt / interval_ + 1) * 2 + interval_) * field_bytes;
    if (need > opts.memory_budget_bytes) {
      std::ostringstream ss;
      ss << "adjoint: storing forward state needs " << need << " bytes, budget "
         << opts.memory_budget_bytes;
      if (interval_ == 0) ss << "; enable checkpointing (checkpoint_interval > 0)";
      throw ResourceError(ss.str());
    }

    wavelet_ = ricker_wavelet(geom.wavelet_peak_frequency, nt, geom.dt);
    for (double& x : wavelet_) x *= geom.source_amplitude;
    src_ = g.model_at(geom.source_positions[shot].first, geom.source_positions[shot].second);
    rec_.resize(geom.n_receivers());
    for (int r = 0; r < geom.n_receivers(); ++r)
      rec_[r] = g.model_at(geom.receiver_positions[r].first, geom.receiver_positions[r].second);

    v_padded_ = pad_velocity(m, g);
    gather_.assign(static_cast<size_t>(geom.n_receivers()) * nt, 0.0);

    st_.reset();
    if (interval_ == 0) {
      states_.resize(nt);
      for (int n = 0; n < nt; ++n) {
        states_[n] = st_.curr();
        advance(n);
      }
    } else {
      int n_ckpt = nt / interval_ + 1;
      ckpt_prev_.resize(n_ckpt);
      ckpt_curr_.resize(n_ckpt);
      for (int n = 0; n < nt; ++n) {
        if (n % interval_ == 0) {
          ckpt_prev_[n / interval_] = st_.prev();
          ckpt_curr_[n / interval_] = st_.curr();
        }
        advance(n);
      }
    }
    if (!st_.finite()) {
      std::ostringstream ss;
      ss << "wavefield became non-finite (shot " << shot << ")";
      throw NumericalError(ss.str());
    }
  }

  const std::vector<double>& gather() const { return gather_; }

  // seed = d(target)/d(gather); returns d(target)/d(velocity) on the model
  // grid, chained through the (v*dt)^2 coefficient and the padding.
  Field2D reverse(const std::vector<double>& seed) const {
    const StepGrid& g = st_.grid();
    const int nt = geom_.nt;
    const int nr = static_cast<int>(rec_.size());
    if (seed.size() != static_cast<size_t>(nr) * nt)
      throw ContractError("adjoint: seed shape does not match receivers x nt");

    const std::vector<double>& taper = st_.taper();
    const std::vector<double>& c = st_.coeff();
    std::vector<double> la(g.bufsize(), 0.0), lb(g.bufsize(), 0.0);
    std::vector<double> sb(g.bufsize()), tmp(g.bufsize()), lap(g.bufsize());
    std::vector<double> grad_c(g.bufsize(), 0.0);

    std::vector<std::vector<double>> segment;  // pre-step fields of the active segment
    int seg_lo = 0;                            // first step whose state is loaded
    std::optional<Stepper> replay;
    if (interval_ == 0) {
      seg_lo = 0;
    } else {
      segment.resize(interval_);
      seg_lo = nt;  // nothing loaded yet
      replay.emplace(st_);  // reuses coefficients/taper; state overwritten per segment
    }

    for (int n = nt - 1; n >= 0; --n) {
      if (interval_ != 0 && n < seg_lo) {
        // refill the segment containing n by replaying from its checkpoint
        int k = n / interval_;
        seg_lo = k * interval_;
        int seg_hi = std::min(seg_lo + interval_, nt);
        replay->prev() = ckpt_prev_[k];
        replay->curr() = ckpt_curr_[k];
        for (int j = seg_lo; j < seg_hi; ++j) {
          segment[j - seg_lo] = replay->curr();
          replay->step(src_, wavelet_[j]);
        }
      }
      const std::vector<double>& b =
          interval_ == 0 ? states_[n] : segment[n - seg_lo];

      for (int r = 0; r < nr; ++r) lb[rec_[r]] += seed[static_cast<size_t>(r) * nt + n];
      for (size_t k = 0; k < sb.size(); ++k) sb[k] = taper[k] * lb[k];

      st_.apply_laplacian(b, lap);
      for (size_t k = 0; k < sb.size(); ++k) grad_c[k] += lap[k] * sb[k];
      grad_c[src_] += wavelet_[n] * sb[src_];

      for (size_t k = 0; k < sb.size(); ++k) tmp[k] = c[k] * sb[k];
      st_.apply_laplacian(tmp, lap);
      for (size_t k = 0; k < sb.size(); ++k) {
        lb[k] = 2.0 * sb[k] + lap[k] + taper[k] * la[k];
        la[k] = -sb[k];
      }
    }

    // c = (v dt)^2 so dc/dv = 2 v dt^2
    for (size_t k = 0; k < grad_c.size(); ++k)
      grad_c[k] *= 2.0 * v_padded_[k] * dt_ * dt_;
    return fold_padding(grad_c, g);
  }

 private:
  void advance(int n) {
    st_.step(src_, wavelet_[n]);
    const std::vector<double>& u = st_.curr();
    for (size_t r = 0; r < rec_.size(); ++r)
      gather_[r * geom_.nt + n] = u[rec_[r]];
  }

  const AcquisitionGeometry& geom_;
  Stepper st_;
  double dt_;
  int interval_ = 0;
  size_t src_ = 0;
  std::vector<size_t> rec_;
  std::vector<double> wavelet_;
  std::vector<double> v_padded_;
  std::vector<double> gather_;
  std::vector<std::vector<double>> states_;               // full-storage mode
  std::vector<std::vector<double>> ckpt_prev_, ckpt_curr_;  // checkpoint mode
};

}  // namespace

double misfit(const VelocityModel& m, const AcquisitionGeometry& geom,
              const SeismicSurvey& observed, const SimOptions& opts) {
  check_shapes(geom, observed);
  double total = 0.0;
  const double nu = observed.norm_factor;
  for (int s = 0; s < geom.n_shots(); ++s) {
    std::vector<double> gather = simulate_shot(m, geom, s, opts);
    for (int r = 0; r < geom.n_receivers(); ++r) {
      if (!observed.masked_in(s, r)) continue;
      for (int n = 0; n < geom.nt; ++n) {
        double d = observed.at(s, r, n) - gather[static_cast<size_t>(r) * geom.nt + n] / nu;
        total += d * d;
      }
    }
  }
  return total;
}

MisfitReport misfit_gradient(const VelocityModel& m, const AcquisitionGeometry& geom,
                             const SeismicSurvey& observed, const AdjointOptions& opts) {
  check_shapes(geom, observed);
  MisfitReport rep;
  rep.gradient = Field2D(m.ny, m.nx, 0.0);
  const double nu = observed.norm_factor;
  const int nr = geom.n_receivers();
  const int nt = geom.nt;
  for (int s = 0; s < geom.n_shots(); ++s) {
    ShotAdjoint sa(m, geom, s, opts);
    const std::vector<double>& gather = sa.gather();
    std::vector<double> seed(static_cast<size_t>(nr) * nt, 0.0);
    for (int r = 0; r < nr; ++r) {
      if (!observed.masked_in(s, r)) continue;
      for (int n = 0; n < nt; ++n) {
        size_t k = static_cast<size_t>(r) * nt + n;
        double d = gather[k] / nu - observed.at(s, r, n);
        rep.value += d * d;
        seed[k] = 2.0 * d / nu;  // d/d(raw) of (obs - raw/nu)^2
      }
    }
    Field2D g = sa.reverse(seed);
    for (size_t k = 0; k < g.vec().size(); ++k) rep.gradient[k] += g[k];
  }
  if (!rep.gradient.all_finite()) throw NumericalError("misfit gradient is not finite");
  return rep;
}

Field2D adjoint_apply(const VelocityModel& m, const AcquisitionGeometry& geom, int shot_index,
                      const std::vector<double>& seed, const AdjointOptions& opts) {
  ShotAdjoint sa(m, geom, shot_index, opts);
  return sa.reverse(seed);
}

}  // namespace redfwi
