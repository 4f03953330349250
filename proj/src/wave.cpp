#include "redfwi/wave.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "redfwi/errors.hpp"
#include "redfwi/stepping.hpp"

namespace redfwi {

std::vector<double> ricker_wavelet(double peak_frequency, int nt, double dt) {
  if (peak_frequency <= 0.0) throw ConfigError("ricker: peak_frequency must be > 0");
  if (nt < 1 || dt <= 0.0) throw ConfigError("ricker: nt >= 1 and dt > 0 required");
  if (peak_frequency > 0.2 / dt) {
    std::ostringstream ss;
    ss << "ricker: " << peak_frequency << " Hz is unresolvable at dt = " << dt
       << " s (dispersion guard f <= " << 0.2 / dt << " Hz)";
    throw ConfigError(ss.str());
  }
  double t0 = 1.5 / peak_frequency;
  if ((nt - 1) * dt < t0) {
    std::ostringstream ss;
    ss << "ricker: window " << (nt - 1) * dt << " s cannot contain the wavelet delay " << t0
       << " s";
    throw ConfigError(ss.str());
  }
  std::vector<double> w(nt);
  double pf = M_PI * peak_frequency;
  for (int n = 0; n < nt; ++n) {
    double d = n * dt - t0;
    double a = pf * pf * d * d;
    w[n] = (1.0 - 2.0 * a) * std::exp(-a);
  }
  return w;
}

double cfl_limit(int space_order) {
  if (space_order == 2) return 1.0 / std::sqrt(2.0);
  if (space_order == 4) return std::sqrt(3.0 / 8.0);
  throw ConfigError("space_order must be 2 or 4");
}

double cfl_check(const VelocityModel& m, double dt, int space_order) {
  if (dt < 0.0) throw ConfigError("dt must be >= 0");
  double v_max = 0.0;
  for (double v : m.values.vec()) v_max = std::max(v_max, v);
  double c = v_max * dt / m.dx;
  double bound = cfl_limit(space_order);
  if (c > bound) {
    std::ostringstream ss;
    ss << "CFL violated: C = " << c << " > " << bound << " (v_max = " << v_max
       << ", dx = " << m.dx << "); largest stable dt = " << bound * m.dx / v_max << " s";
    throw StabilityError(ss.str());
  }
  return c;
}

void validate(const AcquisitionGeometry& geom, const VelocityModel& m) {
  if (geom.nt < 1) throw ConfigError("geometry: nt must be >= 1");
  if (geom.dt <= 0.0) throw ConfigError("geometry: dt must be > 0");
  if (geom.source_positions.empty()) throw ConfigError("geometry: at least one source required");
  if (geom.receiver_positions.empty())
    throw ConfigError("geometry: at least one receiver required");
  auto inside = [&](const std::pair<int, int>& p) {
    return p.first >= 0 && p.first < m.ny && p.second >= 0 && p.second < m.nx;
  };
  for (const auto& p : geom.source_positions)
    if (!inside(p)) {
      std::ostringstream ss;
      ss << "geometry: source (" << p.first << ", " << p.second << ") outside " << m.ny << "x"
         << m.nx << " grid";
      throw ConfigError(ss.str());
    }
  for (const auto& p : geom.receiver_positions)
    if (!inside(p)) {
      std::ostringstream ss;
      ss << "geometry: receiver (" << p.first << ", " << p.second << ") outside " << m.ny << "x"
         << m.nx << " grid";
      throw ConfigError(ss.str());
    }
}

std::vector<double> simulate_shot(const VelocityModel& m, const AcquisitionGeometry& geom,
                                  int shot_index, const SimOptions& opts) {
  validate(geom, m);
  if (shot_index < 0 || shot_index >= geom.n_shots())
    throw ContractError("simulate_shot: shot_index out of range");
  cfl_check(m, geom.dt, opts.space_order);

  std::vector<double> w = ricker_wavelet(geom.wavelet_peak_frequency, geom.nt, geom.dt);
  for (double& x : w) x *= geom.source_amplitude;

  Stepper st(m, geom.dt, opts);
  const StepGrid& g = st.grid();
  auto [si, sj] = geom.source_positions[shot_index];
  size_t src = g.model_at(si, sj);

  const int nr = geom.n_receivers();
  std::vector<size_t> rec(nr);
  for (int r = 0; r < nr; ++r)
    rec[r] = g.model_at(geom.receiver_positions[r].first, geom.receiver_positions[r].second);

  std::vector<double> gather(static_cast<size_t>(nr) * geom.nt, 0.0);
  for (int n = 0; n < geom.nt; ++n) {
    st.step(src, w[n]);
    const std::vector<double>& u = st.curr();
    for (int r = 0; r < nr; ++r) gather[static_cast<size_t>(r) * geom.nt + n] = u[rec[r]];
    if ((n & 127) == 127 && !st.finite()) {
      std::ostringstream ss;
      ss << "wavefield became non-finite at step " << n << " (shot " << shot_index << ")";
      throw NumericalError(ss.str());
    }
  }
  if (!st.finite()) {
    std::ostringstream ss;
    ss << "wavefield became non-finite (shot " << shot_index << ")";
    throw NumericalError(ss.str());
  }
  return gather;
}

SeismicSurvey simulate_survey(const VelocityModel& m, const AcquisitionGeometry& geom,
                              const SimOptions& opts) {
  validate(geom, m);
  const int ns = geom.n_shots();
  const int nr = geom.n_receivers();
  SeismicSurvey sv;
  sv.n_shots = ns;
  sv.n_receivers = nr;
  sv.nt = geom.nt;
  sv.data.assign(static_cast<size_t>(ns) * nr * geom.nt, 0.0);
  sv.trace_mask.assign(static_cast<size_t>(ns) * nr, 1);

  const size_t shot_len = static_cast<size_t>(nr) * geom.nt;
  int n_workers = std::max(1, std::min(opts.n_threads, ns));
  if (n_workers == 1) {
    for (int s = 0; s < ns; ++s) {
      std::vector<double> gather = simulate_shot(m, geom, s, opts);
      std::copy(gather.begin(), gather.end(), sv.data.begin() + s * shot_len);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(n_workers);
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&, w]() {
        try {
          for (int s = w; s < ns; s += n_workers) {
            std::vector<double> gather = simulate_shot(m, geom, s, opts);
            std::copy(gather.begin(), gather.end(), sv.data.begin() + s * shot_len);
          }
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  double amax = 0.0;
  for (double x : sv.data) amax = std::max(amax, std::fabs(x));
  sv.norm_factor = amax > 0.0 ? amax : 1.0;
  if (sv.norm_factor != 1.0)
    for (double& x : sv.data) x /= sv.norm_factor;
  return sv;
}

AcquisitionGeometry surface_geometry(int ny, int nx, int n_sources, int nt, double dt,
                                     double peak_frequency) {
  if (ny < 2 || nx < 1) throw ConfigError("surface_geometry: grid too small");
  if (n_sources < 1) throw ConfigError("surface_geometry: n_sources must be >= 1");
  AcquisitionGeometry geom;
  geom.nt = nt;
  geom.dt = dt;
  geom.wavelet_peak_frequency = peak_frequency;
  for (int j = 0; j < n_sources; ++j) {
    int col = n_sources == 1
                  ? nx / 2
                  : static_cast<int>(std::lround(static_cast<double>(j) * (nx - 1) / (n_sources - 1)));
    geom.source_positions.emplace_back(1, col);
  }
  for (int j = 0; j < nx; ++j) geom.receiver_positions.emplace_back(0, j);
  return geom;
}

}  // namespace redfwi
