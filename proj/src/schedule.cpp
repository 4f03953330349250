#include "redfwi/schedule.hpp"

#include <cmath>
#include <fstream>

#include "redfwi/errors.hpp"

namespace redfwi {

namespace {
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

double NoiseSchedule::gamma_at(int t) const {
  if (t < 1 || t > params.T)
    throw ContractError("NoiseSchedule: step t out of range [1, T]");
  return gamma[t - 1];
}

NoiseSchedule build_sigmoid_schedule(const ScheduleParams& p) {
  if (p.T < 2) throw ConfigError("schedule: T must be >= 2");
  if (!(p.start < p.end)) throw ConfigError("schedule: need start < end");
  if (!(p.tau > 0.0)) throw ConfigError("schedule: need tau > 0");
  if (!(p.gamma_min > 0.0 && p.gamma_min < 0.5))
    throw ConfigError("schedule: need 0 < gamma_min < 0.5");

  double v_s = logistic(p.start / p.tau);
  double v_e = logistic(p.end / p.tau);

  NoiseSchedule sched;
  sched.params = p;
  sched.gamma.resize(p.T);
  for (int t = 1; t <= p.T; ++t) {
    double u = static_cast<double>(t) / p.T;
    double s = (u * (p.end - p.start) + p.start) / p.tau;
    double g = (v_e - logistic(s)) / (v_e - v_s);
    sched.gamma[t - 1] = std::min(std::max(g, p.gamma_min), 1.0 - p.gamma_min);
  }
  for (int t = 2; t <= p.T; ++t)
    if (!(sched.gamma[t - 1] < sched.gamma[t - 2]))
      throw ConfigError("schedule: clamped gamma table is not strictly decreasing");
  return sched;
}

NoiseSchedule build_sigmoid_schedule(int T, double start, double end, double tau,
                                     double gamma_min) {
  return build_sigmoid_schedule(ScheduleParams{T, start, end, tau, gamma_min});
}

double snr(const NoiseSchedule& sched, int t) {
  double g = sched.gamma_at(t);
  return g / (1.0 - g);
}

double red_weight(const NoiseSchedule& sched, int t) {
  return 1.0 / std::sqrt(snr(sched, t));
}

void dump_schedule_csv(const NoiseSchedule& sched, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "t,gamma,snr,w\n";
  for (int t = 1; t <= sched.T(); ++t)
    out << t << ',' << sched.gamma_at(t) << ',' << snr(sched, t) << ','
        << red_weight(sched, t) << '\n';
}

}  // namespace redfwi
