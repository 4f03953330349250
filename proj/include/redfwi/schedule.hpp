#pragma once

#include <string>
#include <vector>

namespace redfwi {

// Parameters of the sigmoid signal-retention schedule.
struct ScheduleParams {
  int T = 1000;
  double start = -3.0;      // S
  double end = 3.0;         // E
  double tau = 1.0;         // sharpness
  double gamma_min = 1e-4;  // clamp floor, keeps gamma in (0, 1)
};

// Precomputed table gamma(1..T), strictly decreasing, clamped to
// [gamma_min, 1 - gamma_min].
struct NoiseSchedule {
  ScheduleParams params;
  std::vector<double> gamma;  // gamma[t-1] holds gamma(t)

  int T() const { return params.T; }
  // gamma for 1-based step t; throws ContractError when t is out of range
  double gamma_at(int t) const;
};

NoiseSchedule build_sigmoid_schedule(const ScheduleParams& p);
NoiseSchedule build_sigmoid_schedule(int T, double start, double end, double tau,
                                     double gamma_min);

// SNR(t) = gamma / (1 - gamma); strictly decreasing in t.
double snr(const NoiseSchedule& sched, int t);

// w(t) = sqrt((1 - gamma) / gamma) = 1 / sqrt(SNR(t)).
double red_weight(const NoiseSchedule& sched, int t);

// CSV with header: t,gamma,snr,w
void dump_schedule_csv(const NoiseSchedule& sched, const std::string& path);

}  // namespace redfwi
