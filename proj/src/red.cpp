#include "redfwi/red.hpp"

#include <cmath>

#include "redfwi/errors.hpp"

namespace redfwi {

Field2D vp_corrupt(const Field2D& x, int t, const Field2D& epsilon, const NoiseSchedule& sched) {
  require_same_shape(x, epsilon, "vp_corrupt");
  double g = sched.gamma_at(t);
  double sg = std::sqrt(g), s1 = std::sqrt(1.0 - g);
  Field2D out(x.ny(), x.nx());
  for (size_t k = 0; k < x.size(); ++k) out[k] = sg * x[k] + s1 * epsilon[k];
  return out;
}

Field2D tweedie_denoise(const Field2D& x_t, int t, const EpsilonPredictor& pred,
                        const NoiseSchedule& sched) {
  double g = sched.gamma_at(t);
  double sg = std::sqrt(g), s1 = std::sqrt(1.0 - g);
  Field2D ehat = pred.predict(x_t, t, sched);
  require_same_shape(ehat, x_t, "tweedie_denoise");
  Field2D out(x_t.ny(), x_t.nx());
  for (size_t k = 0; k < x_t.size(); ++k) out[k] = (x_t[k] - s1 * ehat[k]) / sg;
  return out;
}

RedSample red_estimate_at(const Field2D& x, int t, const Field2D& epsilon,
                          const EpsilonPredictor& pred, const NoiseSchedule& sched,
                          bool use_weight) {
  RedSample s;
  s.t = t;
  s.epsilon = epsilon;
  s.corrupted = vp_corrupt(x, t, epsilon, sched);
  s.eps_hat = pred.predict(s.corrupted, t, sched);
  require_same_shape(s.eps_hat, x, "red_estimate");
  double w = use_weight ? red_weight(sched, t) : 1.0;
  s.grad = Field2D(x.ny(), x.nx());
  double r = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    double d = s.eps_hat[k] - epsilon[k];
    s.grad[k] = w * d;
    r += x[k] * d;
  }
  s.r_hat = w * r;
  return s;
}

RedSample red_estimate(const Field2D& x, const EpsilonPredictor& pred,
                       const NoiseSchedule& sched, Rng& rng, bool use_weight) {
  int t = rng.uniform_int(1, sched.T());
  Field2D epsilon = rng.normal_field(x.ny(), x.nx());
  return red_estimate_at(x, t, epsilon, pred, sched, use_weight);
}

}  // namespace redfwi
