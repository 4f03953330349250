#include <cmath>
#include <vector>

#include "doctest.h"
#include "redfwi/errors.hpp"
#include "redfwi/prior.hpp"
#include "redfwi/red.hpp"
#include "support.hpp"

using namespace redfwi;

namespace {

// returns the same field no matter the input
struct ConstPredictor : EpsilonPredictor {
  Field2D out;
  explicit ConstPredictor(Field2D f) : out(std::move(f)) {}
  Field2D predict(const Field2D&, int, const NoiseSchedule&) const override { return out; }
  std::pair<double, double> normalization_bounds() const override { return {1500.0, 4500.0}; }
};

// echoes back the field passed at construction time scaled by the input mean,
// an intentionally weird but deterministic map
struct AffineStub : EpsilonPredictor {
  Field2D a;
  double b;
  AffineStub(Field2D a_, double b_) : a(std::move(a_)), b(b_) {}
  Field2D predict(const Field2D& z, int, const NoiseSchedule&) const override {
    Field2D r(z.ny(), z.nx());
    for (size_t k = 0; k < z.size(); ++k) r[k] = a[k] * z[k] + b;
    return r;
  }
  std::pair<double, double> normalization_bounds() const override { return {1500.0, 4500.0}; }
};

}  // namespace

TEST_CASE("corruption: the stated mixing coefficients, exactly") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(1);
  Field2D x = testsup::random_field(6, 7, rng);
  Field2D eps = rng.normal_field(6, 7);

  for (int t : {1, 250, 500, 750, 1000}) {
    Field2D xt = vp_corrupt(x, t, eps, sched);
    double g = sched.gamma_at(t);
    for (size_t k = 0; k < x.size(); ++k)
      CHECK(xt[k] == std::sqrt(g) * x[k] + std::sqrt(1.0 - g) * eps[k]);
  }

  // near t = 1 the field is almost clean; near t = T it is almost pure noise
  Field2D early = vp_corrupt(x, 1, eps, sched);
  Field2D late = vp_corrupt(x, 1000, eps, sched);
  double d_early = 0.0, d_late = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    d_early = std::max(d_early, std::abs(early[k] - x[k]));
    d_late = std::max(d_late, std::abs(late[k] - eps[k]));
  }
  CHECK(d_early < 0.06);
  CHECK(d_late < 0.03);

  Field2D wrong(3, 3, 0.0);
  CHECK_THROWS_AS(vp_corrupt(x, 10, wrong, sched), ContractError);
  CHECK_THROWS_AS(vp_corrupt(x, 0, eps, sched), ContractError);
}

TEST_CASE("tweedie: inverts the corruption when the predictor knows the noise") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(2);
  Field2D x0 = testsup::random_field(8, 8, rng, -0.8, 0.8);

  for (int t : {3, 200, 500, 900}) {
    Field2D eps = rng.normal_field(8, 8);
    Field2D xt = vp_corrupt(x0, t, eps, sched);
    ConstPredictor knows(eps);
    Field2D d = tweedie_denoise(xt, t, knows, sched);
    for (size_t k = 0; k < x0.size(); ++k)
      CHECK(d[k] == doctest::Approx(x0[k]).epsilon(1e-10));
  }
}

TEST_CASE("tweedie: posterior mean for the Gaussian oracle") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(3);
  Field2D mu0 = testsup::random_field(5, 9, rng, -0.4, 0.4);
  double var0 = 0.6;
  GaussianOraclePrior prior(mu0, var0);

  for (int trial = 0; trial < 60; ++trial) {
    int t = rng.uniform_int(1, 1000);
    double g = sched.gamma_at(t);
    Field2D xt = testsup::random_field(5, 9, rng, -2.0, 2.0);
    Field2D d = tweedie_denoise(xt, t, prior, sched);
    for (size_t k = 0; k < xt.size(); ++k) {
      double want = (std::sqrt(g) * var0 * xt[k] + (1.0 - g) * mu0[k]) /
                    (g * var0 + 1.0 - g);
      CHECK(testsup::rel_to_scale(d[k], want, 1e-12) < 1e-10);
    }
  }

  // zero prior variance pins the denoised field to the mean
  GaussianOraclePrior point(mu0, 0.0);
  Field2D xt = testsup::random_field(5, 9, rng, -2.0, 2.0);
  for (int t : {1, 499, 1000}) {
    Field2D d = tweedie_denoise(xt, t, point, sched);
    for (size_t k = 0; k < d.size(); ++k)
      CHECK(std::abs(d[k] - mu0[k]) < 1e-12);
  }
}

TEST_CASE("red: perfect noise knowledge zeroes the estimator") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(4);
  Field2D x = testsup::random_field(7, 7, rng);
  Field2D eps = rng.normal_field(7, 7);
  ConstPredictor knows(eps);
  RedSample s = red_estimate_at(x, 333, eps, knows, sched);
  CHECK(s.r_hat == 0.0);
  for (size_t k = 0; k < s.grad.size(); ++k) CHECK(s.grad[k] == 0.0);
}

TEST_CASE("red: the reported value is the inner product with the gradient") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Field2D x = testsup::random_field(6, 6, rng);
    AffineStub stub(testsup::random_field(6, 6, rng, -2.0, 2.0), rng.normal());
    Rng draw(trial);
    RedSample s = red_estimate(x, stub, sched, draw, trial % 2 == 1);
    CHECK(testsup::rel_err(s.r_hat, dot(x, s.grad), 1e-12) < 1e-10);
    CHECK(s.t >= 1);
    CHECK(s.t <= 1000);
    CHECK(s.corrupted.same_shape(x));
    CHECK(s.eps_hat.same_shape(x));
  }
}

TEST_CASE("red: gradient is the stopped residual, weighted on request") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(6);
  Field2D x = testsup::random_field(6, 8, rng);
  Field2D eps = rng.normal_field(6, 8);
  AffineStub stub(testsup::random_field(6, 8, rng, -1.0, 1.0), 0.3);
  int t = 321;

  RedSample plain = red_estimate_at(x, t, eps, stub, sched, false);
  Field2D xt = vp_corrupt(x, t, eps, sched);
  Field2D eh = stub.predict(xt, t, sched);
  for (size_t k = 0; k < x.size(); ++k)
    CHECK(plain.grad[k] == doctest::Approx(eh[k] - eps[k]).epsilon(1e-14));
  CHECK(testsup::bitwise_equal(plain.corrupted, xt));
  CHECK(testsup::bitwise_equal(plain.eps_hat, eh));

  RedSample weighted = red_estimate_at(x, t, eps, stub, sched, true);
  double w = red_weight(sched, t);
  CHECK(weighted.r_hat == doctest::Approx(w * plain.r_hat).epsilon(1e-13));
  for (size_t k = 0; k < x.size(); ++k)
    CHECK(weighted.grad[k] == doctest::Approx(w * plain.grad[k]).epsilon(1e-13));
}

TEST_CASE("red: scaling the field scales the estimate linearly") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Rng rng(7);
  Field2D x = testsup::random_field(5, 5, rng);
  Field2D eps = rng.normal_field(5, 5);
  ConstPredictor frozen(rng.normal_field(5, 5));  // output ignores the input
  int t = 200;

  RedSample base = red_estimate_at(x, t, eps, frozen, sched);
  Field2D x2 = x;
  for (size_t k = 0; k < x.size(); ++k) x2[k] = 2.0 * x[k];
  RedSample twice = red_estimate_at(x2, t, eps, frozen, sched);
  CHECK(twice.r_hat == doctest::Approx(2.0 * base.r_hat).epsilon(1e-12));
  // the stop-gradient direction ignores x entirely for a frozen predictor
  CHECK(testsup::bitwise_equal(base.grad, twice.grad));
}

TEST_CASE("red: centered estimator stays within Monte Carlo error at the mean") {
  NoiseSchedule sched = build_sigmoid_schedule(ScheduleParams{});
  Field2D mu0(6, 6, 0.2);
  GaussianOraclePrior prior(mu0, 0.5);

  // at x = mu0 the estimator has zero mean over (t, eps)
  Rng rng(8);
  int n = 10000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    RedSample s = red_estimate(mu0, prior, sched, rng);
    acc += s.r_hat;
    acc2 += s.r_hat * s.r_hat;
  }
  double mean = acc / n;
  double var = acc2 / n - mean * mean;
  double se = std::sqrt(var / n);
  CHECK(std::abs(mean) < 3.0 * se);
}
