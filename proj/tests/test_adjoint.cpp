#include <cmath>
#include <vector>

#include "doctest.h"
#include "redfwi/adjoint.hpp"
#include "redfwi/errors.hpp"
#include "redfwi/velocity.hpp"
#include "redfwi/wave.hpp"
#include "support.hpp"

using namespace redfwi;

namespace {

struct Setup {
  VelocityModel truth;    // generates the observed data
  VelocityModel current;  // where gradients are evaluated
  AcquisitionGeometry geom;
  SeismicSurvey observed;
};

Setup make_setup(int ny = 16, int nx = 16, int nt = 200) {
  Setup s;
  s.truth = testsup::layered(ny, nx, 3, 1600, 2600);
  s.current = s.truth;
  s.current.values = gaussian_smooth(s.truth.values, 2.0);
  s.geom = surface_geometry(ny, nx, 1, nt, 1e-3, 15.0);
  s.observed = simulate_survey(s.truth, s.geom);
  return s;
}

}  // namespace

TEST_CASE("misfit: zero against the survey's own model") {
  Setup s = make_setup();
  CHECK(misfit(s.truth, s.geom, s.observed) == 0.0);

  MisfitReport mr = misfit_gradient(s.truth, s.geom, s.observed);
  CHECK(mr.value == 0.0);
  for (size_t k = 0; k < mr.gradient.size(); ++k) CHECK(mr.gradient[k] == 0.0);
}

TEST_CASE("misfit: constant offset contributes offset^2 per masked sample") {
  Setup s = make_setup(16, 16, 150);
  SeismicSurvey shifted = s.observed;
  for (double& x : shifted.data) x += 0.25;
  double n_samples = static_cast<double>(shifted.data.size());
  CHECK(misfit(s.truth, s.geom, shifted) ==
        doctest::Approx(0.25 * 0.25 * n_samples).epsilon(1e-12));
}

TEST_CASE("misfit: masked traces are excluded exactly") {
  Setup s = make_setup(16, 16, 150);
  VelocityModel probe = s.current;

  double full = misfit(probe, s.geom, s.observed);
  SeismicSurvey masked = s.observed;
  masked.trace_mask[3] = 0;
  masked.trace_mask[9] = 0;
  double partial = misfit(probe, s.geom, masked);

  // recompute the two dropped traces' contributions by hand
  std::vector<double> sim = simulate_shot(probe, s.geom, 0);
  double dropped = 0.0;
  for (int r : {3, 9})
    for (int t = 0; t < s.observed.nt; ++t) {
      double d = s.observed.at(0, r, t) -
                 sim[static_cast<size_t>(r) * s.observed.nt + t] / s.observed.norm_factor;
      dropped += d * d;
    }
  CHECK(partial == doctest::Approx(full - dropped).epsilon(1e-12));
}

TEST_CASE("gradient: central finite differences confirm ten random cells") {
  Setup s = make_setup(16, 16, 200);
  MisfitReport mr = misfit_gradient(s.current, s.geom, s.observed);
  REQUIRE(mr.gradient.all_finite());

  double gmax = 0.0;
  for (size_t k = 0; k < mr.gradient.size(); ++k)
    gmax = std::max(gmax, std::abs(mr.gradient[k]));
  REQUIRE(gmax > 0.0);

  Rng rng(2024);
  double h = 0.1;  // m/s
  for (int trial = 0; trial < 10; ++trial) {
    int i = rng.uniform_int(0, 15);
    int j = rng.uniform_int(0, 15);
    VelocityModel probe = s.current;
    probe.values(i, j) += h;
    double up = misfit(probe, s.geom, s.observed);
    probe.values(i, j) = s.current.values(i, j) - h;
    double dn = misfit(probe, s.geom, s.observed);
    double fd = (up - dn) / (2.0 * h);
    CHECK(testsup::rel_to_scale(mr.gradient(i, j), fd, 1e-6 * gmax) < 1e-3);
  }
}

TEST_CASE("gradient: doubling the residual doubles the gradient") {
  Setup s = make_setup(16, 16, 150);

  // obs' = 2 obs - sim/nu keeps the simulation fixed but doubles every
  // residual, so the exact gradient must double as well
  std::vector<double> sim = simulate_shot(s.current, s.geom, 0);
  SeismicSurvey doubled = s.observed;
  for (int r = 0; r < s.observed.n_receivers; ++r)
    for (int t = 0; t < s.observed.nt; ++t)
      doubled.at(0, r, t) = 2.0 * s.observed.at(0, r, t) -
                            sim[static_cast<size_t>(r) * s.observed.nt + t] /
                                s.observed.norm_factor;

  MisfitReport base = misfit_gradient(s.current, s.geom, s.observed);
  MisfitReport twice = misfit_gradient(s.current, s.geom, doubled);
  CHECK(twice.value == doctest::Approx(4.0 * base.value).epsilon(1e-10));
  double gmax = 0.0;
  for (size_t k = 0; k < base.gradient.size(); ++k)
    gmax = std::max(gmax, std::abs(base.gradient[k]));
  for (size_t k = 0; k < base.gradient.size(); ++k)
    CHECK(testsup::rel_to_scale(twice.gradient[k], 2.0 * base.gradient[k], 1e-9 * gmax) <
          1e-10);
}

TEST_CASE("adjoint_apply: dot-product identity against a directional derivative") {
  Setup s = make_setup(16, 16, 120);

  Rng rng(99);
  std::vector<double> seed(static_cast<size_t>(s.geom.n_receivers()) * s.geom.nt);
  for (double& x : seed) x = rng.normal();
  Field2D gt_seed = adjoint_apply(s.current, s.geom, 0, seed);

  Field2D dir = testsup::random_field(16, 16, rng, -1.0, 1.0);
  double lhs = dot(gt_seed, dir);

  // <seed, J dir> via Richardson-extrapolated central differences
  auto pairing = [&](double h) {
    VelocityModel up = s.current, dn = s.current;
    for (size_t k = 0; k < dir.size(); ++k) {
      up.values[k] += h * dir[k];
      dn.values[k] -= h * dir[k];
    }
    std::vector<double> gu = simulate_shot(up, s.geom, 0);
    std::vector<double> gd = simulate_shot(dn, s.geom, 0);
    double acc = 0.0;
    for (size_t k = 0; k < gu.size(); ++k) acc += seed[k] * (gu[k] - gd[k]) / (2.0 * h);
    return acc;
  };
  double c1 = pairing(0.2);
  double c2 = pairing(0.1);
  double rhs = (4.0 * c2 - c1) / 3.0;

  CHECK(testsup::rel_err(lhs, rhs) < 1e-8);
}

TEST_CASE("checkpointing: identical gradients at a fraction of the memory") {
  Setup s = make_setup(16, 16, 200);

  AdjointOptions full;
  MisfitReport a = misfit_gradient(s.current, s.geom, s.observed, full);

  for (int interval : {7, 25, 64, 200}) {
    AdjointOptions ck;
    ck.checkpoint_interval = interval;
    MisfitReport b = misfit_gradient(s.current, s.geom, s.observed, ck);
    CHECK(b.value == a.value);
    CHECK(testsup::bitwise_equal(a.gradient, b.gradient));
  }
}

TEST_CASE("checkpointing: budget enforcement and the escape hatch") {
  Setup s = make_setup(16, 16, 200);

  AdjointOptions tight;
  tight.memory_budget_bytes = 1 << 20;  // 1 MiB cannot hold 200 padded fields
  CHECK_THROWS_AS(misfit_gradient(s.current, s.geom, s.observed, tight), ResourceError);
  try {
    misfit_gradient(s.current, s.geom, s.observed, tight);
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("checkpoint") != std::string::npos);
  }

  // the same budget works once checkpointing bounds the live set
  AdjointOptions ck = tight;
  ck.checkpoint_interval = 10;
  MisfitReport ok = misfit_gradient(s.current, s.geom, s.observed, ck);
  CHECK(ok.gradient.all_finite());
}

TEST_CASE("adjoint: shape and normalization contracts") {
  Setup s = make_setup(16, 16, 120);

  SeismicSurvey wrong = s.observed;
  wrong.n_receivers = 15;
  wrong.data.resize(static_cast<size_t>(15) * 120);
  wrong.trace_mask.resize(15);
  CHECK_THROWS_AS(misfit(s.current, s.geom, wrong), ContractError);

  SeismicSurvey bad_norm = s.observed;
  bad_norm.norm_factor = 0.0;
  CHECK_THROWS_AS(misfit(s.current, s.geom, bad_norm), ContractError);
  CHECK_THROWS_AS(misfit_gradient(s.current, s.geom, bad_norm), ContractError);

  std::vector<double> short_seed(10);
  CHECK_THROWS_AS(adjoint_apply(s.current, s.geom, 0, short_seed), ContractError);
  std::vector<double> seed(static_cast<size_t>(s.geom.n_receivers()) * s.geom.nt, 0.0);
  CHECK_THROWS_AS(adjoint_apply(s.current, s.geom, 5, seed), ContractError);
}

TEST_CASE("adjoint: multi-shot gradients accumulate over sources") {
  VelocityModel truth = testsup::layered(20, 24, 3, 1600, 2400);
  VelocityModel smooth = truth;
  smooth.values = gaussian_smooth(truth.values, 2.0);
  AcquisitionGeometry both = surface_geometry(20, 24, 2, 150, 1e-3, 15.0);
  SeismicSurvey obs = simulate_survey(truth, both);

  MisfitReport two = misfit_gradient(smooth, both, obs);

  // single-shot geometries reusing the same normalization
  double total = 0.0;
  Field2D sum(20, 24, 0.0);
  for (int shot = 0; shot < 2; ++shot) {
    AcquisitionGeometry one = both;
    one.source_positions = {both.source_positions[shot]};
    SeismicSurvey obs_one;
    obs_one.n_shots = 1;
    obs_one.n_receivers = obs.n_receivers;
    obs_one.nt = obs.nt;
    obs_one.norm_factor = obs.norm_factor;
    obs_one.trace_mask.assign(obs.n_receivers, 1);
    obs_one.data.assign(obs.data.begin() + shot * obs.n_receivers * obs.nt,
                        obs.data.begin() + (shot + 1) * obs.n_receivers * obs.nt);
    MisfitReport mr = misfit_gradient(smooth, one, obs_one);
    total += mr.value;
    axpy(1.0, mr.gradient, sum);
  }
  CHECK(two.value == doctest::Approx(total).epsilon(1e-12));
  for (size_t k = 0; k < sum.size(); ++k)
    CHECK(two.gradient[k] == doctest::Approx(sum[k]).epsilon(1e-10));
}
