#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "redfwi/errors.hpp"
#include "redfwi/velocity.hpp"
#include "support.hpp"

using namespace redfwi;

namespace {

FamilySpec base_spec() {
  FamilySpec fs;
  fs.ny = 16;
  fs.nx = 16;
  fs.seed = 42;
  return fs;
}

}  // namespace

TEST_CASE("velocity: single-layer spec gives a constant model") {
  FamilySpec fs = base_spec();
  fs.layer_count_min = fs.layer_count_max = 1;
  VelocityModel m = generate(fs, 1)[0];
  double v0 = m.values(0, 0);
  for (size_t k = 0; k < m.values.size(); ++k) CHECK(m.values[k] == v0);
}

TEST_CASE("velocity: three flat layers partition the rows into bands") {
  FamilySpec fs = base_spec();
  fs.layer_count_min = fs.layer_count_max = 3;
  fs.v_min = 1500.0;
  fs.v_max = 3500.0;
  VelocityModel m = generate(fs, 1)[0];

  // rows are constant, and the distinct row values are exactly the three
  // evenly spaced velocities in depth order
  std::vector<double> row_vals;
  for (int i = 0; i < m.ny; ++i) {
    for (int j = 1; j < m.nx; ++j) CHECK(m.values(i, j) == m.values(i, 0));
    if (row_vals.empty() || m.values(i, 0) != row_vals.back())
      row_vals.push_back(m.values(i, 0));
  }
  REQUIRE(row_vals.size() == 3);
  CHECK(row_vals[0] == doctest::Approx(1500.0));
  CHECK(row_vals[1] == doctest::Approx(2500.0));
  CHECK(row_vals[2] == doctest::Approx(3500.0));
}

TEST_CASE("velocity: generation is deterministic in the seed") {
  FamilySpec fs = base_spec();
  fs.family = Family::CurvedFault;
  auto a = generate(fs, 3);
  auto b = generate(fs, 3);
  for (int i = 0; i < 3; ++i) CHECK(testsup::bitwise_equal(a[i].values, b[i].values));
  // different models within one batch, and a different seed changes them
  CHECK(!testsup::bitwise_equal(a[0].values, a[1].values));
  fs.seed = 43;
  auto c = generate(fs, 1);
  CHECK(!testsup::bitwise_equal(a[0].values, c[0].values));
}

TEST_CASE("velocity: velocity increases with depth on average") {
  for (Family fam : {Family::FlatLayers, Family::CurvedLayers, Family::FlatFault,
                     Family::CurvedFault}) {
    FamilySpec fs;
    fs.family = fam;
    fs.ny = 48;
    fs.nx = 48;
    fs.seed = 7;
    for (const VelocityModel& m : generate(fs, 4)) {
      double top = 0.0, bottom = 0.0;
      int half = m.ny / 2;
      for (int i = 0; i < half; ++i)
        for (int j = 0; j < m.nx; ++j) top += m.values(i, j);
      for (int i = m.ny - half; i < m.ny; ++i)
        for (int j = 0; j < m.nx; ++j) bottom += m.values(i, j);
      CHECK(bottom > top);
    }
  }
}

TEST_CASE("velocity: fault families contain a lateral discontinuity") {
  FamilySpec fs;
  fs.ny = 48;
  fs.nx = 48;
  fs.seed = 11;

  fs.family = Family::FlatLayers;
  VelocityModel flat = generate(fs, 1)[0];
  double max_jump = 0.0;
  for (int i = 0; i < flat.ny; ++i)
    for (int j = 0; j + 1 < flat.nx; ++j)
      max_jump = std::max(max_jump, std::abs(flat.values(i, j + 1) - flat.values(i, j)));
  CHECK(max_jump == 0.0);  // flat layers have no horizontal variation

  fs.family = Family::FlatFault;
  for (const VelocityModel& m : generate(fs, 4)) {
    max_jump = 0.0;
    for (int i = 0; i < m.ny; ++i)
      for (int j = 0; j + 1 < m.nx; ++j)
        max_jump = std::max(max_jump, std::abs(m.values(i, j + 1) - m.values(i, j)));
    CHECK(max_jump > 0.0);
  }
}

TEST_CASE("velocity: generated models respect the configured range") {
  FamilySpec fs;
  fs.family = Family::CurvedFault;
  fs.ny = 40;
  fs.nx = 40;
  fs.v_min = 1800.0;
  fs.v_max = 4200.0;
  fs.seed = 5;
  for (const VelocityModel& m : generate(fs, 6)) {
    auto [lo, hi] = m.values.min_max();
    CHECK(lo >= 1800.0);
    CHECK(hi <= 4200.0);
    CHECK_NOTHROW(validate(m, fs.v_min, fs.v_max));
  }
}

TEST_CASE("velocity: spec validation rejects bad ranges") {
  FamilySpec fs = base_spec();
  fs.v_min = 3000.0;
  fs.v_max = 2000.0;
  CHECK_THROWS_AS(validate(fs), ConfigError);
  fs = base_spec();
  fs.v_max = 9000.0;
  CHECK_THROWS_AS(validate(fs), ConfigError);
  fs = base_spec();
  fs.layer_count_min = 5;
  fs.layer_count_max = 3;
  CHECK_THROWS_AS(validate(fs), ConfigError);
  fs = base_spec();
  fs.ny = 4;
  CHECK_THROWS_AS(validate(fs), ConfigError);
}

TEST_CASE("velocity: model validation flags out-of-range and non-finite cells") {
  VelocityModel m = testsup::layered(16, 16, 3, 1500, 3500);
  CHECK_NOTHROW(validate(m, 1500.0, 3500.0));
  m.values(5, 5) = 900.0;
  CHECK_THROWS_AS(validate(m, 1500.0, 3500.0), ContractError);
  m.values(5, 5) = std::nan("");
  CHECK_THROWS_AS(validate(m, 1500.0, 3500.0), ContractError);
}

TEST_CASE("velocity: gaussian smoothing fundamentals") {
  Rng rng(1);
  Field2D f = testsup::random_field(24, 30, rng, 1500.0, 4500.0);

  Field2D same = gaussian_smooth(f, 0.0);
  CHECK(testsup::bitwise_equal(f, same));

  Field2D flat(24, 30, 2222.5);
  Field2D sflat = gaussian_smooth(flat, 3.0);
  for (size_t k = 0; k < sflat.size(); ++k) CHECK(sflat[k] == doctest::Approx(2222.5).epsilon(1e-12));

  // smoothing shrinks variance around the mean
  auto variance = [](const Field2D& g) {
    double mu = 0.0;
    for (size_t k = 0; k < g.size(); ++k) mu += g[k];
    mu /= g.size();
    double s = 0.0;
    for (size_t k = 0; k < g.size(); ++k) s += (g[k] - mu) * (g[k] - mu);
    return s / g.size();
  };
  Field2D sm = gaussian_smooth(f, 2.0);
  CHECK(variance(sm) < 0.5 * variance(f));

  // wider kernels smooth more
  Field2D sm2 = gaussian_smooth(f, 6.0);
  CHECK(variance(sm2) < variance(sm));
}
