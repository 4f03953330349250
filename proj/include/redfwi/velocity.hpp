#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redfwi/field.hpp"

namespace redfwi {

// 2D grid of acoustic velocities in m/s. Rows are depth cells.
struct VelocityModel {
  int ny = 0;
  int nx = 0;
  double dx = 10.0;  // cell size, meters
  Field2D values;    // m/s

  VelocityModel() = default;
  VelocityModel(int ny_, int nx_, double dx_, double fill = 0.0)
      : ny(ny_), nx(nx_), dx(dx_), values(ny_, nx_, fill) {}
};

enum class Family { FlatLayers, CurvedLayers, FlatFault, CurvedFault };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

// Synthetic generator parameters for one structural family.
struct FamilySpec {
  Family family = Family::FlatLayers;
  int ny = 70;
  int nx = 70;
  double dx = 10.0;
  int layer_count_min = 3;
  int layer_count_max = 6;
  double v_min = 1500.0;  // m/s
  double v_max = 4500.0;  // m/s
  double curvature_amplitude = 60.0;  // meters, peak interface deflection
  double fault_throw_min = 30.0;      // meters
  double fault_throw_max = 120.0;     // meters
  uint64_t seed = 0;
};

// Throws ConfigError if ranges are invalid.
void validate(const FamilySpec& spec);

// Throws ContractError if the grid or values violate the model invariants.
void validate(const VelocityModel& m, double v_min, double v_max);

// Generates `count` models. Deterministic given spec.seed; layer velocities
// are evenly spaced over [v_min, v_max] top to bottom, so velocity always
// increases with depth. Fault families shift the stratigraphy across a
// straight or curved fault line by a sampled throw.
std::vector<VelocityModel> generate(const FamilySpec& spec, int count);

// Separable Gaussian blur, kernel truncated at radius ceil(4*sigma),
// reflective padding. sigma is in cells; sigma == 0 returns the input.
VelocityModel gaussian_smooth(const VelocityModel& m, double sigma);

Field2D gaussian_smooth(const Field2D& f, double sigma);

}  // namespace redfwi
