#include "redfwi/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "redfwi/rng.hpp"

namespace redfwi {

Family family_from_string(const std::string& s) {
  if (s == "FlatLayers") return Family::FlatLayers;
  if (s == "CurvedLayers") return Family::CurvedLayers;
  if (s == "FlatFault") return Family::FlatFault;
  if (s == "CurvedFault") return Family::CurvedFault;
  throw ConfigError("unknown family: " + s);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::FlatLayers: return "FlatLayers";
    case Family::CurvedLayers: return "CurvedLayers";
    case Family::FlatFault: return "FlatFault";
    case Family::CurvedFault: return "CurvedFault";
  }
  return "?";
}

void validate(const FamilySpec& spec) {
  if (spec.ny < 8 || spec.nx < 8 || spec.dx <= 0.0)
    throw ConfigError("FamilySpec: grid must be at least 8x8 with dx > 0");
  if (!(spec.v_min > 0.0) || spec.v_min > spec.v_max)
    throw ConfigError("FamilySpec: need 0 < v_min <= v_max");
  if (spec.v_min < 1000.0 || spec.v_max > 6000.0)
    throw ConfigError("FamilySpec: velocity_range must lie within [1000, 6000] m/s");
  if (spec.layer_count_min < 2 || spec.layer_count_max > 12 ||
      spec.layer_count_min > spec.layer_count_max) {
    // single-layer (constant) models are allowed as the degenerate case
    if (!(spec.layer_count_min == 1 && spec.layer_count_max >= 1 &&
          spec.layer_count_max <= 12))
      throw ConfigError("FamilySpec: layer_count_range must be within [2, 12]");
  }
  if (spec.curvature_amplitude < 0.0)
    throw ConfigError("FamilySpec: curvature_amplitude must be >= 0");
  if (spec.fault_throw_min < 0.0 || spec.fault_throw_min > spec.fault_throw_max)
    throw ConfigError("FamilySpec: invalid fault_throw_range");
}

void validate(const VelocityModel& m, double v_min, double v_max) {
  if (m.ny < 8 || m.nx < 8 || m.dx <= 0.0)
    throw ContractError("VelocityModel: grid must be at least 8x8 with dx > 0");
  if (m.values.ny() != m.ny || m.values.nx() != m.nx)
    throw ContractError("VelocityModel: values shape does not match (ny, nx)");
  for (size_t k = 0; k < m.values.size(); ++k) {
    double v = m.values[k];
    if (!std::isfinite(v) || v < v_min || v > v_max)
      throw ContractError("VelocityModel: value outside [v_min, v_max]");
  }
}

namespace {

// Gentle random interface curve: sum of 1-3 sinusoids across the row,
// peak deflection bounded by amp_cells.
std::vector<double> random_curve(int nx, double amp_cells, Rng& rng) {
  std::vector<double> c(nx, 0.0);
  int n_waves = rng.uniform_int(1, 3);
  double budget = amp_cells / n_waves;
  for (int w = 0; w < n_waves; ++w) {
    double a = budget * (0.4 + 0.6 * rng.uniform());
    double period = nx * (0.5 + 1.0 * rng.uniform());
    double phase = 2.0 * M_PI * rng.uniform();
    for (int j = 0; j < nx; ++j)
      c[j] += a * std::sin(2.0 * M_PI * j / period + phase);
  }
  return c;
}

// L-1 distinct interface rows in [1, ny-1], sorted.
std::vector<int> random_interfaces(int ny, int layers, Rng& rng) {
  std::set<int> rows;
  while (static_cast<int>(rows.size()) < layers - 1)
    rows.insert(rng.uniform_int(1, ny - 1));
  return {rows.begin(), rows.end()};
}

// Layer index at (fractional) depth row `i` given interface rows.
int layer_of(double i, const std::vector<int>& interfaces) {
  int l = 0;
  for (int r : interfaces)
    if (i >= r) ++l;
  return l;
}

}  // namespace

std::vector<VelocityModel> generate(const FamilySpec& spec, int count) {
  validate(spec);
  if (count < 1) throw ConfigError("generate: count must be >= 1");

  bool curved = spec.family == Family::CurvedLayers || spec.family == Family::CurvedFault;
  bool faulted = spec.family == Family::FlatFault || spec.family == Family::CurvedFault;

  Rng root(spec.seed);
  std::vector<VelocityModel> out;
  out.reserve(count);

  for (int idx = 0; idx < count; ++idx) {
    Rng rng = root.child(idx);
    int layers = rng.uniform_int(spec.layer_count_min, spec.layer_count_max);
    layers = std::min(layers, spec.ny - 1);  // every band needs at least one row

    std::vector<double> vel(layers);
    for (int l = 0; l < layers; ++l)
      vel[l] = layers == 1 ? 0.5 * (spec.v_min + spec.v_max)
                           : spec.v_min + (spec.v_max - spec.v_min) * l / (layers - 1);

    std::vector<int> interfaces =
        layers > 1 ? random_interfaces(spec.ny, layers, rng) : std::vector<int>{};

    std::vector<double> curve(spec.nx, 0.0);
    if (curved && layers > 1)
      curve = random_curve(spec.nx, spec.curvature_amplitude / spec.dx, rng);

    // Fault: straight line through a pivot; stratigraphy on the downthrown
    // side is shifted by the throw.
    double fault_slope = 0.0, fault_col0 = 0.0, throw_cells = 0.0;
    int fault_sign = 1;
    std::vector<double> fault_bend(spec.ny, 0.0);
    if (faulted && layers > 1) {
      // dip between ~25 and ~70 degrees off vertical
      fault_slope = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.45 + 1.7 * rng.uniform());
      fault_col0 = spec.nx * (0.25 + 0.5 * rng.uniform());
      double throw_m = spec.fault_throw_min +
                       (spec.fault_throw_max - spec.fault_throw_min) * rng.uniform();
      throw_cells = std::max(1.0, throw_m / spec.dx);
      fault_sign = rng.uniform() < 0.5 ? -1 : 1;
      if (spec.family == Family::CurvedFault) {
        // listric-style bend of the fault trace with depth
        double bend = (rng.uniform() - 0.5) * 0.02;
        for (int i = 0; i < spec.ny; ++i) fault_bend[i] = bend * i * i;
      }
    }

    VelocityModel m(spec.ny, spec.nx, spec.dx);
    for (int i = 0; i < spec.ny; ++i) {
      for (int j = 0; j < spec.nx; ++j) {
        double depth = i - curve[j];
        if (faulted && layers > 1) {
          double fault_col = fault_col0 + fault_slope * i + fault_bend[i];
          if (j > fault_col) depth -= fault_sign * throw_cells;
        }
        m.values(i, j) = vel[layer_of(depth, interfaces)];
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

inline int reflect(int i, int n) {
  // reflective padding: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

Field2D gaussian_smooth(const Field2D& f, double sigma) {
  if (sigma < 0.0) throw ConfigError("gaussian_smooth: sigma must be >= 0");
  if (sigma == 0.0) return f;

  int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k / sigma) * (k / sigma));
    sum += kernel[k + radius];
  }
  for (double& w : kernel) w /= sum;

  int ny = f.ny(), nx = f.nx();
  Field2D tmp(ny, nx), out(ny, nx);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * f(i, reflect(j + k, nx));
      tmp(i, j) = acc;
    }
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp(reflect(i + k, ny), j);
      out(i, j) = acc;
    }
  return out;
}

VelocityModel gaussian_smooth(const VelocityModel& m, double sigma) {
  VelocityModel out = m;
  out.values = gaussian_smooth(m.values, sigma);
  return out;
}

}  // namespace redfwi
