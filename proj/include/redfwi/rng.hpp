#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "redfwi/field.hpp"

namespace redfwi {

// Deterministic random stream. Normal deviates come from an explicit
// Box-Muller transform so the draw sequence is fixed by the seed alone,
// independent of standard-library distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // uniform in [0, 1)
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Field2D normal_field(int ny, int nx) {
    Field2D f(ny, nx);
    for (size_t k = 0; k < f.size(); ++k) f[k] = normal();
    return f;
  }

  // independent child stream; derivation depends only on (seed, idx), not on
  // how far this stream has been consumed
  Rng child(uint64_t idx) const {
    uint64_t s = seed_ ^ (0x9e3779b97f4a7c15ULL * (idx + 1));
    s ^= s >> 30; s *= 0xbf58476d1ce4e5b9ULL;
    s ^= s >> 27; s *= 0x94d049bb133111ebULL;
    s ^= s >> 31;
    return Rng(s);
  }

 private:
  uint64_t seed_ = 0;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace redfwi
