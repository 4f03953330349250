#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redfwi/field.hpp"

namespace redfwi {

// Binary array container. Layout, all little-endian:
//   magic "RDQ1" | u32 dtype (1 = f32) | u32 ndim | u32 dims[ndim] | payload
// Payload is row-major f32, 4 * product(dims) bytes.
struct GridData {
  std::vector<uint32_t> dims;
  std::vector<float> values;
};

void save_grid(const std::string& path, const GridData& g);
GridData load_grid(const std::string& path);

// Field2D convenience wrappers (f32 on disk).
void save_field(const std::string& path, const Field2D& f);
Field2D load_field(const std::string& path);

// 8-bit binary PGM, values mapped linearly from [vmin, vmax] to [0, 255]
// (clipped, ties rounded to even).
void render_pgm(const Field2D& f, const std::string& path, double vmin, double vmax);

}  // namespace redfwi
