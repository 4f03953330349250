#include "redfwi/gridfile.hpp"

#include <cfenv>
#include <cmath>
#include <cstring>
#include <fstream>

namespace redfwi {

namespace {
constexpr char kMagic[4] = {'R', 'D', 'Q', '1'};
constexpr uint32_t kDtypeF32 = 1;
constexpr uint32_t kMaxDims = 8;

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("grid file truncated in header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void save_grid(const std::string& path, const GridData& g) {
  if (g.dims.empty() || g.dims.size() > kMaxDims)
    throw ContractError("save_grid: need 1..8 dims");
  uint64_t n = 1;
  for (uint32_t d : g.dims) n *= d;
  if (n != g.values.size())
    throw ContractError("save_grid: payload length does not match dims");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  write_u32(out, kDtypeF32);
  write_u32(out, static_cast<uint32_t>(g.dims.size()));
  for (uint32_t d : g.dims) write_u32(out, d);
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(g.values.data()),
            static_cast<std::streamsize>(n * 4));
  if (!out) throw FormatError("short write to " + path);
}

GridData load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError(path + ": bad magic, not a grid file");
  uint32_t dtype = read_u32(in);
  if (dtype != kDtypeF32) throw FormatError(path + ": unsupported dtype code");
  uint32_t ndim = read_u32(in);
  if (ndim == 0 || ndim > kMaxDims) throw FormatError(path + ": bad ndim");

  GridData g;
  g.dims.resize(ndim);
  uint64_t n = 1;
  for (uint32_t& d : g.dims) {
    d = read_u32(in);
    if (d == 0) throw FormatError(path + ": zero-length dimension");
    n *= d;
  }
  if (n > (1ull << 31)) throw FormatError(path + ": dims too large");
  g.values.resize(n);
  in.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(n * 4));
  if (static_cast<uint64_t>(in.gcount()) != n * 4)
    throw FormatError(path + ": truncated payload");
  return g;
}

void save_field(const std::string& path, const Field2D& f) {
  GridData g;
  g.dims = {static_cast<uint32_t>(f.ny()), static_cast<uint32_t>(f.nx())};
  g.values.resize(f.size());
  for (size_t k = 0; k < f.size(); ++k) g.values[k] = static_cast<float>(f[k]);
  save_grid(path, g);
}

Field2D load_field(const std::string& path) {
  GridData g = load_grid(path);
  if (g.dims.size() != 2) throw FormatError(path + ": expected a 2D grid");
  Field2D f(static_cast<int>(g.dims[0]), static_cast<int>(g.dims[1]));
  for (size_t k = 0; k < f.size(); ++k) f[k] = g.values[k];
  return f;
}

void render_pgm(const Field2D& f, const std::string& path, double vmin, double vmax) {
  if (!(vmin < vmax)) throw ContractError("render_pgm: need vmin < vmax");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "P5\n" << f.nx() << " " << f.ny() << "\n255\n";
  std::vector<unsigned char> row(f.nx());
  for (int i = 0; i < f.ny(); ++i) {
    for (int j = 0; j < f.nx(); ++j) {
      double x = (f(i, j) - vmin) / (vmax - vmin) * 255.0;
      x = std::clamp(x, 0.0, 255.0);
      row[j] = static_cast<unsigned char>(std::nearbyint(x));  // ties to even
    }
    out.write(reinterpret_cast<const char*>(row.data()), f.nx());
  }
  if (!out) throw FormatError("short write to " + path);
}

}  // namespace redfwi
