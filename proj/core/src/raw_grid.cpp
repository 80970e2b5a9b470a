#include "nfmi/raw_grid.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "nfmi/errors.hpp"

namespace nfmi::mesh {

namespace {

constexpr char kMagic[4] = {'N', 'F', 'M', 'G'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_header(std::ostream& os, std::uint32_t kind, const int dims[3],
                  const Vec3& origin, const std::vector<double>& sx,
                  const std::vector<double>& sy,
                  const std::vector<double>& sz) {
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, kind);
  for (int a = 0; a < 3; ++a) put_u32(os, std::uint32_t(dims[a]));
  put_f64(os, origin.x);
  put_f64(os, origin.y);
  put_f64(os, origin.z);
  for (const auto* s : {&sx, &sy, &sz}) {
    put_u32(os, std::uint32_t(s->size()));
    for (double d : *s) put_f64(os, d);
  }
}

struct Header {
  std::uint32_t kind = 0;
  int dims[3] = {0, 0, 0};
  Vec3 origin;
  std::vector<double> sx, sy, sz;
};

Header read_header(std::istream& is, const std::string& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path + ": not an NFMG file");
  }
  if (get_u32(is) != kVersion) throw IoError(path + ": unsupported version");
  Header h;
  h.kind = get_u32(is);
  for (int a = 0; a < 3; ++a) h.dims[a] = int(get_u32(is));
  h.origin = {get_f64(is), get_f64(is), get_f64(is)};
  for (auto* s : {&h.sx, &h.sy, &h.sz}) {
    s->resize(get_u32(is));
    for (double& d : *s) d = get_f64(is);
  }
  if (!is) throw IoError(path + ": truncated header");
  return h;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  return is;
}

} // namespace

void save_material_grid(const std::string& path, const GridSpec& grid,
                        const MaterialGrid& mg) {
  auto os = open_out(path);
  const int dims[3] = {mg.nx + 1, mg.ny + 1, mg.nz + 1};
  write_header(os, 1, dims, grid.origin, grid.dx, grid.dy, grid.dz);
  for (const auto* arr : {&mg.ex, &mg.ey, &mg.ez}) {
    os.write(reinterpret_cast<const char*>(arr->data()),
             std::streamsize(arr->size() * sizeof(std::uint16_t)));
  }
  put_u32(os, std::uint32_t(mg.table.size()));
  for (const auto& e : mg.table) {
    put_f64(os, e.eps_r);
    put_f64(os, e.sigma);
    put_u32(os, e.pec ? 1u : 0u);
  }
  if (!os) throw IoError("write failed: " + path);
}

MaterialGrid load_material_grid(const std::string& path, GridSpec* grid_out) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  if (h.kind != 1) throw IoError(path + ": not a material grid");
  MaterialGrid mg;
  mg.nx = int(h.sx.size());
  mg.ny = int(h.sy.size());
  mg.nz = int(h.sz.size());
  const std::size_t padded = mg.padded_size();
  if (padded != std::size_t(h.dims[0]) * h.dims[1] * h.dims[2]) {
    throw IoError(path + ": inconsistent extents");
  }
  for (auto* arr : {&mg.ex, &mg.ey, &mg.ez}) {
    arr->resize(padded);
    is.read(reinterpret_cast<char*>(arr->data()),
            std::streamsize(padded * sizeof(std::uint16_t)));
  }
  mg.table.resize(get_u32(is));
  for (auto& e : mg.table) {
    e.eps_r = get_f64(is);
    e.sigma = get_f64(is);
    e.pec = (get_u32(is) & 1u) != 0;
  }
  if (!is) throw IoError(path + ": truncated body");
  if (grid_out) {
    grid_out->dx = h.sx;
    grid_out->dy = h.sy;
    grid_out->dz = h.sz;
    grid_out->origin = h.origin;
  }
  return mg;
}

void save_real_field(const std::string& path, const RawField& f) {
  auto os = open_out(path);
  const int dims[3] = {f.nx, f.ny, f.nz};
  write_header(os, 2, dims, f.origin, f.sx, f.sy, f.sz);
  os.write(reinterpret_cast<const char*>(f.real.data()),
           std::streamsize(f.real.size() * sizeof(double)));
  if (!os) throw IoError("write failed: " + path);
}

void save_complex_field(const std::string& path, const RawField& f) {
  auto os = open_out(path);
  const int dims[3] = {f.nx, f.ny, f.nz};
  write_header(os, 3, dims, f.origin, f.sx, f.sy, f.sz);
  os.write(reinterpret_cast<const char*>(f.cplx.data()),
           std::streamsize(f.cplx.size() * 2 * sizeof(double)));
  if (!os) throw IoError("write failed: " + path);
}

RawField load_field(const std::string& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  RawField f;
  f.nx = h.dims[0];
  f.ny = h.dims[1];
  f.nz = h.dims[2];
  f.origin = h.origin;
  f.sx = h.sx;
  f.sy = h.sy;
  f.sz = h.sz;
  const std::size_t n = std::size_t(f.nx) * f.ny * f.nz;
  if (h.kind == 2) {
    f.real.resize(n);
    is.read(reinterpret_cast<char*>(f.real.data()),
            std::streamsize(n * sizeof(double)));
  } else if (h.kind == 3) {
    f.complex_valued = true;
    f.cplx.resize(n);
    is.read(reinterpret_cast<char*>(f.cplx.data()),
            std::streamsize(n * 2 * sizeof(double)));
  } else {
    throw IoError(path + ": not a field file");
  }
  if (!is) throw IoError(path + ": truncated body");
  return f;
}

} // namespace nfmi::mesh
