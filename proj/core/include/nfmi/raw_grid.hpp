#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nfmi/grid.hpp"
#include "nfmi/material_grid.hpp"

namespace nfmi::mesh {

// "NFMG" raw-grid binary container (little endian):
//   char[4]  magic "NFMG"
//   u32      version (1)
//   u32      kind: 1 = material grid, 2 = real field, 3 = complex field
//   u32[3]   array extents (per stored array)
//   f64[3]   origin (meters)
//   u32 nsx, f64[nsx] dx, u32 nsy, f64[nsy] dy, u32 nsz, f64[nsz] dz
// body, row-major (x fastest):
//   kind 1: three u16 arrays (Ex, Ey, Ez edge-material ids) of the padded
//           extents, then u32 table_count and per-entry f64 eps_r, f64 sigma,
//           u32 flags (bit0 = PEC)
//   kind 2: f64 array
//   kind 3: f64 interleaved re/im array

void save_material_grid(const std::string& path, const GridSpec& grid,
                        const MaterialGrid& mg);
MaterialGrid load_material_grid(const std::string& path, GridSpec* grid_out);

struct RawField {
  int nx = 0, ny = 0, nz = 0;
  Vec3 origin;
  std::vector<double> sx, sy, sz;
  std::vector<double> real;                 // kind 2
  std::vector<std::complex<double>> cplx;   // kind 3
  bool complex_valued = false;
};

void save_real_field(const std::string& path, const RawField& f);
void save_complex_field(const std::string& path, const RawField& f);
RawField load_field(const std::string& path);

} // namespace nfmi::mesh
