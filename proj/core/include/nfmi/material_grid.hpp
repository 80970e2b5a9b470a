#pragma once

#include <cstdint>
#include <vector>

#include "nfmi/grid.hpp"
#include "nfmi/scene.hpp"

namespace nfmi::mesh {

struct EdgeMaterial {
  double eps_r = 1.0;
  double sigma = 0.0;
  bool pec = false;
};

// Per-Yee-E-edge material assignment. Arrays are padded to
// (nx+1) x (ny+1) x (nz+1) so that the solver can use one index map for all
// components; entries outside each component's logical range stay at the PEC
// index and are never touched.
struct MaterialGrid {
  int nx = 0, ny = 0, nz = 0;
  std::vector<std::uint16_t> ex, ey, ez;
  std::vector<EdgeMaterial> table; // index 0 is always PEC

  std::int64_t stride_j() const { return nx + 1; }
  std::int64_t stride_k() const { return std::int64_t(nx + 1) * (ny + 1); }
  std::int64_t idx(int i, int j, int k) const {
    return (std::int64_t(k) * (ny + 1) + j) * (nx + 1) + i;
  }
  std::size_t padded_size() const {
    return std::size_t(nx + 1) * (ny + 1) * (nz + 1);
  }

  double max_eps_r() const;
  bool identical(const MaterialGrid& o) const;
};

// Paints the scene onto the grid: dielectric assignment by cell-center
// containment (edges take the mean of their adjacent cells), PEC assignment
// by edge-midpoint containment. Later paints overwrite earlier ones; a
// dielectric painted over metal un-flags the covered edges.
MaterialGrid rasterize(const Scene& scene, const GridSpec& grid);

} // namespace nfmi::mesh
