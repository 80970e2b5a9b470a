#pragma once

#include <cstdint>
#include <vector>

#include "nfmi/vec3.hpp"

namespace nfmi::mesh {

// Yee grid geometry: per-axis cell sizes (uniform spacing is the degenerate
// case) plus the position of the corner of cell (0,0,0). Integer planes
// carry Ey/Ez (x-planes) etc.; cell centers carry the dual lattice.
struct GridSpec {
  std::vector<double> dx, dy, dz; // cell sizes, meters
  Vec3 origin;

  int nx() const { return static_cast<int>(dx.size()); }
  int ny() const { return static_cast<int>(dy.size()); }
  int nz() const { return static_cast<int>(dz.size()); }
  std::int64_t cell_count() const {
    return std::int64_t(nx()) * ny() * nz();
  }

  double min_dx() const;
  double min_dy() const;
  double min_dz() const;

  // Coordinate of integer plane i (0..n) on each axis.
  double xe(int i) const;
  double ye(int j) const;
  double ze(int k) const;
  // Cell-center coordinate (0..n-1).
  double xc(int i) const { return xe(i) + 0.5 * dx[std::size_t(i)]; }
  double yc(int j) const { return ye(j) + 0.5 * dy[std::size_t(j)]; }
  double zc(int k) const { return ze(k) + 0.5 * dz[std::size_t(k)]; }

  // Index of the integer plane nearest to coordinate v (clamped to range).
  int nearest_xplane(double v) const;
  int nearest_yplane(double v) const;
  int nearest_zplane(double v) const;

  // Validates counts (>= 8 per axis), positive spacings, and the estimated
  // solver footprint against a memory budget in MiB. Throws InvalidSpec /
  // GridTooLarge.
  void validate(std::size_t mem_budget_mb) const;

  static std::size_t estimated_bytes_per_cell();
};

GridSpec make_uniform_grid(Vec3 lo, Vec3 hi, double delta);

// One fine-spacing request on an axis: [lo, hi] meshed at most at `delta`.
struct FineRegion {
  double lo = 0.0;
  double hi = 0.0;
  double delta = 0.0;
};

// Builds graded spacings covering [domain_lo, domain_hi]: fine regions are
// meshed uniformly at their delta, gaps transition geometrically with
// adjacent-cell ratio <= max_ratio and cells capped at delta_coarse.
// Region edges land exactly on emitted planes. Throws UnsatisfiableGrading.
std::vector<double> grade_axis(double domain_lo, double domain_hi,
                               std::vector<FineRegion> regions,
                               double delta_coarse, double max_ratio);

struct AxisGrading {
  double lo = 0.0, hi = 0.0;
  std::vector<FineRegion> regions;
  double delta_coarse = 0.0;
};

GridSpec grade_mesh(const AxisGrading& x, const AxisGrading& y,
                    const AxisGrading& z, double max_ratio);

} // namespace nfmi::mesh
