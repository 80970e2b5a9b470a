#pragma once

#include <string>
#include <vector>

#include "nfmi/grid.hpp"

namespace nfmi::ports {

// TE11 cutoff of a dielectric-filled circular guide of radius a.
double te11_cutoff(double guide_radius, double eps_r);

// TE10 cutoff of a rectangular guide of broad-wall width a.
double te10_cutoff(double broad_wall, double eps_r);

// Transverse E-field profile sampled at Yee edge midpoints on one z-plane,
// normalized to unit L2 norm with edge-area weights. The per-step modal
// amplitude is the area-weighted inner product with the instantaneous field.
struct ModeProfile {
  struct Sample {
    int comp; // 0 = Ex, 1 = Ey
    int i, j;
    double value;
    double area;
  };
  std::string kind;
  int plane_k = 0;
  double cutoff_hz = 0.0;
  double eps_fill = 1.0;
  double pol_angle = 0.0;
  double guide_radius = 0.0; // circular modes only
  std::vector<Sample> samples;

  double squared_norm() const;
};

// TE11 of a circular guide centered at (cx, cy); pol_angle = 0 polarizes the
// center E-field along +x.
ModeProfile te11_profile(double guide_radius, double eps_r,
                         const mesh::GridSpec& grid, int plane_k,
                         double pol_angle, double cx = 0.0, double cy = 0.0);

// TE10 of a rectangular aperture [x0, x0+a] x [y0, y0+b] (E along y).
ModeProfile te10_profile(double x0, double y0, double a, double b,
                         double eps_r, const mesh::GridSpec& grid,
                         int plane_k);

} // namespace nfmi::ports
