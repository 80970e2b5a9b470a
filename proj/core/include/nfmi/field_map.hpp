#pragma once

#include <complex>
#include <vector>

#include "nfmi/grid.hpp"
#include "nfmi/image.hpp"
#include "nfmi/solver.hpp"

namespace nfmi::fields {

// Single-frequency |E| map on a plane, co-located at cell centers.
struct FieldMap {
  int normal_axis = 2;
  double plane_coord = 0.0;
  double freq_hz = 0.0;
  std::vector<double> c1, c2; // in-plane sample coordinates, meters
  scan::Image2D<double> mag;  // |E| assembled from all three components
};

// Extracts the map for (plane monitor matching axis/index, frequency f) from
// a run. Throws PlaneNotRecorded when the plane or frequency was not
// registered before the run.
FieldMap dft_field_plane(const solver::RunResult& run,
                         const mesh::GridSpec& grid, int normal_axis,
                         int plane_index, double f);

// Mirrors a map across c1=0 and/or c2=0 (for runs exploiting the device's
// mirror symmetry). The first sample column/row is reflected about zero.
FieldMap mirror_expand(const FieldMap& m, bool mirror_c1, bool mirror_c2);

struct Footprint {
  double wx = 0.0, wy = 0.0; // full -3 dB widths, meters
  double peak_x = 0.0, peak_y = 0.0;
  double peak_mag = 0.0;
};

// Full widths of the half-power contour through the peak along both in-plane
// axes, with linear interpolation between samples. Throws MultiPeak when a
// second local maximum within 3 dB of the global peak exists away from it.
Footprint footprint_3db(const FieldMap& map);

struct DecaySample {
  double z = 0.0;   // distance from the aperture plane, meters
  double mag = 0.0; // |E|
};

// |E|(z) along a recorded axial line from the aperture plane outward.
std::vector<DecaySample> decay_curve(const solver::RunResult& run,
                                     const mesh::GridSpec& grid, int axis,
                                     double aperture_coord, double f);

} // namespace nfmi::fields
