#pragma once

#include <string>
#include <vector>

#include "nfmi/shapes.hpp"

namespace nfmi::mesh {

struct Material {
  std::string name;
  double eps_r = 1.0;
  double sigma = 0.0; // S/m, already includes loss-tangent contribution
  bool pec = false;

  static Material vacuum();
  // sigma = 2*pi*f_ref*eps0*eps_r*tan_delta evaluated at the band-center
  // reference (10 GHz), plus any extra static conductivity.
  static Material dielectric(std::string name, double eps_r, double tan_delta,
                             double sigma_extra = 0.0);
  static Material perfect_conductor();

  void validate() const;
};

// Ordered paint list over a background material. Later entries overwrite
// earlier ones on shared cells/edges.
struct Scene {
  std::vector<Material> materials; // index 0 is the background
  struct Paint {
    Shape shape;
    int material = 0;
  };
  std::vector<Paint> paints;

  int add_material(Material m);
  void paint(Shape s, int material);
  void validate() const;

  Scene translated(const Vec3& d) const;
  // Appends another scene's paints, remapping its material indices; the
  // other scene's background is ignored.
  void append(const Scene& other);
};

// Table-style probe parameter set for the iris-loaded circular aperture.
struct ProbeSpec {
  double waveguide_length = 0.0; // L
  double guide_radius = 0.0;     // a
  double slot_radius = 0.0;      // R
  double gap = 0.0;              // g
  double strip_width = 0.0;      // W
  double iris_thickness = 0.0;   // t_a
  double eps_fill = 2.1;
  double tan_delta_fill = 0.0003;

  void validate() const;
  static ProbeSpec reference_design(); // the published dimensions
};

inline constexpr double kGuideWallThickness = 1.6e-3;
inline constexpr double kInfiniteFlangeRadius = 1.0;

// PEC waveguide wall, dielectric fill, and the iris plate at z =
// waveguide_length. pol_angle orients the strip/gap axis relative to +x so
// the gap field is parallel to the excitation polarization at angle 0.
Scene build_probe_scene(const ProbeSpec& spec, double pol_angle);

} // namespace nfmi::mesh
