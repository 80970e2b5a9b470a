#pragma once

#include <variant>

#include "nfmi/vec3.hpp"

namespace nfmi::mesh {

struct Aabb {
  Vec3 lo, hi;
};

enum class Axis : int { X = 0, Y = 1, Z = 2 };

// Finite axis-aligned cylinder; `center` is the geometric center.
struct SolidCylinder {
  Axis axis = Axis::Z;
  Vec3 center;
  double radius = 0.0;
  double length = 0.0;
};

// Conductive iris plate normal to z: an annulus from slot_radius to
// outer_radius plus two strips of width strip_width bridging the slot from
// its rim toward the center, leaving `gap` between their tips. pol_angle
// rotates the strip axis away from +x.
struct PlateWithIris {
  double z0 = 0.0;        // bottom face
  double thickness = 0.0; // extends to z0 + thickness
  double cx = 0.0, cy = 0.0;
  double outer_radius = 0.0;
  double slot_radius = 0.0;
  double strip_width = 0.0;
  double gap = 0.0;
  double pol_angle = 0.0; // radians
};

struct Box {
  Vec3 corner;  // minimum corner
  Vec3 extents; // all positive
};

// Cylindrical void drilled into a host box from the face containing
// `mouth`, along +z for `depth` meters. Containment requires being inside
// the host box as well.
struct CylindricalHole {
  Vec3 mouth; // point on the hole axis at the mouth face
  double radius = 0.0;
  double depth = 0.0;
  Box host;
};

struct Wire {
  Vec3 a, b;
  double radius = 0.0;
};

// Points p with dot(p - point, normal) <= 0.
struct HalfSpace {
  Vec3 point;
  Vec3 normal;
};

using Shape = std::variant<SolidCylinder, PlateWithIris, Box, CylindricalHole,
                           Wire, HalfSpace>;

bool contains(const Shape& s, const Vec3& p);
Aabb bounding_box(const Shape& s);
Shape translated(const Shape& s, const Vec3& d);

// Smallest declared feature size (meters) relevant for mesh-resolution
// checks, or 0 when the shape has none (half spaces, boxes).
double smallest_feature(const Shape& s);

void validate_shape(const Shape& s);

} // namespace nfmi::mesh
