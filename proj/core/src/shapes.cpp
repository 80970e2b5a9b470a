#include "nfmi/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nfmi/errors.hpp"

namespace nfmi::mesh {

namespace {

constexpr double kBig = 1e9;

struct ContainsVisitor {
  Vec3 p;

  bool operator()(const SolidCylinder& c) const {
    const double h = 0.5 * c.length;
    double ax, r2;
    switch (c.axis) {
      case Axis::X:
        ax = p.x - c.center.x;
        r2 = sq(p.y - c.center.y) + sq(p.z - c.center.z);
        break;
      case Axis::Y:
        ax = p.y - c.center.y;
        r2 = sq(p.x - c.center.x) + sq(p.z - c.center.z);
        break;
      default:
        ax = p.z - c.center.z;
        r2 = sq(p.x - c.center.x) + sq(p.y - c.center.y);
        break;
    }
    return ax >= -h && ax < h && r2 <= c.radius * c.radius;
  }

  bool operator()(const PlateWithIris& pl) const {
    if (p.z < pl.z0 || p.z >= pl.z0 + pl.thickness) return false;
    const double dx = p.x - pl.cx;
    const double dy = p.y - pl.cy;
    const double rho2 = dx * dx + dy * dy;
    if (rho2 > pl.outer_radius * pl.outer_radius) return false;
    if (rho2 >= pl.slot_radius * pl.slot_radius) return true; // annulus metal
    // Inside the slot: metal only on the strips.
    const double c = std::cos(pl.pol_angle), s = std::sin(pl.pol_angle);
    const double xs = c * dx + s * dy;  // along strip axis
    const double ys = -s * dx + c * dy; // across strip
    return std::abs(ys) <= 0.5 * pl.strip_width && std::abs(xs) >= 0.5 * pl.gap;
  }

  bool operator()(const Box& b) const {
    return p.x >= b.corner.x && p.x < b.corner.x + b.extents.x &&
           p.y >= b.corner.y && p.y < b.corner.y + b.extents.y &&
           p.z >= b.corner.z && p.z < b.corner.z + b.extents.z;
  }

  bool operator()(const CylindricalHole& h) const {
    if (!(*this)(h.host)) return false;
    const double zlo = std::min(h.mouth.z, h.mouth.z + h.depth);
    const double zhi = std::max(h.mouth.z, h.mouth.z + h.depth);
    if (p.z < zlo || p.z >= zhi) return false;
    return sq(p.x - h.mouth.x) + sq(p.y - h.mouth.y) <= h.radius * h.radius;
  }

  bool operator()(const Wire& w) const {
    const Vec3 d = w.b - w.a;
    const double len2 = d.norm2();
    if (len2 <= 0.0) return false;
    double t = (p - w.a).dot(d) / len2;
    if (t < 0.0 || t > 1.0) return false;
    const Vec3 q = w.a + d * t;
    return (p - q).norm2() <= w.radius * w.radius;
  }

  bool operator()(const HalfSpace& h) const {
    return (p - h.point).dot(h.normal) <= 0.0;
  }

  static double sq(double v) { return v * v; }
};

Aabb cylinder_box(const SolidCylinder& c) {
  Vec3 half;
  switch (c.axis) {
    case Axis::X: half = {0.5 * c.length, c.radius, c.radius}; break;
    case Axis::Y: half = {c.radius, 0.5 * c.length, c.radius}; break;
    default: half = {c.radius, c.radius, 0.5 * c.length}; break;
  }
  return {c.center - half, c.center + half};
}

} // namespace

bool contains(const Shape& s, const Vec3& p) {
  return std::visit(ContainsVisitor{p}, s);
}

Aabb bounding_box(const Shape& s) {
  return std::visit(
      [](const auto& v) -> Aabb {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SolidCylinder>) {
          return cylinder_box(v);
        } else if constexpr (std::is_same_v<T, PlateWithIris>) {
          return {{v.cx - v.outer_radius, v.cy - v.outer_radius, v.z0},
                  {v.cx + v.outer_radius, v.cy + v.outer_radius,
                   v.z0 + v.thickness}};
        } else if constexpr (std::is_same_v<T, Box>) {
          return {v.corner, v.corner + v.extents};
        } else if constexpr (std::is_same_v<T, CylindricalHole>) {
          return {v.host.corner, v.host.corner + v.host.extents};
        } else if constexpr (std::is_same_v<T, Wire>) {
          const Vec3 lo{std::min(v.a.x, v.b.x) - v.radius,
                        std::min(v.a.y, v.b.y) - v.radius,
                        std::min(v.a.z, v.b.z) - v.radius};
          const Vec3 hi{std::max(v.a.x, v.b.x) + v.radius,
                        std::max(v.a.y, v.b.y) + v.radius,
                        std::max(v.a.z, v.b.z) + v.radius};
          return {lo, hi};
        } else {
          return {{-kBig, -kBig, -kBig}, {kBig, kBig, kBig}};
        }
      },
      s);
}

Shape translated(const Shape& s, const Vec3& d) {
  return std::visit(
      [&](auto v) -> Shape {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SolidCylinder>) {
          v.center = v.center + d;
        } else if constexpr (std::is_same_v<T, PlateWithIris>) {
          v.cx += d.x;
          v.cy += d.y;
          v.z0 += d.z;
        } else if constexpr (std::is_same_v<T, Box>) {
          v.corner = v.corner + d;
        } else if constexpr (std::is_same_v<T, CylindricalHole>) {
          v.mouth = v.mouth + d;
          v.host.corner = v.host.corner + d;
        } else if constexpr (std::is_same_v<T, Wire>) {
          v.a = v.a + d;
          v.b = v.b + d;
        } else if constexpr (std::is_same_v<T, HalfSpace>) {
          v.point = v.point + d;
        }
        return v;
      },
      s);
}

double smallest_feature(const Shape& s) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PlateWithIris>) {
          return std::min({v.gap, v.strip_width, v.thickness});
        } else if constexpr (std::is_same_v<T, Wire>) {
          return v.radius;
        } else if constexpr (std::is_same_v<T, SolidCylinder>) {
          return std::min(v.radius, v.length);
        } else {
          return 0.0;
        }
      },
      s);
}

void validate_shape(const Shape& s) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        auto positive = [](double d, const char* what) {
          if (!(d > 0.0) || !std::isfinite(d)) {
            throw InvalidSpec(std::string("shape: ") + what +
                              " must be finite and positive");
          }
        };
        if constexpr (std::is_same_v<T, SolidCylinder>) {
          positive(v.radius, "cylinder radius");
          positive(v.length, "cylinder length");
        } else if constexpr (std::is_same_v<T, PlateWithIris>) {
          positive(v.thickness, "iris thickness");
          positive(v.outer_radius, "iris outer radius");
          positive(v.slot_radius, "iris slot radius");
          positive(v.strip_width, "iris strip width");
          positive(v.gap, "iris gap");
          if (!(v.gap < 2.0 * v.slot_radius)) {
            throw InvalidSpec("iris: gap must be smaller than the slot diameter");
          }
          if (!(v.slot_radius < v.outer_radius)) {
            throw InvalidSpec("iris: slot radius must be below the outer radius");
          }
        } else if constexpr (std::is_same_v<T, Box>) {
          positive(v.extents.x, "box x extent");
          positive(v.extents.y, "box y extent");
          positive(v.extents.z, "box z extent");
        } else if constexpr (std::is_same_v<T, CylindricalHole>) {
          positive(v.radius, "hole radius");
          if (v.depth == 0.0 || !std::isfinite(v.depth)) {
            throw InvalidSpec("hole: depth must be finite and nonzero");
          }
          validate_shape(Shape{v.host});
        } else if constexpr (std::is_same_v<T, Wire>) {
          positive(v.radius, "wire radius");
          if ((v.b - v.a).norm2() <= 0.0) {
            throw InvalidSpec("wire: endpoints coincide");
          }
        } else if constexpr (std::is_same_v<T, HalfSpace>) {
          if (v.normal.norm2() <= 0.0) {
            throw InvalidSpec("half space: zero normal");
          }
        }
      },
      s);
}

} // namespace nfmi::mesh
