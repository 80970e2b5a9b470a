#include "nfmi/scene.hpp"

#include <cmath>
#include <utility>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

namespace nfmi::mesh {

Material Material::vacuum() { return {"air", 1.0, 0.0, false}; }

Material Material::dielectric(std::string name, double eps_r, double tan_delta,
                              double sigma_extra) {
  Material m;
  m.name = std::move(name);
  m.eps_r = eps_r;
  m.sigma = 2.0 * kPi * kLossTangentRefHz * kEps0 * eps_r * tan_delta +
            sigma_extra;
  if (tan_delta < 0.0) throw InvalidSpec("material: tan_delta must be >= 0");
  m.validate();
  return m;
}

Material Material::perfect_conductor() { return {"pec", 1.0, 0.0, true}; }

void Material::validate() const {
  if (pec) return;
  if (!(eps_r >= 1.0) || !std::isfinite(eps_r)) {
    throw InvalidSpec("material '" + name + "': eps_r must be >= 1");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidSpec("material '" + name + "': sigma must be >= 0");
  }
}

int Scene::add_material(Material m) {
  m.validate();
  materials.push_back(std::move(m));
  return static_cast<int>(materials.size()) - 1;
}

void Scene::paint(Shape s, int material) {
  validate_shape(s);
  if (material < 0 || material >= static_cast<int>(materials.size())) {
    throw InvalidSpec("scene: paint references undefined material");
  }
  paints.push_back({std::move(s), material});
}

void Scene::validate() const {
  if (materials.empty()) throw InvalidSpec("scene: no background material");
  for (const auto& m : materials) m.validate();
  for (const auto& p : paints) {
    validate_shape(p.shape);
    if (p.material < 0 || p.material >= static_cast<int>(materials.size())) {
      throw InvalidSpec("scene: paint references undefined material");
    }
  }
}

Scene Scene::translated(const Vec3& d) const {
  Scene out = *this;
  for (auto& p : out.paints) p.shape = mesh::translated(p.shape, d);
  return out;
}

void Scene::append(const Scene& other) {
  std::vector<int> remap(other.materials.size(), -1);
  for (std::size_t i = 1; i < other.materials.size(); ++i) {
    remap[i] = add_material(other.materials[i]);
  }
  remap[0] = 0; // background-on-background paints keep the local background
  for (const auto& p : other.paints) {
    paints.push_back({p.shape, remap[std::size_t(p.material)]});
  }
}

void ProbeSpec::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidSpec(std::string("probe spec: ") + what +
                        " must be finite and positive");
    }
  };
  positive(waveguide_length, "waveguide length");
  positive(guide_radius, "guide radius");
  positive(slot_radius, "slot radius");
  positive(gap, "gap");
  positive(strip_width, "strip width");
  positive(iris_thickness, "iris thickness");
  if (!(slot_radius < guide_radius)) {
    throw InvalidSpec("probe spec: slot radius must be below the guide radius");
  }
  if (!(gap < 2.0 * slot_radius)) {
    throw InvalidSpec("probe spec: gap must be smaller than the slot diameter");
  }
  if (!(waveguide_length > 4.0 * guide_radius)) {
    throw InvalidSpec("probe spec: waveguide length must exceed 4x radius");
  }
  if (!(eps_fill >= 1.0)) {
    throw InvalidSpec("probe spec: eps_fill must be >= 1");
  }
  if (tan_delta_fill < 0.0) {
    throw InvalidSpec("probe spec: tan_delta_fill must be >= 0");
  }
}

ProbeSpec ProbeSpec::reference_design() {
  ProbeSpec s;
  s.waveguide_length = 40.0e-3;
  s.guide_radius = 7.58e-3;
  s.slot_radius = 2.975e-3;
  s.gap = 0.5e-3;
  s.strip_width = 1.0e-3;
  s.iris_thickness = 0.2e-3;
  s.eps_fill = 2.1;
  s.tan_delta_fill = 0.0003;
  return s;
}

Scene build_probe_scene(const ProbeSpec& spec, double pol_angle) {
  spec.validate();
  Scene scene;
  scene.add_material(Material::vacuum());
  const int pec = scene.add_material(Material::perfect_conductor());
  const int fill = scene.add_material(
      Material::dielectric("fill", spec.eps_fill, spec.tan_delta_fill));

  const double L = spec.waveguide_length;
  // Wall blank, then the fill overwrites the bore; the leftover shell is the
  // guide wall.
  scene.paint(SolidCylinder{Axis::Z,
                            {0.0, 0.0, 0.5 * L},
                            spec.guide_radius + kGuideWallThickness,
                            L},
              pec);
  scene.paint(SolidCylinder{Axis::Z, {0.0, 0.0, 0.5 * L}, spec.guide_radius, L},
              fill);
  scene.paint(PlateWithIris{L, spec.iris_thickness, 0.0, 0.0,
                            kInfiniteFlangeRadius, spec.slot_radius,
                            spec.strip_width, spec.gap, pol_angle},
              pec);
  return scene;
}

} // namespace nfmi::mesh
