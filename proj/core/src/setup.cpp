#include "nfmi/setup.hpp"

#include <algorithm>
#include <cmath>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"
#include "nfmi/material_grid.hpp"

namespace nfmi::probe {

namespace {

constexpr double kClip = 1.0; // "infinite" extent for clipped shapes

void paint_guide(mesh::Scene& scene, int pec, int fill, double radius,
                 double z_from, double z_to) {
  const double len = z_to - z_from;
  scene.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                  {0.0, 0.0, z_from + 0.5 * len},
                                  radius + mesh::kGuideWallThickness, len},
              pec);
  scene.paint(
      mesh::SolidCylinder{mesh::Axis::Z, {0.0, 0.0, z_from + 0.5 * len}, radius, len},
      fill);
}

} // namespace

std::unique_ptr<solver::FdtdSolver> DomainSetup::make_solver(
    double courant) const {
  const auto mg = mesh::rasterize(scene, grid);
  return make_solver(mg, courant);
}

std::unique_ptr<solver::FdtdSolver> DomainSetup::make_solver(
    const mesh::MaterialGrid& mg, double courant) const {
  const double dt =
      solver::stable_dt(grid, courant, solver::fastest_phase_velocity(mg));
  auto sol = std::make_unique<solver::FdtdSolver>(grid, mg, boundary, cpml, dt);
  sol->set_source({source_profile, waveform, source_amplitude});
  sol->add_port(port_profile);
  for (const auto& p : extra_ports) sol->add_port(p);
  return sol;
}

DomainSetup build_guide_fixture(const GuideFixtureOptions& opt) {
  if (!(opt.guide_length > opt.source_distance)) {
    throw InvalidSpec("guide fixture: source would sit behind the back wall");
  }
  DomainSetup d;
  d.waveform = ports::excitation_waveform(opt.f_lo, opt.f_hi);

  const double a = opt.guide_radius;
  const double xt = a + mesh::kGuideWallThickness;
  const double z_beyond = 3e-3 + opt.pml_far * opt.delta;
  const double z_hi = opt.guide_length + z_beyond;
  const Vec3 lo = opt.quarter ? Vec3{0.0, 0.0, 0.0} : Vec3{-xt, -xt, 0.0};
  d.grid = mesh::make_uniform_grid(lo, {xt, xt, z_hi}, opt.delta);
  d.grid.validate(opt.mem_budget_mb);

  // Snap functional planes to the grid and use the exact coordinates.
  d.aperture_k = d.grid.nearest_zplane(opt.guide_length);
  d.aperture_z = d.grid.ze(d.aperture_k);
  const int k_port = d.grid.nearest_zplane(d.aperture_z - opt.port_distance);
  const int k_src = d.grid.nearest_zplane(d.aperture_z - opt.source_distance);

  d.scene.add_material(mesh::Material::vacuum());
  const int pec = d.scene.add_material(mesh::Material::perfect_conductor());
  const int fill = d.scene.add_material(
      mesh::Material::dielectric("fill", opt.eps_fill, opt.tan_delta_fill));

  switch (opt.termination) {
    case Termination::MatchedFar:
    case Termination::MatchedAtAperture:
      paint_guide(d.scene, pec, fill, a, -kClip, z_hi + kClip);
      break;
    case Termination::ShortAtAperture: {
      const int k_short =
          d.grid.nearest_zplane(d.aperture_z - opt.short_offset);
      const double z_short = d.grid.ze(k_short);
      paint_guide(d.scene, pec, fill, a, -kClip, z_short);
      d.scene.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                        {0.0, 0.0, z_short + 1.25e-3},
                                        xt, 2.5e-3},
                    pec);
      break;
    }
    case Termination::Device:
      throw InvalidSpec("guide fixture: Device termination needs a probe scene");
  }

  for (int f = 0; f < 6; ++f) d.boundary.kind[f] = solver::FaceKind::Pec;
  if (opt.quarter) d.boundary.kind[solver::YLo] = solver::FaceKind::Pmc;
  d.boundary.kind[solver::ZLo] = solver::FaceKind::Cpml;
  d.boundary.thickness[solver::ZLo] = opt.pml_back;
  d.boundary.face_eps[solver::ZLo] = opt.eps_fill;
  d.boundary.kind[solver::ZHi] = solver::FaceKind::Cpml;
  d.boundary.face_eps[solver::ZHi] = opt.eps_fill;
  d.boundary.thickness[solver::ZHi] =
      opt.termination == Termination::MatchedAtAperture
          ? d.grid.nz() - d.aperture_k
          : opt.pml_far;

  d.source_profile =
      ports::te11_profile(a, opt.eps_fill, d.grid, k_src, 0.0);
  d.port_profile = ports::te11_profile(a, opt.eps_fill, d.grid, k_port, 0.0);
  if (opt.port2_distance > 0.0) {
    const int k2 = d.grid.nearest_zplane(d.aperture_z - opt.port2_distance);
    d.extra_ports.push_back(
        ports::te11_profile(a, opt.eps_fill, d.grid, k2, 0.0));
  }
  d.deembed.cutoff_hz = ports::te11_cutoff(a, opt.eps_fill);
  d.deembed.eps_r = opt.eps_fill;
  d.deembed.distance = d.aperture_z - d.grid.ze(k_port);
  d.mirror_x = opt.quarter;
  d.mirror_y = opt.quarter;
  return d;
}

namespace {

struct ZLayout {
  double z_lo = 0.0, z_hi = 0.0;
  std::vector<mesh::FineRegion> regions;
};

ZLayout probe_z_layout(double L, double t_a, const ProbeDomainOptions& opt,
                       double guide_dz) {
  ZLayout z;
  // Fine band around the plate, edges placed at exact multiples of fine_z
  // away from the aperture so the aperture plane lands on the lattice.
  const double below = std::ceil(opt.fine_z_below / opt.fine_z) * opt.fine_z;
  const double above = std::ceil((t_a + opt.fine_z_above) / opt.fine_z) * opt.fine_z;
  z.regions.push_back({L - below, L + above, opt.fine_z});
  z.z_lo = (L - opt.source_distance) - 3e-3 - (opt.pml_back + 1) * guide_dz;
  z.z_hi = L + t_a + opt.air_depth + (opt.pml_layers + 1) * opt.coarse_xy;
  // Keep the radiation region reasonably sampled; leave room for the
  // geometric transition out of the fine band.
  const double air_dz = std::max(opt.coarse_xy, opt.fine_z);
  const double air_lo = L + above + 2e-3;
  if (air_lo + 4.0 * air_dz < z.z_hi) {
    z.regions.push_back({air_lo, z.z_hi, air_dz});
  }
  return z;
}

} // namespace

DomainSetup build_probe_domain(const mesh::ProbeSpec& spec,
                               const ProbeDomainOptions& opt) {
  spec.validate();
  if (opt.quarter && opt.half_y) {
    throw InvalidSpec("probe domain: choose quarter or half symmetry, not both");
  }
  DomainSetup d;
  d.waveform = ports::excitation_waveform(opt.f_lo, opt.f_hi);
  d.mirror_x = opt.quarter;
  d.mirror_y = opt.quarter || opt.half_y;

  const bool wr90 = opt.kind == ProbeKind::Wr90;
  const double L = spec.waveguide_length;
  const double t_a = spec.iris_thickness;
  const double eps_fill = wr90 ? 1.0 : spec.eps_fill;

  // Axial bulk spacing: at most lambda/15 in the densest material at f_hi.
  const double lam_min = kC0 / (opt.f_hi * std::sqrt(std::max(spec.eps_fill, 1.0)));
  const double guide_dz = std::min(opt.guide_dz, lam_min / 15.0);

  // Transverse extents.
  const double rguide = wr90 ? 0.5 * std::max(kWr90FlangeX, kWr90FlangeY)
                             : spec.guide_radius + mesh::kGuideWallThickness;
  const double pml_len = (opt.pml_layers + 1) * opt.coarse_xy;
  const double xh =
      rguide + opt.transverse_pad + pml_len + opt.extra_x_halfwidth;
  const double yh =
      rguide + opt.transverse_pad + pml_len + opt.extra_y_halfwidth;

  // Fine band covering the slot and gap (or the whole aperture for WR-90).
  const double r_fine = wr90 ? 0.5 * kWr90BroadWall + 1e-3
                             : spec.slot_radius + spec.strip_width + 0.8e-3;

  mesh::AxisGrading gx, gy, gz;
  gx.lo = opt.quarter ? 0.0 : -xh;
  gx.hi = xh;
  gx.delta_coarse = opt.coarse_xy;
  gx.regions.push_back({opt.quarter ? 0.0 : -r_fine, r_fine, opt.fine_xy});
  for (const auto& r : opt.extra_fine_x) {
    if (opt.quarter && r.hi <= 0.0) continue;
    gx.regions.push_back(
        {opt.quarter ? std::max(0.0, r.lo) : r.lo, r.hi, r.delta});
  }
  gy.lo = (opt.quarter || opt.half_y) ? 0.0 : -yh;
  gy.hi = yh;
  gy.delta_coarse = opt.coarse_xy;
  const double rf_y = wr90 ? 0.5 * kWr90NarrowWall + 1e-3 : r_fine;
  gy.regions.push_back({(opt.quarter || opt.half_y) ? 0.0 : -rf_y, rf_y, opt.fine_xy});
  for (const auto& r : opt.extra_fine_y) {
    if ((opt.quarter || opt.half_y) && r.hi <= 0.0) continue;
    gy.regions.push_back(
        {(opt.quarter || opt.half_y) ? std::max(0.0, r.lo) : r.lo, r.hi, r.delta});
  }
  const ZLayout zl = probe_z_layout(L, t_a, opt, guide_dz);
  gz.lo = zl.z_lo;
  gz.hi = zl.z_hi;
  gz.delta_coarse = guide_dz;
  gz.regions = zl.regions;
  for (const auto& r : opt.extra_fine_z) gz.regions.push_back(r);

  d.grid = mesh::grade_mesh(gx, gy, gz, opt.grading_ratio);
  d.grid.validate(opt.mem_budget_mb);

  d.aperture_k = d.grid.nearest_zplane(L);
  d.aperture_z = d.grid.ze(d.aperture_k);
  if (std::abs(d.aperture_z - L) > 1e-9) {
    throw InvalidSpec("probe domain: aperture plane failed to land on the grid");
  }

  // Scene: guide extension through the back absorber, then the device.
  d.scene.add_material(mesh::Material::vacuum());
  const int pec = d.scene.add_material(mesh::Material::perfect_conductor());
  switch (opt.kind) {
    case ProbeKind::IrisLoaded: {
      const int fill = d.scene.add_material(mesh::Material::dielectric(
          "fill", spec.eps_fill, spec.tan_delta_fill));
      paint_guide(d.scene, pec, fill, spec.guide_radius, zl.z_lo - 1e-3, 0.0);
      d.scene.append(mesh::build_probe_scene(spec, opt.pol_angle));
      break;
    }
    case ProbeKind::OpenCircular: {
      const int fill = d.scene.add_material(mesh::Material::dielectric(
          "fill", spec.eps_fill, spec.tan_delta_fill));
      paint_guide(d.scene, pec, fill, spec.guide_radius, zl.z_lo - 1e-3, L);
      d.scene.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                        {0.0, 0.0, L + 0.5 * t_a},
                                        mesh::kInfiniteFlangeRadius, t_a},
                    pec);
      d.scene.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                        {0.0, 0.0, L + 0.5 * t_a},
                                        spec.guide_radius, t_a},
                    0);
      break;
    }
    case ProbeKind::Wr90: {
      const double w = mesh::kGuideWallThickness;
      const double ax = kWr90BroadWall, by = kWr90NarrowWall;
      d.scene.paint(mesh::Box{{-0.5 * ax - w, -0.5 * by - w, zl.z_lo - 1e-3},
                              {ax + 2 * w, by + 2 * w, L - zl.z_lo + 1e-3}},
                    pec);
      d.scene.paint(mesh::Box{{-0.5 * ax, -0.5 * by, zl.z_lo - 1e-3},
                              {ax, by, L - zl.z_lo + 1e-3}},
                    0);
      d.scene.paint(mesh::Box{{-0.5 * kWr90FlangeX, -0.5 * kWr90FlangeY, L},
                              {kWr90FlangeX, kWr90FlangeY, t_a}},
                    pec);
      d.scene.paint(mesh::Box{{-0.5 * ax, -0.5 * by, L}, {ax, by, t_a}}, 0);
      break;
    }
  }

  const int k_port = d.grid.nearest_zplane(d.aperture_z - opt.port_distance);
  const int k_src = d.grid.nearest_zplane(d.aperture_z - opt.source_distance);
  if (wr90) {
    d.source_profile = ports::te10_profile(-0.5 * kWr90BroadWall,
                                           -0.5 * kWr90NarrowWall, kWr90BroadWall,
                                           kWr90NarrowWall, 1.0, d.grid, k_src);
    d.port_profile = ports::te10_profile(-0.5 * kWr90BroadWall,
                                         -0.5 * kWr90NarrowWall, kWr90BroadWall,
                                         kWr90NarrowWall, 1.0, d.grid, k_port);
    d.deembed.cutoff_hz = ports::te10_cutoff(kWr90BroadWall, 1.0);
  } else {
    d.source_profile = ports::te11_profile(spec.guide_radius, eps_fill, d.grid,
                                           k_src, opt.pol_angle);
    d.port_profile = ports::te11_profile(spec.guide_radius, eps_fill, d.grid,
                                         k_port, opt.pol_angle);
    d.deembed.cutoff_hz = ports::te11_cutoff(spec.guide_radius, eps_fill);
  }
  if (opt.port2_distance > 0.0) {
    const int k2 = d.grid.nearest_zplane(d.aperture_z - opt.port2_distance);
    d.extra_ports.push_back(
        wr90 ? ports::te10_profile(-0.5 * kWr90BroadWall, -0.5 * kWr90NarrowWall,
                                   kWr90BroadWall, kWr90NarrowWall, 1.0, d.grid, k2)
             : ports::te11_profile(spec.guide_radius, eps_fill, d.grid, k2,
                                   opt.pol_angle));
  }
  d.deembed.eps_r = eps_fill;
  d.deembed.distance = d.aperture_z - d.grid.ze(k_port);

  // Boundaries: symmetry walls where requested, absorbers elsewhere.
  auto& b = d.boundary;
  b = solver::Boundary::all_cpml(opt.pml_layers);
  b.kind[solver::XLo] = opt.quarter ? solver::FaceKind::Pec : solver::FaceKind::Cpml;
  b.kind[solver::YLo] = (opt.quarter || opt.half_y) ? solver::FaceKind::Pmc
                                                    : solver::FaceKind::Cpml;
  b.thickness[solver::ZLo] = opt.pml_back;
  b.face_eps[solver::ZLo] = eps_fill;
  if (opt.termination == Termination::MatchedAtAperture) {
    b.thickness[solver::ZHi] = d.grid.nz() - d.aperture_k;
    b.face_eps[solver::ZHi] = eps_fill;
  }
  return d;
}

DomainSetup reference_variant(const DomainSetup& device,
                              const mesh::ProbeSpec& spec,
                              const ProbeDomainOptions& opt) {
  DomainSetup ref = device;
  ref.scene = mesh::Scene{};
  ref.scene.add_material(mesh::Material::vacuum());
  const int pec = ref.scene.add_material(mesh::Material::perfect_conductor());
  const double z_lo = ref.grid.origin.z;
  const double z_hi = ref.grid.ze(ref.grid.nz());
  if (opt.kind == ProbeKind::Wr90) {
    const double w = mesh::kGuideWallThickness;
    ref.scene.paint(
        mesh::Box{{-0.5 * kWr90BroadWall - w, -0.5 * kWr90NarrowWall - w, z_lo - 1e-3},
                  {kWr90BroadWall + 2 * w, kWr90NarrowWall + 2 * w,
                   z_hi - z_lo + 2e-3}},
        pec);
    ref.scene.paint(mesh::Box{{-0.5 * kWr90BroadWall, -0.5 * kWr90NarrowWall,
                               z_lo - 1e-3},
                              {kWr90BroadWall, kWr90NarrowWall, z_hi - z_lo + 2e-3}},
                    0);
  } else {
    const int fill = ref.scene.add_material(mesh::Material::dielectric(
        "fill", spec.eps_fill, spec.tan_delta_fill));
    paint_guide(ref.scene, pec, fill, spec.guide_radius, z_lo - 1e-3,
                z_hi + 1e-3);
  }
  // The reference always terminates with the standard far absorber.
  ref.boundary.kind[solver::ZHi] = solver::FaceKind::Cpml;
  ref.boundary.thickness[solver::ZHi] = opt.pml_layers;
  ref.boundary.face_eps[solver::ZHi] = ref.deembed.eps_r;
  return ref;
}

std::pair<mesh::Scene, mesh::Scene> build_reference_probes() {
  const auto spec = mesh::ProbeSpec::reference_design();
  const double L = spec.waveguide_length;
  const double t_a = spec.iris_thickness;

  mesh::Scene circ;
  circ.add_material(mesh::Material::vacuum());
  {
    const int pec = circ.add_material(mesh::Material::perfect_conductor());
    const int fill = circ.add_material(mesh::Material::dielectric(
        "fill", spec.eps_fill, spec.tan_delta_fill));
    paint_guide(circ, pec, fill, spec.guide_radius, 0.0, L);
    circ.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                   {0.0, 0.0, L + 0.5 * t_a},
                                   mesh::kInfiniteFlangeRadius, t_a},
               pec);
    circ.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                   {0.0, 0.0, L + 0.5 * t_a},
                                   spec.guide_radius, t_a},
               0);
  }

  mesh::Scene rect;
  rect.add_material(mesh::Material::vacuum());
  {
    const int pec = rect.add_material(mesh::Material::perfect_conductor());
    const double w = mesh::kGuideWallThickness;
    rect.paint(mesh::Box{{-0.5 * kWr90BroadWall - w, -0.5 * kWr90NarrowWall - w, 0.0},
                         {kWr90BroadWall + 2 * w, kWr90NarrowWall + 2 * w, L}},
               pec);
    rect.paint(mesh::Box{{-0.5 * kWr90BroadWall, -0.5 * kWr90NarrowWall, 0.0},
                         {kWr90BroadWall, kWr90NarrowWall, L}},
               0);
    rect.paint(mesh::Box{{-0.5 * kWr90FlangeX, -0.5 * kWr90FlangeY, L},
                         {kWr90FlangeX, kWr90FlangeY, t_a}},
               pec);
    rect.paint(mesh::Box{{-0.5 * kWr90BroadWall, -0.5 * kWr90NarrowWall, L},
                         {kWr90BroadWall, kWr90NarrowWall, t_a}},
               0);
  }
  return {std::move(circ), std::move(rect)};
}

} // namespace nfmi::probe
