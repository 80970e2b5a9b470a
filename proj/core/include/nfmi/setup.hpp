#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "nfmi/grid.hpp"
#include "nfmi/scene.hpp"
#include "nfmi/solver.hpp"

namespace nfmi::probe {

enum class ProbeKind { IrisLoaded, OpenCircular, Wr90 };

enum class Termination {
  Device,            // aperture radiating into the air region
  MatchedFar,        // guide continued through the far absorber (reference)
  MatchedAtAperture, // far absorber starts at the aperture plane
  ShortAtAperture,   // PEC wall closing the guide at the aperture plane
};

// Everything needed to instantiate a solver for one run. Scenes are kept
// unrasterized so scan points can swap samples on a fixed grid.
struct DomainSetup {
  mesh::GridSpec grid;
  mesh::Scene scene;
  solver::Boundary boundary;
  solver::CpmlParams cpml;
  ports::ModeProfile source_profile;
  ports::ModeProfile port_profile;
  std::vector<ports::ModeProfile> extra_ports;
  ports::GaussianSine waveform;
  ports::DeembedParams deembed;
  double aperture_z = 0.0; // exact grid coordinate of the device plane
  int aperture_k = 0;
  bool mirror_x = false, mirror_y = false; // symmetry walls in use
  double source_amplitude = 1.0;

  std::unique_ptr<solver::FdtdSolver> make_solver(double courant = 0.95) const;
  std::unique_ptr<solver::FdtdSolver> make_solver(
      const mesh::MaterialGrid& pre_rasterized, double courant = 0.95) const;
};

// Straight circular guide on a uniform grid; the workhorse for the
// short-circuit and matched-load oracles.
struct GuideFixtureOptions {
  double guide_radius = 7.58e-3;
  double eps_fill = 2.1;
  double tan_delta_fill = 0.0003;
  double guide_length = 24e-3; // domain-z from the back wall to the aperture
  double delta = 0.25e-3;
  Termination termination = Termination::MatchedFar;
  double short_offset = 0.0;    // displace the short into the guide
  double port_distance = 4e-3;  // aperture -> port
  double port2_distance = 0.0;  // optional second port (0 = none)
  double source_distance = 13e-3;
  double f_lo = 8e9, f_hi = 12e9;
  int pml_back = 14, pml_far = 14;
  bool quarter = true; // PEC wall at x=0, PMC wall at y=0
  std::size_t mem_budget_mb = 4096;
};

DomainSetup build_guide_fixture(const GuideFixtureOptions& opt);

// Full probe radiating into an air region on a graded mesh.
struct ProbeDomainOptions {
  ProbeKind kind = ProbeKind::IrisLoaded;
  Termination termination = Termination::Device;
  double pol_angle = 0.0;
  double fine_xy = 0.2e-3;   // slot/gap region
  double coarse_xy = 0.8e-3; // outer transverse
  double fine_z = 0.1e-3;    // plate/standoff region
  double guide_dz = 1.0e-3;  // axial bulk cap (clamped to lambda/15)
  double air_depth = 8e-3;   // radiation region beyond the aperture
  double fine_z_below = 1.2e-3; // fine-z extent into the guide
  double fine_z_above = 2.4e-3; // fine-z extent beyond the plate
  double transverse_pad = 1.0e-3;
  double port_distance = 5e-3;
  double port2_distance = 0.0;
  double source_distance = 13e-3;
  double f_lo = 8e9, f_hi = 12e9;
  int pml_layers = 10, pml_back = 12;
  bool quarter = false;      // PEC x=0 + PMC y=0 (x/y-symmetric scenes only)
  bool half_y = false;       // PMC y=0 only
  double grading_ratio = 1.3;
  std::size_t mem_budget_mb = 4096;
  // Extra refinement (scan strips, samples); full-domain coordinates.
  std::vector<mesh::FineRegion> extra_fine_x, extra_fine_y, extra_fine_z;
  double extra_x_halfwidth = 0.0; // widen the domain for translated samples
  double extra_y_halfwidth = 0.0;
};

DomainSetup build_probe_domain(const mesh::ProbeSpec& spec,
                               const ProbeDomainOptions& opt);

// Same grid/ports/waveform, scene replaced by the matched guide running
// through the far absorber: the reference run for S11 extraction.
DomainSetup reference_variant(const DomainSetup& device,
                              const mesh::ProbeSpec& spec,
                              const ProbeDomainOptions& opt);

// Unloaded circular aperture (same guide, no iris, infinite flange) and the
// WR-90 rectangular open end with its finite flange.
std::pair<mesh::Scene, mesh::Scene> build_reference_probes();

// WR-90 aperture dimensions shared by scene and port construction.
inline constexpr double kWr90BroadWall = 22.86e-3;
inline constexpr double kWr90NarrowWall = 10.16e-3;
inline constexpr double kWr90FlangeX = 40.50e-3;
inline constexpr double kWr90FlangeY = 40.90e-3;

} // namespace nfmi::probe
