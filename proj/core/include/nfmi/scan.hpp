#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nfmi/image.hpp"
#include "nfmi/resonance.hpp"
#include "nfmi/setup.hpp"
#include "nfmi/spectrum.hpp"

namespace nfmi::scan {

struct ScanPlan {
  std::vector<double> xs, ys; // lateral offset grids, meters
  double sod = 1e-3;          // standoff distance
  double step_x = 0.0, step_y = 0.0;
  std::vector<double> freqs_hz;

  void validate() const;
  int npoints() const { return int(xs.size()) * int(std::max<std::size_t>(1, ys.size())); }
};

struct ScanRecord {
  ScanPlan plan;
  std::vector<ports::Spectrum> spectra; // [iy * nx + ix]
  std::vector<std::string> status;

  const ports::Spectrum& at(int ix, int iy) const;
  void save_dir(const std::string& dir) const;
  static ScanRecord load_dir(const std::string& dir);
};

struct ScanSetup {
  mesh::ProbeSpec probe = mesh::ProbeSpec::reference_design();
  probe::ProbeDomainOptions domain;
  mesh::Scene sample;          // sample scene in aperture-centred coordinates
  ScanPlan plan;
  solver::SimConfig sim;       // per-point settings (threads forced to 1)
  int workers = 1;
  bool strict = false;
};

// One full simulation per lateral offset: the probe stays fixed and the
// sample scene is translated (equivalent to probe motion, and the probe mesh
// stays bit-identical across points). Per-point failures are recorded in the
// status array; the scan continues unless `strict`.
ScanRecord run_scan(const ScanSetup& setup);

struct FrequencyRule {
  enum Kind { ResonanceOfFirstPoint, MinOfFirstPoint, Explicit } kind =
      ResonanceOfFirstPoint;
  double explicit_hz = 0.0;
};

// Chooses the imaging frequency and snaps it to the record's grid.
double select_frequency(const ScanRecord& record, const FrequencyRule& rule);

struct ScanImage {
  Image2D<std::complex<double>> s11;
  std::vector<double> x_mm, y_mm;
  double freq_hz = 0.0;
  std::string rule;

  Image2D<double> magnitude_db() const;
  Image2D<double> phase_deg_unwrapped() const;
};

ScanImage form_image(const ScanRecord& record, double f_hz);

} // namespace nfmi::scan
