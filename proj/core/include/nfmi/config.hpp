#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nfmi/scan.hpp"
#include "nfmi/setup.hpp"
#include "nfmi/sweep.hpp"

namespace nfmi::cli {

enum class ExperimentKind { Simulate, Sweep, Scan, Analyze, Render };

struct PlaneRequest {
  std::string kind = "xy";      // xy | xz | yz
  double offset = 0.0;          // xy: above the aperture face; xz/yz: absolute
  std::vector<double> freqs_hz;
};

struct AnalyzeRequest {
  std::string record_dir;
  scan::FrequencyRule rule;
  int upsample = 1;
  std::vector<double> wire_pair_mm; // optional resolvability annotation
};

struct RenderRequest {
  std::string input;  // CSV matrix or NFMG field
  std::string output; // PGM path (relative to out_dir)
};

// Fully resolved experiment description; every field has its effective
// value after defaulting, and resolved_json() reproduces it.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Simulate;
  std::string out_dir = "out";
  int workers = 1;
  long seed = 0; // reserved, unused by deterministic paths
  std::size_t mem_budget_mb = 4096;

  mesh::ProbeSpec probe_spec = mesh::ProbeSpec::reference_design();
  probe::ProbeKind probe_kind = probe::ProbeKind::IrisLoaded;
  double pol_angle = 0.0;

  double f_lo = 8e9, f_hi = 12e9, df = 20e6;

  probe::ProbeDomainOptions domain;
  solver::SimConfig sim;
  probe::Termination termination = probe::Termination::Device;
  bool dump_material_grid = false;

  std::vector<PlaneRequest> planes;
  std::vector<double> axis_line_freqs;

  probe::IrisParam sweep_param = probe::IrisParam::SlotRadius;
  std::vector<double> sweep_values;

  mesh::Scene sample;
  bool has_sample = false;
  scan::ScanPlan plan;
  scan::FrequencyRule image_rule;

  AnalyzeRequest analyze;
  RenderRequest render;

  bool strict = false;

  std::string resolved_json() const;
};

// Parses and validates a JSON experiment config. Unknown keys are rejected;
// length-like keys must carry their unit suffix (_mm, _ghz, _mhz, _deg) or a
// UnitError names the offender. Throws SchemaError with a path-to-field
// diagnostic on any violation.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

} // namespace nfmi::cli
