#pragma once

#include <string>
#include <vector>

#include "nfmi/resonance.hpp"
#include "nfmi/setup.hpp"

namespace nfmi::probe {

enum class IrisParam { SlotRadius, StripWidth, Gap };

std::string iris_param_name(IrisParam p);

struct SweepOptions {
  ProbeDomainOptions domain;     // grid/band settings shared by all points
  solver::SimConfig sim;         // per-point solver settings (threads = 1)
  double df = 20e6;              // spectrum spacing
  int workers = 1;               // parallel sweep points
  bool strict = false;           // rethrow per-point failures
};

// One full simulation + resonance fit per value, the other dimensions held
// at `base`. The grid is built once from the largest swept geometry and all
// points share it (and one reference run), so f_r differences come from the
// device alone. Per-point failures are recorded in the status column unless
// `strict` is set.
SweepResult sweep_iris(const mesh::ProbeSpec& base, IrisParam param,
                       const std::vector<double>& values,
                       const SweepOptions& opt);

} // namespace nfmi::probe
