#pragma once

#include <string>
#include <vector>

#include "nfmi/spectrum.hpp"

namespace nfmi::probe {

struct Resonance {
  double f_r = 0.0;     // Hz
  double depth_db = 0.0; // refined |S11| minimum
};

// Parabolic-refined argmin of |S11| in dB over the three samples around the
// discrete minimum. Throws NoResonance when the minimum stays above -3 dB
// and EdgeResonance when the argmin is the first or last sample.
Resonance find_resonance(const ports::Spectrum& s);

struct SweepPoint {
  std::string param;
  double value = 0.0; // meters
  double f_r = 0.0;
  double depth_db = 0.0;
  std::string status; // "ok" or the error class
};

struct SweepResult {
  std::vector<SweepPoint> points;
  void save_csv(const std::string& path) const;
};

} // namespace nfmi::probe
