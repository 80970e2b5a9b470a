#include "nfmi/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "nfmi/errors.hpp"

namespace nfmi::probe {

Resonance find_resonance(const ports::Spectrum& s) {
  const std::size_t n = s.freq_hz.size();
  if (n < 20) {
    throw InvalidSpec("find_resonance: need at least 20 spectrum points");
  }
  std::size_t arg = 0;
  double best = 1e300;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = s.mag_db(i);
    if (m < best) {
      best = m;
      arg = i;
    }
  }
  if (best > -3.0) {
    throw NoResonance("find_resonance: |S11| never drops below -3 dB (min " +
                      std::to_string(best) + " dB)");
  }
  if (arg == 0 || arg + 1 == n) {
    throw EdgeResonance("find_resonance: minimum sits on the band edge");
  }

  // Three-point parabola through (f, dB); general spacing.
  const double x0 = s.freq_hz[arg - 1], x1 = s.freq_hz[arg], x2 = s.freq_hz[arg + 1];
  const double y0 = s.mag_db(arg - 1), y1 = s.mag_db(arg), y2 = s.mag_db(arg + 1);
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curv = (d12 - d01) / (x2 - x0);
  Resonance r;
  if (curv <= 0.0) {
    r.f_r = x1;
    r.depth_db = y1;
    return r;
  }
  // Vertex of the Newton-form parabola, clamped to one sample spacing.
  double xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
  const double lo = x1 - (x1 - x0), hi = x1 + (x2 - x1);
  xv = std::clamp(xv, lo, hi);
  const double yv = y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1);
  r.f_r = xv;
  r.depth_db = std::min(yv, y1);
  return r;
}

void SweepResult::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << "param,value_mm,fr_ghz,depth_db,status\n";
  char line[256];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.3f,%s\n", p.param.c_str(),
                  p.value * 1e3, p.f_r * 1e-9, p.depth_db, p.status.c_str());
    os << line;
  }
  if (!os) throw IoError("write failed: " + path);
}

} // namespace nfmi::probe
