#include "nfmi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

namespace nfmi::ports {

std::complex<double> PortRecord::dft(double f) const {
  // Direct evaluation; equivalent to an arbitrarily fine zero-padded DFT.
  const double w = -2.0 * kPi * f * dt;
  const std::complex<double> rot = std::polar(1.0, w);
  std::complex<double> ph(1.0, 0.0), acc(0.0, 0.0);
  for (std::size_t n = 0; n < amplitude.size(); ++n) {
    acc += amplitude[n] * ph;
    ph *= rot;
    if ((n & 0xfff) == 0xfff) ph = std::polar(1.0, w * double(n + 1));
  }
  return acc * dt;
}

double Spectrum::mag_db(std::size_t i) const {
  return 20.0 * std::log10(std::abs(s11[i]) + 1e-300);
}

double Spectrum::phase_deg(std::size_t i) const {
  return std::arg(s11[i]) * 180.0 / kPi;
}

std::size_t Spectrum::nearest_index(double f) const {
  std::size_t best = 0;
  double err = std::abs(freq_hz[0] - f);
  for (std::size_t i = 1; i < freq_hz.size(); ++i) {
    const double e = std::abs(freq_hz[i] - f);
    if (e < err) {
      err = e;
      best = i;
    }
  }
  return best;
}

void Spectrum::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << "freq_hz, re_s11, im_s11, mag_db, phase_deg\n";
  char line[256];
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    std::snprintf(line, sizeof line, "%.9e, %.12e, %.12e, %.6f, %.6f\n",
                  freq_hz[i], s11[i].real(), s11[i].imag(), mag_db(i),
                  phase_deg(i));
    os << line;
  }
  if (!os) throw IoError("write failed: " + path);
}

Spectrum Spectrum::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  Spectrum sp;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find("freq_hz") != std::string::npos) continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double f, re, im;
    if (!(ls >> f >> re >> im)) {
      throw IoError(path + ": malformed spectrum row '" + line + "'");
    }
    sp.freq_hz.push_back(f);
    sp.s11.emplace_back(re, im);
  }
  if (sp.freq_hz.empty()) throw IoError(path + ": empty spectrum");
  return sp;
}

double guide_beta(double f, double cutoff_hz, double eps_r) {
  const double k = 2.0 * kPi * f * std::sqrt(eps_r) / kC0;
  const double r = cutoff_hz / f;
  return k * std::sqrt(std::max(0.0, 1.0 - r * r));
}

Spectrum extract_s11(const PortRecord& device, const PortRecord& reference,
                     const std::vector<double>& freqs, const DeembedParams& de,
                     bool* insufficient_decay) {
  if (device.dt != reference.dt) {
    throw InvalidSpec("extract_s11: device and reference dt differ");
  }
  if (device.amplitude.empty() || reference.amplitude.empty()) {
    throw InvalidSpec("extract_s11: empty port record");
  }
  if (freqs.empty()) throw InvalidSpec("extract_s11: no frequencies requested");

  const bool both_decayed = device.decayed && reference.decayed;
  if (insufficient_decay) *insufficient_decay = !both_decayed;

  // Frequency-resolution honesty: without full decay, zero padding would
  // fabricate resolution beyond 1/duration.
  double df_min = 1e300;
  std::vector<double> sorted = freqs;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    df_min = std::min(df_min, sorted[i] - sorted[i - 1]);
  }
  const double duration =
      device.dt * double(std::max(device.amplitude.size(),
                                  reference.amplitude.size()));
  if (!both_decayed && sorted.size() > 1 && df_min < 1.0 / duration) {
    throw ResolutionTooFine(
        "extract_s11: requested grid finer than 1/record-duration on a record "
        "that has not decayed");
  }

  Spectrum sp;
  sp.freq_hz = freqs;
  sp.s11.resize(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const double f = freqs[i];
    if (f <= 1.02 * de.cutoff_hz) {
      throw BandEdge("extract_s11: " + std::to_string(f * 1e-9) +
                     " GHz is within 2% of the guide cutoff");
    }
    const auto dev = device.dft(f);
    const auto ref = reference.dft(f);
    const auto raw = (dev - ref) / ref;
    const double phase = 2.0 * guide_beta(f, de.cutoff_hz, de.eps_r) * de.distance;
    sp.s11[i] = raw * std::polar(1.0, phase);
  }
  return sp;
}

std::vector<double> uniform_band(double f_lo, double f_hi, double df) {
  std::vector<double> out;
  for (double f = f_lo; f <= f_hi + 0.5 * df; f += df) out.push_back(f);
  return out;
}

} // namespace nfmi::ports
