#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nfmi/waveform.hpp"

namespace nfmi::ports {

// Modal-amplitude time series recorded at a port plane.
struct PortRecord {
  std::vector<double> amplitude;
  double dt = 0.0;
  GaussianSine waveform;
  bool decayed = false;    // stop threshold reached before max steps
  double peak = 0.0;       // max |amplitude| over the record

  std::complex<double> dft(double f) const;
};

struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<std::complex<double>> s11;

  double mag_db(std::size_t i) const;
  double phase_deg(std::size_t i) const;
  std::size_t nearest_index(double f) const;

  void save_csv(const std::string& path) const;
  static Spectrum load_csv(const std::string& path);
};

struct DeembedParams {
  double cutoff_hz = 0.0;
  double eps_r = 1.0;
  double distance = 0.0; // port plane -> aperture plane, meters
};

// Guide propagation constant beta(f) above cutoff.
double guide_beta(double f, double cutoff_hz, double eps_r);

// Reference-subtraction reflection coefficient de-embedded to the aperture
// plane: S11(f) = DFT[dev - ref] / DFT[ref] * exp(+2j beta d).
//
// Frequencies at or below 1.02*cutoff throw BandEdge. A frequency grid finer
// than 1/record-duration is only allowed for records whose energy has
// decayed below the stop threshold (zero padding is then exact); otherwise
// ResolutionTooFine is thrown and `insufficient_decay`, when provided, is
// set whenever either record has not decayed.
Spectrum extract_s11(const PortRecord& device, const PortRecord& reference,
                     const std::vector<double>& freqs, const DeembedParams& de,
                     bool* insufficient_decay = nullptr);

std::vector<double> uniform_band(double f_lo, double f_hi, double df);

} // namespace nfmi::ports
