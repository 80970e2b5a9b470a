#pragma once

namespace nfmi::ports {

// Gaussian-modulated sinusoid covering [f_lo, f_hi]: spectrum within 3 dB of
// the peak across the band and at least 60 dB down at DC and at 2*f_hi.
struct GaussianSine {
  double f0 = 0.0;      // carrier, Hz
  double sigma_f = 0.0; // spectral std dev, Hz
  double tau = 0.0;     // envelope std dev, s
  double t0 = 0.0;      // envelope delay, s
  double f_lo = 0.0, f_hi = 0.0;

  double operator()(double t) const;
  // Time after which the envelope has decayed as far below peak as at t=0.
  double duration() const { return 2.0 * t0; }
};

GaussianSine excitation_waveform(double f_lo, double f_hi);

} // namespace nfmi::ports
