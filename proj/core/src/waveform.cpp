#include "nfmi/waveform.hpp"

#include <cmath>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

namespace nfmi::ports {

double GaussianSine::operator()(double t) const {
  const double u = t - t0;
  return std::exp(-0.5 * u * u / (tau * tau)) * std::sin(2.0 * kPi * f0 * u);
}

GaussianSine excitation_waveform(double f_lo, double f_hi) {
  if (!(f_lo > 0.0) || !(f_hi > f_lo)) {
    throw InvalidSpec("excitation_waveform: need 0 < f_lo < f_hi");
  }
  GaussianSine w;
  w.f_lo = f_lo;
  w.f_hi = f_hi;
  w.f0 = 0.5 * (f_lo + f_hi);

  // -3 dB at the band edges: exp(-d^2 / (2 s^2)) >= 10^(-3/20).
  const double half_band = 0.5 * (f_hi - f_lo);
  const double s_min = half_band / std::sqrt(2.0 * (3.0 / 20.0) * std::log(10.0));
  // -60 dB at DC: exp(-f0^2 / (2 s^2)) <= 1e-3.
  const double s_max = w.f0 / std::sqrt(2.0 * std::log(1e3));
  if (s_min > s_max) {
    throw InvalidSpec("excitation_waveform: band too wide for a Gaussian pulse "
                      "meeting the DC suppression requirement");
  }
  w.sigma_f = s_min;
  w.tau = 1.0 / (2.0 * kPi * w.sigma_f);
  w.t0 = 7.0 * w.tau; // start sample suppressed below 1e-10
  return w;
}

} // namespace nfmi::ports
