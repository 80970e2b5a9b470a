#include "nfmi/bessel.hpp"

#include <cmath>

namespace nfmi::ports {

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

double bessel_j1(double x) {
  const double v = std::cyl_bessel_j(1.0, std::abs(x));
  return x < 0.0 ? -v : v;
}

double bessel_j1_prime(double x) {
  // J1'(x) = J0(x) - J1(x)/x, with the x->0 limit 1/2.
  if (std::abs(x) < 1e-8) return 0.5;
  return bessel_j0(x) - bessel_j1(x) / x;
}

double jprime1_first_root() {
  // Bisection on J1' over (1, 2); the bracket holds since J1'(1) > 0 and
  // J1'(2) < 0.
  double lo = 1.0, hi = 2.0;
  double flo = bessel_j1_prime(lo);
  for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j1_prime(mid);
    if ((flo > 0.0) == (fm > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace nfmi::ports
