#pragma once

namespace nfmi::ports {

// First positive root of d/dx J1(x), accurate to 1e-10. This constant sets
// the TE11 cutoff of a circular guide.
double jprime1_first_root();

double bessel_j0(double x);
double bessel_j1(double x);
double bessel_j1_prime(double x);

} // namespace nfmi::ports
