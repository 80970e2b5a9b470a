#include "nfmi/modes.hpp"

#include <cmath>

#include "nfmi/bessel.hpp"
#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

namespace nfmi::ports {

double te11_cutoff(double guide_radius, double eps_r) {
  if (!(guide_radius > 0.0)) throw InvalidSpec("te11_cutoff: radius must be > 0");
  if (!(eps_r >= 1.0)) throw InvalidSpec("te11_cutoff: eps_r must be >= 1");
  static const double p11 = jprime1_first_root();
  return p11 * kC0 / (2.0 * kPi * guide_radius * std::sqrt(eps_r));
}

double te10_cutoff(double broad_wall, double eps_r) {
  if (!(broad_wall > 0.0)) throw InvalidSpec("te10_cutoff: width must be > 0");
  return kC0 / (2.0 * broad_wall * std::sqrt(eps_r));
}

double ModeProfile::squared_norm() const {
  double s = 0.0;
  for (const auto& smp : samples) s += smp.value * smp.value * smp.area;
  return s;
}

namespace {

// x-polarized TE11 transverse E at radius rho, azimuth phi (unnormalized).
void te11_exy(double rho, double phi, double kc, double& ex, double& ey) {
  double e_rho, e_phi;
  const double u = kc * rho;
  if (u < 1e-9) {
    e_rho = 0.5 * std::cos(phi);
    e_phi = -0.5 * std::sin(phi);
  } else {
    e_rho = bessel_j1(u) / u * std::cos(phi);
    e_phi = -bessel_j1_prime(u) * std::sin(phi);
  }
  const double c = std::cos(phi), s = std::sin(phi);
  ex = e_rho * c - e_phi * s;
  ey = e_rho * s + e_phi * c;
}

void normalize(ModeProfile& m) {
  const double n2 = m.squared_norm();
  if (!(n2 > 0.0)) throw InvalidSpec("mode profile: empty cross-section");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& s : m.samples) s.value *= inv;
}

double dual(const std::vector<double>& d, int j) {
  const int n = static_cast<int>(d.size());
  if (j <= 0) return 0.5 * d.front();
  if (j >= n) return 0.5 * d.back();
  return 0.5 * (d[std::size_t(j - 1)] + d[std::size_t(j)]);
}

} // namespace

ModeProfile te11_profile(double guide_radius, double eps_r,
                         const mesh::GridSpec& grid, int plane_k,
                         double pol_angle, double cx, double cy) {
  if (plane_k < 0 || plane_k > grid.nz()) {
    throw InvalidSpec("te11_profile: port plane outside grid");
  }
  ModeProfile m;
  m.kind = "te11";
  m.plane_k = plane_k;
  m.eps_fill = eps_r;
  m.pol_angle = pol_angle;
  m.guide_radius = guide_radius;
  m.cutoff_hz = te11_cutoff(guide_radius, eps_r);

  static const double p11 = jprime1_first_root();
  const double kc = p11 / guide_radius;
  const double ct = std::cos(pol_angle), st = std::sin(pol_angle);
  const double r2 = guide_radius * guide_radius;

  auto eval = [&](double x, double y, double& ex, double& ey) {
    // Rotate into the frame where the mode is x-polarized, evaluate, rotate
    // the field vector back.
    const double xr = ct * x + st * y;
    const double yr = -st * x + ct * y;
    const double rho = std::hypot(xr, yr);
    double exr, eyr;
    te11_exy(rho, std::atan2(yr, xr), kc, exr, eyr);
    ex = ct * exr - st * eyr;
    ey = st * exr + ct * eyr;
  };

  const int nx = grid.nx(), ny = grid.ny();
  // Ex samples at (xc(i), ye(j)).
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = grid.xc(i) - cx, y = grid.ye(j) - cy;
      if (x * x + y * y >= r2) continue;
      double ex, ey;
      eval(x, y, ex, ey);
      if (ex != 0.0) {
        m.samples.push_back({0, i, j, ex, grid.dx[std::size_t(i)] * dual(grid.dy, j)});
      }
    }
  }
  // Ey samples at (xe(i), yc(j)).
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = grid.xe(i) - cx, y = grid.yc(j) - cy;
      if (x * x + y * y >= r2) continue;
      double ex, ey;
      eval(x, y, ex, ey);
      if (ey != 0.0) {
        m.samples.push_back({1, i, j, ey, dual(grid.dx, i) * grid.dy[std::size_t(j)]});
      }
    }
  }
  normalize(m);
  return m;
}

ModeProfile te10_profile(double x0, double y0, double a, double b,
                         double eps_r, const mesh::GridSpec& grid,
                         int plane_k) {
  if (plane_k < 0 || plane_k > grid.nz()) {
    throw InvalidSpec("te10_profile: port plane outside grid");
  }
  ModeProfile m;
  m.kind = "te10";
  m.plane_k = plane_k;
  m.eps_fill = eps_r;
  m.cutoff_hz = te10_cutoff(a, eps_r);

  const int nx = grid.nx(), ny = grid.ny();
  for (int j = 0; j < ny; ++j) {
    const double y = grid.yc(j);
    if (y <= y0 || y >= y0 + b) continue;
    for (int i = 0; i <= nx; ++i) {
      const double x = grid.xe(i);
      if (x <= x0 || x >= x0 + a) continue;
      const double v = std::sin(kPi * (x - x0) / a);
      m.samples.push_back({1, i, j, v, dual(grid.dx, i) * grid.dy[std::size_t(j)]});
    }
  }
  normalize(m);
  return m;
}

} // namespace nfmi::ports
