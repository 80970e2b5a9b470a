#include "nfmi/solver.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

namespace nfmi::solver {

void CpmlParams::validate() const {
  if (thickness < 6) throw InvalidSpec("cpml: thickness must be >= 6 layers");
  if (!(order >= 2.0 && order <= 4.0)) {
    throw InvalidSpec("cpml: polynomial order must lie in [2, 4]");
  }
  if (!(kappa_max >= 1.0)) throw InvalidSpec("cpml: kappa_max must be >= 1");
  if (!(sigma_scale > 0.0)) throw InvalidSpec("cpml: sigma scale must be > 0");
  if (alpha_max < 0.0) throw InvalidSpec("cpml: alpha_max must be >= 0");
}

void SimConfig::validate() const {
  if (!(courant > 0.0) || courant > 0.99) {
    throw InvalidSpec("sim: courant safety must lie in (0, 0.99]");
  }
  if (max_steps < 1) throw InvalidSpec("sim: max_steps must be >= 1");
  if (threads < 1) throw InvalidSpec("sim: threads must be >= 1");
}

Boundary Boundary::all_cpml(int layers) {
  Boundary b;
  for (int f = 0; f < 6; ++f) {
    b.kind[f] = FaceKind::Cpml;
    b.thickness[f] = layers;
  }
  return b;
}

double fastest_phase_velocity(const mesh::MaterialGrid& materials) {
  double eps_min = 1e300;
  for (const auto& e : materials.table) {
    if (!e.pec) eps_min = std::min(eps_min, e.eps_r);
  }
  if (eps_min > 1e299) eps_min = 1.0; // all-PEC grid
  return kC0 / std::sqrt(eps_min);
}

double stable_dt(const mesh::GridSpec& grid, double safety, double c_max) {
  if (!(safety > 0.0) || !(safety < 1.0 + 1e-12)) {
    throw InvalidSpec("stable_dt: safety must lie in (0, 1]");
  }
  const double ix = 1.0 / grid.min_dx();
  const double iy = 1.0 / grid.min_dy();
  const double iz = 1.0 / grid.min_dz();
  return safety / (c_max * std::sqrt(ix * ix + iy * iy + iz * iz));
}

namespace {

struct PmlAxis {
  // Per-global-plane CPML recursion coefficients; zero-size when inactive.
  std::vector<double> be, ce; // integer planes (E updates)
  std::vector<double> bh, ch; // half planes (H updates)
};

struct FaceState {
  bool active = false;
  int t = 0;          // layers
  int lo_plane = 0;   // first affected integer plane
  int hi_plane = 0;   // last affected integer plane (inclusive)
  int lo_half = 0, hi_half = 0;
  Array3 psi_e1, psi_e2, psi_h1, psi_h2;
  int off = 0; // global index minus psi array index along the normal
};

} // namespace

struct FdtdSolver::Impl {
  int nx, ny, nz;
  int NX, NY, NZ;
  std::int64_t sj, sk;
  mesh::GridSpec grid;
  const mesh::MaterialGrid* mat;
  Boundary bnd;
  CpmlParams pml;
  double dt;

  std::vector<double> ca, cb;        // per material id
  std::vector<double> ivd[3], ivp[3]; // stretched inverse dual / primal
  std::vector<double> ivd_raw[3], ivp_raw[3];
  std::vector<double> dual_raw[3];
  PmlAxis pml_axis[6];
  FaceState face[6];

  // Component update ranges (inclusive) along the two tangential axes.
  int ex_j0, ex_j1, ex_k0, ex_k1;
  int ey_i0, ey_i1, ey_k0, ey_k1;
  int ez_i0, ez_i1, ez_j0, ez_j1;

  bool has_source = false;
  SourceDef source;
  std::vector<ports::ModeProfile> port_profiles;
  std::vector<std::vector<double>> port_series;
  std::vector<PlaneDft> planes;
  std::vector<std::vector<std::complex<double>>> plane_rot, plane_w;
  std::vector<LineDft> lines;
  std::vector<std::vector<std::complex<double>>> line_rot, line_w;
  std::vector<PointProbeDef> points;
  std::vector<std::vector<double>> point_series;

  FieldState* st;

  double dual(int axis, int i) const {
    const auto& d = axis == 0 ? grid.dx : axis == 1 ? grid.dy : grid.dz;
    const int n = static_cast<int>(d.size());
    if (i <= 0) return 0.5 * d.front();
    if (i >= n) return 0.5 * d.back();
    return 0.5 * (d[std::size_t(i - 1)] + d[std::size_t(i)]);
  }

  void build(const mesh::MaterialGrid& m);
  void build_pml();
  void update_h(int kb, int ke);
  void update_e(int kb, int ke);
  void shells_h(int kb, int ke);
  void shells_e(int kb, int ke);
  void apply_monitors(double t);
};

void FdtdSolver::Impl::build(const mesh::MaterialGrid& m) {
  mat = &m;
  ca.resize(m.table.size());
  cb.resize(m.table.size());
  for (std::size_t i = 0; i < m.table.size(); ++i) {
    const auto& e = m.table[i];
    if (e.pec) {
      ca[i] = 0.0;
      cb[i] = 0.0;
    } else {
      const double eps = e.eps_r * kEps0;
      const double loss = e.sigma * dt / (2.0 * eps);
      ca[i] = (1.0 - loss) / (1.0 + loss);
      cb[i] = (dt / eps) / (1.0 + loss);
    }
  }

  const int n[3] = {nx, ny, nz};
  for (int a = 0; a < 3; ++a) {
    const auto& d = a == 0 ? grid.dx : a == 1 ? grid.dy : grid.dz;
    ivd[a].resize(std::size_t(n[a]) + 1);
    ivd_raw[a].resize(std::size_t(n[a]) + 1);
    dual_raw[a].resize(std::size_t(n[a]) + 1);
    for (int i = 0; i <= n[a]; ++i) {
      dual_raw[a][std::size_t(i)] = dual(a, i);
      ivd_raw[a][std::size_t(i)] = 1.0 / dual_raw[a][std::size_t(i)];
      ivd[a][std::size_t(i)] = ivd_raw[a][std::size_t(i)];
    }
    ivp[a].resize(std::size_t(n[a]));
    ivp_raw[a].resize(std::size_t(n[a]));
    for (int i = 0; i < n[a]; ++i) {
      ivp_raw[a][std::size_t(i)] = 1.0 / d[std::size_t(i)];
      ivp[a][std::size_t(i)] = ivp_raw[a][std::size_t(i)];
    }
  }

  auto pmc = [&](Face f) { return bnd.kind[f] == FaceKind::Pmc; };
  ex_j0 = pmc(YLo) ? 0 : 1;
  ex_j1 = pmc(YHi) ? ny : ny - 1;
  ex_k0 = pmc(ZLo) ? 0 : 1;
  ex_k1 = pmc(ZHi) ? nz : nz - 1;
  ey_i0 = pmc(XLo) ? 0 : 1;
  ey_i1 = pmc(XHi) ? nx : nx - 1;
  ey_k0 = ex_k0;
  ey_k1 = ex_k1;
  ez_i0 = ey_i0;
  ez_i1 = ey_i1;
  ez_j0 = ex_j0;
  ez_j1 = ex_j1;

  build_pml();
}

void FdtdSolver::Impl::build_pml() {
  const int n[3] = {nx, ny, nz};
  for (int f = 0; f < 6; ++f) {
    if (bnd.kind[f] != FaceKind::Cpml) continue;
    const int axis = f / 2;
    const bool hi = (f % 2) == 1;
    const int t = bnd.thickness[f] > 0 ? bnd.thickness[f] : pml.thickness;
    if (t < 6) throw InvalidSpec("cpml: face thickness must be >= 6 layers");
    if (2 * t + 4 > n[axis]) {
      throw InvalidSpec("cpml: domain too small for the absorber thickness");
    }
    auto coord = [&](int i) {
      return axis == 0 ? grid.xe(i) : axis == 1 ? grid.ye(i) : grid.ze(i);
    };
    auto ccoord = [&](int i) {
      return axis == 0 ? grid.xc(i) : axis == 1 ? grid.yc(i) : grid.zc(i);
    };
    const int iface = hi ? n[axis] - t : t; // inner interface plane
    const double L = hi ? coord(n[axis]) - coord(iface) : coord(t) - coord(0);
    const double davg = L / t;
    const double smax = pml.sigma_scale * (pml.order + 1.0) /
                        (150.0 * kPi * std::sqrt(bnd.face_eps[f]) * davg);

    auto profile = [&](double depth, double& sg, double& kp, double& al) {
      const double r = std::clamp(depth / L, 0.0, 1.0);
      const double rm = std::pow(r, pml.order);
      sg = smax * rm;
      kp = 1.0 + (pml.kappa_max - 1.0) * rm;
      al = pml.alpha_max * (1.0 - r);
    };
    auto recursion = [&](double sg, double kp, double al, double& b, double& c) {
      b = std::exp(-(sg / kp + al) * dt / kEps0);
      c = sg == 0.0 ? 0.0 : sg * (b - 1.0) / (kp * (sg + kp * al));
    };

    auto& pa = pml_axis[f];
    pa.be.assign(std::size_t(n[axis]) + 1, 1.0);
    pa.ce.assign(std::size_t(n[axis]) + 1, 0.0);
    pa.bh.assign(std::size_t(n[axis]), 1.0);
    pa.ch.assign(std::size_t(n[axis]), 0.0);

    auto& fs = face[f];
    fs.active = true;
    fs.t = t;
    if (!hi) {
      fs.lo_plane = 1;
      fs.hi_plane = t;
      fs.lo_half = 0;
      fs.hi_half = t - 1;
      fs.off = 0;
    } else {
      fs.lo_plane = n[axis] - t;
      fs.hi_plane = n[axis] - 1;
      fs.lo_half = n[axis] - t;
      fs.hi_half = n[axis] - 1;
      fs.off = n[axis] - t;
    }

    for (int i = fs.lo_plane; i <= fs.hi_plane; ++i) {
      const double depth = hi ? coord(i) - coord(iface) : coord(t) - coord(i);
      double sg, kp, al, b, c;
      profile(depth, sg, kp, al);
      recursion(sg, kp, al, b, c);
      pa.be[std::size_t(i)] = b;
      pa.ce[std::size_t(i)] = c;
      ivd[axis][std::size_t(i)] = ivd_raw[axis][std::size_t(i)] / kp;
    }
    for (int i = fs.lo_half; i <= fs.hi_half; ++i) {
      const double depth = hi ? ccoord(i) - coord(iface) : coord(t) - ccoord(i);
      double sg, kp, al, b, c;
      profile(depth, sg, kp, al);
      recursion(sg, kp, al, b, c);
      pa.bh[std::size_t(i)] = b;
      pa.ch[std::size_t(i)] = c;
      ivp[axis][std::size_t(i)] = ivp_raw[axis][std::size_t(i)] / kp;
    }

    // Psi boxes: full transverse extents, layer-thick along the normal.
    const int tn = t + 1;
    int px = NX, py = NY, pz = NZ;
    if (axis == 0) px = tn + 1;
    if (axis == 1) py = tn + 1;
    if (axis == 2) pz = tn + 1;
    fs.psi_e1.resize(px, py, pz);
    fs.psi_e2.resize(px, py, pz);
    fs.psi_h1.resize(px, py, pz);
    fs.psi_h2.resize(px, py, pz);
  }
}

// ---------------------------------------------------------------------------
// Field sweeps

void FdtdSolver::Impl::update_h(int kb, int ke) {
  auto& S = *st;
  const double chdt = dt / kMu0;
  const double* __restrict ex = S.ex.v.data();
  const double* __restrict ey = S.ey.v.data();
  const double* __restrict ez = S.ez.v.data();
  double* __restrict hx = S.hx.v.data();
  double* __restrict hy = S.hy.v.data();
  double* __restrict hz = S.hz.v.data();

  // Hx: i in [0,nx], j in [0,ny), k in [kb,ke) ∩ [0,nz)
  for (int k = std::max(0, kb); k < std::min(nz, ke); ++k) {
    const double ipz = ivp[2][std::size_t(k)];
    for (int j = 0; j < ny; ++j) {
      const double ipy = ivp[1][std::size_t(j)];
      const std::int64_t r = k * sk + j * sj;
      for (int i = 0; i <= nx; ++i) {
        hx[r + i] -= chdt * ((ez[r + sj + i] - ez[r + i]) * ipy -
                             (ey[r + sk + i] - ey[r + i]) * ipz);
      }
    }
  }
  // Hy: i in [0,nx), j in [0,ny], k in [0,nz)
  for (int k = std::max(0, kb); k < std::min(nz, ke); ++k) {
    const double ipz = ivp[2][std::size_t(k)];
    for (int j = 0; j <= ny; ++j) {
      const std::int64_t r = k * sk + j * sj;
      for (int i = 0; i < nx; ++i) {
        hy[r + i] -= chdt * ((ex[r + sk + i] - ex[r + i]) * ipz -
                             (ez[r + i + 1] - ez[r + i]) * ivp[0][std::size_t(i)]);
      }
    }
  }
  // Hz: i in [0,nx), j in [0,ny), k in [kb,ke] ∩ [0,nz]
  for (int k = std::max(0, kb); k < std::min(nz + 1, ke); ++k) {
    for (int j = 0; j < ny; ++j) {
      const double ipy = ivp[1][std::size_t(j)];
      const std::int64_t r = k * sk + j * sj;
      for (int i = 0; i < nx; ++i) {
        hz[r + i] -= chdt * ((ey[r + i + 1] - ey[r + i]) * ivp[0][std::size_t(i)] -
                             (ex[r + sj + i] - ex[r + i]) * ipy);
      }
    }
  }
}

void FdtdSolver::Impl::update_e(int kb, int ke) {
  auto& S = *st;
  double* __restrict ex = S.ex.v.data();
  double* __restrict ey = S.ey.v.data();
  double* __restrict ez = S.ez.v.data();
  const double* __restrict hx = S.hx.v.data();
  const double* __restrict hy = S.hy.v.data();
  const double* __restrict hz = S.hz.v.data();
  const std::uint16_t* __restrict mx = mat->ex.data();
  const std::uint16_t* __restrict my = mat->ey.data();
  const std::uint16_t* __restrict mz = mat->ez.data();
  const double* __restrict pca = ca.data();
  const double* __restrict pcb = cb.data();

  // Mirror rows on PMC faces use: dH/du = +-2 H(first half plane) / du.
  const double mxlo = 2.0 * ivp_raw[0][0], mxhi = 2.0 * ivp_raw[0][std::size_t(nx - 1)];
  const double mylo = 2.0 * ivp_raw[1][0], myhi = 2.0 * ivp_raw[1][std::size_t(ny - 1)];
  const double mzlo = 2.0 * ivp_raw[2][0], mzhi = 2.0 * ivp_raw[2][std::size_t(nz - 1)];

  // Ex: i in [0,nx), j in [ex_j0..ex_j1], k in [ex_k0..ex_k1]
  for (int k = std::max(ex_k0, kb); k <= std::min(ex_k1, ke - 1); ++k) {
    const bool km = k == 0, kp = k == nz;
    const double ivz = (km || kp) ? 0.0 : ivd[2][std::size_t(k)];
    for (int j = ex_j0; j <= ex_j1; ++j) {
      const bool jm = j == 0, jp = j == ny;
      const double ivy = (jm || jp) ? 0.0 : ivd[1][std::size_t(j)];
      const std::int64_t r = k * sk + j * sj;
      if (!jm && !jp && !km && !kp) {
        for (int i = 0; i < nx; ++i) {
          const double curl = (hz[r + i] - hz[r - sj + i]) * ivy -
                              (hy[r + i] - hy[r - sk + i]) * ivz;
          const int m = mx[r + i];
          ex[r + i] = pca[m] * ex[r + i] + pcb[m] * curl;
        }
      } else {
        for (int i = 0; i < nx; ++i) {
          const double t1 = jm   ? hz[r + i] * mylo
                            : jp ? -hz[r - sj + i] * myhi
                                 : (hz[r + i] - hz[r - sj + i]) * ivy;
          const double t2 = km   ? hy[r + i] * mzlo
                            : kp ? -hy[r - sk + i] * mzhi
                                 : (hy[r + i] - hy[r - sk + i]) * ivz;
          const int m = mx[r + i];
          ex[r + i] = pca[m] * ex[r + i] + pcb[m] * (t1 - t2);
        }
      }
    }
  }
  // Ey: j in [0,ny), i in [ey_i0..ey_i1], k in [ey_k0..ey_k1]
  for (int k = std::max(ey_k0, kb); k <= std::min(ey_k1, ke - 1); ++k) {
    const bool km = k == 0, kp = k == nz;
    const double ivz = (km || kp) ? 0.0 : ivd[2][std::size_t(k)];
    for (int j = 0; j < ny; ++j) {
      const std::int64_t r = k * sk + j * sj;
      auto dhx_at = [&](int i) {
        return km   ? hx[r + i] * mzlo
               : kp ? -hx[r - sk + i] * mzhi
                    : (hx[r + i] - hx[r - sk + i]) * ivz;
      };
      if (ey_i0 == 0) { // PMC x-lo plane
        const double curl = dhx_at(0) - hz[r] * mxlo;
        const int m = my[r];
        ey[r] = pca[m] * ey[r] + pcb[m] * curl;
      }
      if (!km && !kp) {
        for (int i = 1; i < nx; ++i) {
          const double curl = (hx[r + i] - hx[r - sk + i]) * ivz -
                              (hz[r + i] - hz[r + i - 1]) * ivd[0][std::size_t(i)];
          const int m = my[r + i];
          ey[r + i] = pca[m] * ey[r + i] + pcb[m] * curl;
        }
      } else {
        for (int i = 1; i < nx; ++i) {
          const double curl =
              dhx_at(i) - (hz[r + i] - hz[r + i - 1]) * ivd[0][std::size_t(i)];
          const int m = my[r + i];
          ey[r + i] = pca[m] * ey[r + i] + pcb[m] * curl;
        }
      }
      if (ey_i1 == nx) { // PMC x-hi plane
        const double curl = dhx_at(nx) + hz[r + nx - 1] * mxhi;
        const int m = my[r + nx];
        ey[r + nx] = pca[m] * ey[r + nx] + pcb[m] * curl;
      }
    }
  }
  // Ez: k in [0,nz), i in [ez_i0..ez_i1], j in [ez_j0..ez_j1]
  for (int k = std::max(0, kb); k <= std::min(nz - 1, ke - 1); ++k) {
    for (int j = ez_j0; j <= ez_j1; ++j) {
      const bool jm = j == 0, jp = j == ny;
      const double ivy = (jm || jp) ? 0.0 : ivd[1][std::size_t(j)];
      const std::int64_t r = k * sk + j * sj;
      auto dhx_at = [&](int i) {
        return jm   ? hx[r + i] * mylo
               : jp ? -hx[r - sj + i] * myhi
                    : (hx[r + i] - hx[r - sj + i]) * ivy;
      };
      if (ez_i0 == 0) {
        const double curl = hy[r] * mxlo - dhx_at(0);
        const int m = mz[r];
        ez[r] = pca[m] * ez[r] + pcb[m] * curl;
      }
      if (!jm && !jp) {
        for (int i = 1; i < nx; ++i) {
          const double curl = (hy[r + i] - hy[r + i - 1]) * ivd[0][std::size_t(i)] -
                              (hx[r + i] - hx[r - sj + i]) * ivy;
          const int m = mz[r + i];
          ez[r + i] = pca[m] * ez[r + i] + pcb[m] * curl;
        }
      } else {
        for (int i = 1; i < nx; ++i) {
          const double curl =
              (hy[r + i] - hy[r + i - 1]) * ivd[0][std::size_t(i)] - dhx_at(i);
          const int m = mz[r + i];
          ez[r + i] = pca[m] * ez[r + i] + pcb[m] * curl;
        }
      }
      if (ez_i1 == nx) {
        const double curl = -hy[r + nx - 1] * mxhi - dhx_at(nx);
        const int m = mz[r + nx];
        ez[r + nx] = pca[m] * ez[r + nx] + pcb[m] * curl;
      }
    }
  }
}

void FdtdSolver::Impl::shells_h(int kb, int ke) {
  auto& S = *st;
  const double chdt = dt / kMu0;
  // x faces: Hy (dEz/dx), Hz (dEx/dx)
  for (int f : {XLo, XHi}) {
    auto& fs = face[f];
    if (!fs.active) continue;
    const auto& pa = pml_axis[f];
    for (int k = std::max(0, kb); k < std::min(nz, ke); ++k) {
      for (int j = 0; j <= ny; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = fs.lo_half; i <= fs.hi_half; ++i) {
          const double de = (S.ez.v[std::size_t(r + i + 1)] -
                             S.ez.v[std::size_t(r + i)]) *
                            ivp_raw[0][std::size_t(i)];
          auto& psi = fs.psi_h1(i - fs.off, j, k);
          psi = pa.bh[std::size_t(i)] * psi + pa.ch[std::size_t(i)] * de;
          S.hy.v[std::size_t(r + i)] += chdt * psi;
        }
      }
    }
    for (int k = std::max(0, kb); k < std::min(nz + 1, ke); ++k) {
      for (int j = 0; j < ny; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = fs.lo_half; i <= fs.hi_half; ++i) {
          const double de = (S.ey.v[std::size_t(r + i + 1)] -
                             S.ey.v[std::size_t(r + i)]) *
                            ivp_raw[0][std::size_t(i)];
          auto& psi = fs.psi_h2(i - fs.off, j, k);
          psi = pa.bh[std::size_t(i)] * psi + pa.ch[std::size_t(i)] * de;
          S.hz.v[std::size_t(r + i)] -= chdt * psi;
        }
      }
    }
  }
  // y faces: Hx (dEz/dy), Hz (dEx/dy)
  for (int f : {YLo, YHi}) {
    auto& fs = face[f];
    if (!fs.active) continue;
    const auto& pa = pml_axis[f];
    for (int k = std::max(0, kb); k < std::min(nz, ke); ++k) {
      for (int j = fs.lo_half; j <= fs.hi_half; ++j) {
        const std::int64_t r = k * sk + j * sj;
        const double b = pa.bh[std::size_t(j)], c = pa.ch[std::size_t(j)];
        const double iv = ivp_raw[1][std::size_t(j)];
        for (int i = 0; i <= nx; ++i) {
          const double de =
              (S.ez.v[std::size_t(r + sj + i)] - S.ez.v[std::size_t(r + i)]) * iv;
          auto& psi = fs.psi_h1(i, j - fs.off, k);
          psi = b * psi + c * de;
          S.hx.v[std::size_t(r + i)] -= chdt * psi;
        }
      }
    }
    for (int k = std::max(0, kb); k < std::min(nz + 1, ke); ++k) {
      for (int j = fs.lo_half; j <= fs.hi_half; ++j) {
        const std::int64_t r = k * sk + j * sj;
        const double b = pa.bh[std::size_t(j)], c = pa.ch[std::size_t(j)];
        const double iv = ivp_raw[1][std::size_t(j)];
        for (int i = 0; i < nx; ++i) {
          const double de =
              (S.ex.v[std::size_t(r + sj + i)] - S.ex.v[std::size_t(r + i)]) * iv;
          auto& psi = fs.psi_h2(i, j - fs.off, k);
          psi = b * psi + c * de;
          S.hz.v[std::size_t(r + i)] += chdt * psi;
        }
      }
    }
  }
  // z faces: Hx (dEy/dz), Hy (dEx/dz)
  for (int f : {ZLo, ZHi}) {
    auto& fs = face[f];
    if (!fs.active) continue;
    const auto& pa = pml_axis[f];
    for (int k = std::max(fs.lo_half, kb); k <= std::min(fs.hi_half, ke - 1); ++k) {
      const double b = pa.bh[std::size_t(k)], c = pa.ch[std::size_t(k)];
      const double iv = ivp_raw[2][std::size_t(k)];
      for (int j = 0; j < ny; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = 0; i <= nx; ++i) {
          const double de =
              (S.ey.v[std::size_t(r + sk + i)] - S.ey.v[std::size_t(r + i)]) * iv;
          auto& psi = fs.psi_h1(i, j, k - fs.off);
          psi = b * psi + c * de;
          S.hx.v[std::size_t(r + i)] += chdt * psi;
        }
      }
      for (int j = 0; j <= ny; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = 0; i < nx; ++i) {
          const double de =
              (S.ex.v[std::size_t(r + sk + i)] - S.ex.v[std::size_t(r + i)]) * iv;
          auto& psi = fs.psi_h2(i, j, k - fs.off);
          psi = b * psi + c * de;
          S.hy.v[std::size_t(r + i)] -= chdt * psi;
        }
      }
    }
  }
}

void FdtdSolver::Impl::shells_e(int kb, int ke) {
  auto& S = *st;
  const double* __restrict pcb = cb.data();
  // x faces: Ey (dHz/dx), Ez (dHy/dx)
  for (int f : {XLo, XHi}) {
    auto& fs = face[f];
    if (!fs.active) continue;
    const auto& pa = pml_axis[f];
    for (int k = std::max(ey_k0, kb); k <= std::min(ey_k1, ke - 1); ++k) {
      for (int j = 0; j < ny; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = std::max(fs.lo_plane, 1); i <= std::min(fs.hi_plane, nx - 1); ++i) {
          const double dh = (S.hz.v[std::size_t(r + i)] -
                             S.hz.v[std::size_t(r + i - 1)]) *
                            ivd_raw[0][std::size_t(i)];
          auto& psi = fs.psi_e1(i - fs.off, j, k);
          psi = pa.be[std::size_t(i)] * psi + pa.ce[std::size_t(i)] * dh;
          S.ey.v[std::size_t(r + i)] -= pcb[mat->ey[std::size_t(r + i)]] * psi;
        }
      }
    }
    for (int k = std::max(0, kb); k <= std::min(nz - 1, ke - 1); ++k) {
      for (int j = ez_j0; j <= ez_j1; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = std::max(fs.lo_plane, 1); i <= std::min(fs.hi_plane, nx - 1); ++i) {
          const double dh = (S.hy.v[std::size_t(r + i)] -
                             S.hy.v[std::size_t(r + i - 1)]) *
                            ivd_raw[0][std::size_t(i)];
          auto& psi = fs.psi_e2(i - fs.off, j, k);
          psi = pa.be[std::size_t(i)] * psi + pa.ce[std::size_t(i)] * dh;
          S.ez.v[std::size_t(r + i)] += pcb[mat->ez[std::size_t(r + i)]] * psi;
        }
      }
    }
  }
  // y faces: Ex (dHz/dy), Ez (dHx/dy)
  for (int f : {YLo, YHi}) {
    auto& fs = face[f];
    if (!fs.active) continue;
    const auto& pa = pml_axis[f];
    for (int k = std::max(ex_k0, kb); k <= std::min(ex_k1, ke - 1); ++k) {
      for (int j = std::max(fs.lo_plane, 1); j <= std::min(fs.hi_plane, ny - 1); ++j) {
        const std::int64_t r = k * sk + j * sj;
        const double b = pa.be[std::size_t(j)], c = pa.ce[std::size_t(j)];
        const double iv = ivd_raw[1][std::size_t(j)];
        for (int i = 0; i < nx; ++i) {
          const double dh =
              (S.hz.v[std::size_t(r + i)] - S.hz.v[std::size_t(r - sj + i)]) * iv;
          auto& psi = fs.psi_e1(i, j - fs.off, k);
          psi = b * psi + c * dh;
          S.ex.v[std::size_t(r + i)] += pcb[mat->ex[std::size_t(r + i)]] * psi;
        }
      }
    }
    for (int k = std::max(0, kb); k <= std::min(nz - 1, ke - 1); ++k) {
      for (int j = std::max(fs.lo_plane, 1); j <= std::min(fs.hi_plane, ny - 1); ++j) {
        const std::int64_t r = k * sk + j * sj;
        const double b = pa.be[std::size_t(j)], c = pa.ce[std::size_t(j)];
        const double iv = ivd_raw[1][std::size_t(j)];
        for (int i = ez_i0; i <= ez_i1; ++i) {
          const double dh =
              (S.hx.v[std::size_t(r + i)] - S.hx.v[std::size_t(r - sj + i)]) * iv;
          auto& psi = fs.psi_e2(i, j - fs.off, k);
          psi = b * psi + c * dh;
          S.ez.v[std::size_t(r + i)] -= pcb[mat->ez[std::size_t(r + i)]] * psi;
        }
      }
    }
  }
  // z faces: Ex (dHy/dz), Ey (dHx/dz)
  for (int f : {ZLo, ZHi}) {
    auto& fs = face[f];
    if (!fs.active) continue;
    const auto& pa = pml_axis[f];
    for (int k = std::max({fs.lo_plane, 1, kb}); k <= std::min({fs.hi_plane, nz - 1, ke - 1}); ++k) {
      const double b = pa.be[std::size_t(k)], c = pa.ce[std::size_t(k)];
      const double iv = ivd_raw[2][std::size_t(k)];
      for (int j = ex_j0; j <= ex_j1; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = 0; i < nx; ++i) {
          const double dh =
              (S.hy.v[std::size_t(r + i)] - S.hy.v[std::size_t(r - sk + i)]) * iv;
          auto& psi = fs.psi_e1(i, j, k - fs.off);
          psi = b * psi + c * dh;
          S.ex.v[std::size_t(r + i)] -= pcb[mat->ex[std::size_t(r + i)]] * psi;
        }
      }
      for (int j = 0; j < ny; ++j) {
        const std::int64_t r = k * sk + j * sj;
        for (int i = ey_i0; i <= ey_i1; ++i) {
          const double dh =
              (S.hx.v[std::size_t(r + i)] - S.hx.v[std::size_t(r - sk + i)]) * iv;
          auto& psi = fs.psi_e2(i, j, k - fs.off);
          psi = b * psi + c * dh;
          S.ey.v[std::size_t(r + i)] += pcb[mat->ey[std::size_t(r + i)]] * psi;
        }
      }
    }
  }
}

void FdtdSolver::Impl::apply_monitors(double t) {
  auto& S = *st;
  if (has_source) {
    const double s = source.waveform(t) * source.amplitude;
    const int kp = source.profile.plane_k;
    for (const auto& smp : source.profile.samples) {
      auto& arr = smp.comp == 0 ? S.ex : S.ey;
      arr(smp.i, smp.j, kp) += s * smp.value;
    }
  }
  for (std::size_t p = 0; p < port_profiles.size(); ++p) {
    const auto& prof = port_profiles[p];
    double acc = 0.0;
    for (const auto& smp : prof.samples) {
      const auto& arr = smp.comp == 0 ? S.ex : S.ey;
      acc += arr(smp.i, smp.j, prof.plane_k) * smp.value * smp.area;
    }
    port_series[p].push_back(acc);
  }
  for (std::size_t pl = 0; pl < planes.size(); ++pl) {
    auto& P = planes[pl];
    const int a = P.def.normal_axis;
    const int q = P.def.plane_index;
    for (std::size_t fi = 0; fi < P.def.freqs_hz.size(); ++fi) {
      plane_w[pl][fi] *= plane_rot[pl][fi];
      if ((S.step & 0xfff) == 0) {
        plane_w[pl][fi] =
            std::polar(1.0, -2.0 * kPi * P.def.freqs_hz[fi] * t);
      }
      const auto w = plane_w[pl][fi];
      auto* c0 = P.ch[fi * 3 + 0].data();
      auto* c1 = P.ch[fi * 3 + 1].data();
      auto* c2 = P.ch[fi * 3 + 2].data();
      if (a == 2) {
        for (int j = 0; j <= ny; ++j) {
          for (int i = 0; i <= nx; ++i) {
            const std::size_t o = std::size_t(j) * (nx + 1) + i;
            c0[o] += w * S.ex(std::min(i, nx - 1), j, q);
            c1[o] += w * S.ey(i, std::min(j, ny - 1), q);
            const double ezm =
                0.5 * (S.ez(i, j, std::max(0, q - 1)) + S.ez(i, j, std::min(nz - 1, q)));
            c2[o] += w * ezm;
          }
        }
      } else if (a == 0) {
        for (int k = 0; k <= nz; ++k) {
          for (int j = 0; j <= ny; ++j) {
            const std::size_t o = std::size_t(k) * (ny + 1) + j;
            c0[o] += w * S.ey(q, std::min(j, ny - 1), k);
            c1[o] += w * S.ez(q, j, std::min(k, nz - 1));
            const double exm =
                0.5 * (S.ex(std::max(0, q - 1), j, k) + S.ex(std::min(nx - 1, q), j, k));
            c2[o] += w * exm;
          }
        }
      } else {
        for (int k = 0; k <= nz; ++k) {
          for (int i = 0; i <= nx; ++i) {
            const std::size_t o = std::size_t(k) * (nx + 1) + i;
            c0[o] += w * S.ex(std::min(i, nx - 1), q, k);
            c1[o] += w * S.ez(i, q, std::min(k, nz - 1));
            const double eym =
                0.5 * (S.ey(i, std::max(0, q - 1), k) + S.ey(i, std::min(ny - 1, q), k));
            c2[o] += w * eym;
          }
        }
      }
    }
  }
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto& L = lines[ln];
    for (std::size_t fi = 0; fi < L.def.freqs_hz.size(); ++fi) {
      line_w[ln][fi] *= line_rot[ln][fi];
      if ((S.step & 0xfff) == 0) {
        line_w[ln][fi] = std::polar(1.0, -2.0 * kPi * L.def.freqs_hz[fi] * t);
      }
      const auto w = line_w[ln][fi];
      auto* c0 = L.ch[fi * 3 + 0].data();
      auto* c1 = L.ch[fi * 3 + 1].data();
      auto* c2 = L.ch[fi * 3 + 2].data();
      const int i0 = L.def.i0, j0 = L.def.j0;
      if (L.def.axis == 2) {
        for (int k = 0; k <= nz; ++k) {
          c0[std::size_t(k)] += w * S.ex(std::min(i0, nx - 1), j0, k);
          c1[std::size_t(k)] += w * S.ey(i0, std::min(j0, ny - 1), k);
          c2[std::size_t(k)] += w * 0.5 *
                                (S.ez(i0, j0, std::max(0, k - 1)) +
                                 S.ez(i0, j0, std::min(nz - 1, k)));
        }
      } else if (L.def.axis == 0) {
        for (int i = 0; i <= nx; ++i) {
          c0[std::size_t(i)] += w * 0.5 *
                                (S.ex(std::max(0, i - 1), i0, j0) +
                                 S.ex(std::min(nx - 1, i), i0, j0));
          c1[std::size_t(i)] += w * S.ey(i, std::min(i0, ny - 1), j0);
          c2[std::size_t(i)] += w * S.ez(i, i0, std::min(j0, nz - 1));
        }
      } else {
        for (int j = 0; j <= ny; ++j) {
          c0[std::size_t(j)] += w * S.ex(std::min(i0, nx - 1), j, j0);
          c1[std::size_t(j)] += w * 0.5 *
                                (S.ey(i0, std::max(0, j - 1), j0) +
                                 S.ey(i0, std::min(ny - 1, j), j0));
          c2[std::size_t(j)] += w * S.ez(i0, j, std::min(j0, nz - 1));
        }
      }
    }
  }
  for (std::size_t pp = 0; pp < points.size(); ++pp) {
    const auto& d = points[pp];
    const Array3* arr[6] = {&S.ex, &S.ey, &S.ez, &S.hx, &S.hy, &S.hz};
    point_series[pp].push_back((*arr[d.comp])(d.i, d.j, d.k));
  }
}

// ---------------------------------------------------------------------------

FdtdSolver::FdtdSolver(const mesh::GridSpec& grid,
                       const mesh::MaterialGrid& materials,
                       const Boundary& boundary, const CpmlParams& cpml,
                       double dt)
    : impl_(std::make_unique<Impl>()), grid_(grid), dt_(dt) {
  cpml.validate();
  if (!(dt > 0.0)) throw InvalidSpec("solver: dt must be > 0");
  if (materials.nx != grid.nx() || materials.ny != grid.ny() ||
      materials.nz != grid.nz()) {
    throw InvalidSpec("solver: material grid extents do not match the grid");
  }
  impl_->nx = grid.nx();
  impl_->ny = grid.ny();
  impl_->nz = grid.nz();
  impl_->NX = impl_->nx + 1;
  impl_->NY = impl_->ny + 1;
  impl_->NZ = impl_->nz + 1;
  impl_->sj = impl_->NX;
  impl_->sk = std::int64_t(impl_->NX) * impl_->NY;
  impl_->grid = grid;
  impl_->bnd = boundary;
  impl_->pml = cpml;
  impl_->dt = dt;
  try {
    st_.ex.resize(impl_->NX, impl_->NY, impl_->NZ);
    st_.ey.resize(impl_->NX, impl_->NY, impl_->NZ);
    st_.ez.resize(impl_->NX, impl_->NY, impl_->NZ);
    st_.hx.resize(impl_->NX, impl_->NY, impl_->NZ);
    st_.hy.resize(impl_->NX, impl_->NY, impl_->NZ);
    st_.hz.resize(impl_->NX, impl_->NY, impl_->NZ);
  } catch (const std::bad_alloc&) {
    throw GridTooLarge("solver: field allocation exceeds available memory");
  }
  impl_->st = &st_;
  impl_->build(materials);
}

FdtdSolver::~FdtdSolver() = default;

void FdtdSolver::set_source(SourceDef s) {
  impl_->source = std::move(s);
  impl_->has_source = true;
}

int FdtdSolver::add_port(ports::ModeProfile profile) {
  impl_->port_profiles.push_back(std::move(profile));
  impl_->port_series.emplace_back();
  return static_cast<int>(impl_->port_profiles.size()) - 1;
}

int FdtdSolver::add_plane(PlaneMonitorDef def) {
  PlaneDft p;
  p.def = def;
  if (def.normal_axis == 2) {
    p.n1 = impl_->nx + 1;
    p.n2 = impl_->ny + 1;
  } else if (def.normal_axis == 0) {
    p.n1 = impl_->ny + 1;
    p.n2 = impl_->nz + 1;
  } else {
    p.n1 = impl_->nx + 1;
    p.n2 = impl_->nz + 1;
  }
  p.ch.assign(def.freqs_hz.size() * 3,
              std::vector<std::complex<double>>(std::size_t(p.n1) * p.n2));
  impl_->planes.push_back(std::move(p));
  std::vector<std::complex<double>> rot, w;
  for (double f : def.freqs_hz) {
    rot.push_back(std::polar(1.0, -2.0 * kPi * f * dt_));
    w.emplace_back(1.0, 0.0);
  }
  impl_->plane_rot.push_back(std::move(rot));
  impl_->plane_w.push_back(std::move(w));
  return static_cast<int>(impl_->planes.size()) - 1;
}

int FdtdSolver::add_line(LineMonitorDef def) {
  LineDft l;
  l.def = def;
  l.n = (def.axis == 0 ? impl_->nx : def.axis == 1 ? impl_->ny : impl_->nz) + 1;
  l.ch.assign(def.freqs_hz.size() * 3,
              std::vector<std::complex<double>>(std::size_t(l.n)));
  impl_->lines.push_back(std::move(l));
  std::vector<std::complex<double>> rot, w;
  for (double f : def.freqs_hz) {
    rot.push_back(std::polar(1.0, -2.0 * kPi * f * dt_));
    w.emplace_back(1.0, 0.0);
  }
  impl_->line_rot.push_back(std::move(rot));
  impl_->line_w.push_back(std::move(w));
  return static_cast<int>(impl_->lines.size()) - 1;
}

int FdtdSolver::add_point(PointProbeDef def) {
  impl_->points.push_back(def);
  impl_->point_series.emplace_back();
  return static_cast<int>(impl_->points.size()) - 1;
}

void FdtdSolver::step_once() {
  impl_->update_h(0, impl_->nz + 1);
  impl_->shells_h(0, impl_->nz + 1);
  impl_->update_e(0, impl_->nz + 1);
  impl_->shells_e(0, impl_->nz + 1);
  st_.step += 1;
  impl_->apply_monitors(double(st_.step) * dt_);
}

double FdtdSolver::max_abs_field() const {
  double m = 0.0;
  for (const Array3* a : {&st_.ex, &st_.ey, &st_.ez, &st_.hx, &st_.hy, &st_.hz}) {
    for (double v : a->v) {
      const double av = std::abs(v);
      if (!(av <= m)) m = av; // NaN promotes to m = NaN via later check
      if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
    }
  }
  return m;
}

double FdtdSolver::energy_invariant() const {
  const auto& I = *impl_;
  const auto& S = st_;
  double ue = 0.0;
  // E-quadratic with edge volumes and local permittivity.
  for (int k = 0; k <= I.nz; ++k) {
    for (int j = 0; j <= I.ny; ++j) {
      for (int i = 0; i <= I.nx; ++i) {
        const std::int64_t r = I.st->ex.idx(i, j, k);
        if (i < I.nx) {
          const auto& m = I.mat->table[I.mat->ex[std::size_t(r)]];
          if (!m.pec) {
            const double v = I.grid.dx[std::size_t(i)] * I.dual(1, j) * I.dual(2, k);
            ue += m.eps_r * kEps0 * v * S.ex.v[std::size_t(r)] * S.ex.v[std::size_t(r)];
          }
        }
        if (j < I.ny) {
          const auto& m = I.mat->table[I.mat->ey[std::size_t(r)]];
          if (!m.pec) {
            const double v = I.dual(0, i) * I.grid.dy[std::size_t(j)] * I.dual(2, k);
            ue += m.eps_r * kEps0 * v * S.ey.v[std::size_t(r)] * S.ey.v[std::size_t(r)];
          }
        }
        if (k < I.nz) {
          const auto& m = I.mat->table[I.mat->ez[std::size_t(r)]];
          if (!m.pec) {
            const double v = I.dual(0, i) * I.dual(1, j) * I.grid.dz[std::size_t(k)];
            ue += m.eps_r * kEps0 * v * S.ez.v[std::size_t(r)] * S.ez.v[std::size_t(r)];
          }
        }
      }
    }
  }
  // Time-staggered H product: H(n-1/2) * H(n+1/2) computed from the present
  // E field without advancing state.
  const double chdt = dt_ / kMu0;
  double uh = 0.0;
  for (int k = 0; k < I.nz; ++k) {
    for (int j = 0; j <= I.ny; ++j) {
      for (int i = 0; i <= I.nx; ++i) {
        const std::int64_t r = S.hx.idx(i, j, k);
        if (j < I.ny) {
          const double cur = S.hx.v[std::size_t(r)];
          const double nxt =
              cur - chdt * ((S.ez.v[std::size_t(r + I.sj)] - S.ez.v[std::size_t(r)]) *
                                I.ivp[1][std::size_t(j)] -
                            (S.ey.v[std::size_t(r + I.sk)] - S.ey.v[std::size_t(r)]) *
                                I.ivp[2][std::size_t(k)]);
          const double v = I.dual(0, i) * I.grid.dy[std::size_t(j)] * I.grid.dz[std::size_t(k)];
          uh += kMu0 * v * cur * nxt;
        }
        if (i < I.nx) {
          const double cur = S.hy.v[std::size_t(r)];
          const double nxt =
              cur - chdt * ((S.ex.v[std::size_t(r + I.sk)] - S.ex.v[std::size_t(r)]) *
                                I.ivp[2][std::size_t(k)] -
                            (S.ez.v[std::size_t(r + 1)] - S.ez.v[std::size_t(r)]) *
                                I.ivp[0][std::size_t(i)]);
          const double v = I.grid.dx[std::size_t(i)] * I.dual(1, j) * I.grid.dz[std::size_t(k)];
          uh += kMu0 * v * cur * nxt;
        }
      }
    }
  }
  for (int k = 0; k <= I.nz; ++k) {
    for (int j = 0; j < I.ny; ++j) {
      for (int i = 0; i < I.nx; ++i) {
        const std::int64_t r = S.hz.idx(i, j, k);
        const double cur = S.hz.v[std::size_t(r)];
        const double nxt =
            cur - chdt * ((S.ey.v[std::size_t(r + 1)] - S.ey.v[std::size_t(r)]) *
                              I.ivp[0][std::size_t(i)] -
                          (S.ex.v[std::size_t(r + I.sj)] - S.ex.v[std::size_t(r)]) *
                              I.ivp[1][std::size_t(j)]);
        const double v = I.grid.dx[std::size_t(i)] * I.grid.dy[std::size_t(j)] * I.dual(2, k);
        uh += kMu0 * v * cur * nxt;
      }
    }
  }
  return 0.5 * (ue + uh);
}

double FdtdSolver::max_rel_div_b(int skin) const {
  const auto& I = *impl_;
  const auto& S = st_;
  double worst = 0.0;
  for (int k = skin; k < I.nz - skin; ++k) {
    for (int j = skin; j < I.ny - skin; ++j) {
      for (int i = skin; i < I.nx - skin; ++i) {
        const double ayz = I.grid.dy[std::size_t(j)] * I.grid.dz[std::size_t(k)];
        const double axz = I.grid.dx[std::size_t(i)] * I.grid.dz[std::size_t(k)];
        const double axy = I.grid.dx[std::size_t(i)] * I.grid.dy[std::size_t(j)];
        const double t1 = S.hx(i + 1, j, k) * ayz, t2 = S.hx(i, j, k) * ayz;
        const double t3 = S.hy(i, j + 1, k) * axz, t4 = S.hy(i, j, k) * axz;
        const double t5 = S.hz(i, j, k + 1) * axy, t6 = S.hz(i, j, k) * axy;
        const double flux = (t1 - t2) + (t3 - t4) + (t5 - t6);
        const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) +
                             std::abs(t4) + std::abs(t5) + std::abs(t6);
        if (scale > 0.0) worst = std::max(worst, std::abs(flux) / scale);
      }
    }
  }
  return worst;
}

RunResult FdtdSolver::run(const SimConfig& sim) {
  auto& I = *impl_;
  RunResult out;
  out.dt = dt_;
  if (sim.max_steps <= 0) {
    for (std::size_t p = 0; p < I.port_profiles.size(); ++p) {
      ports::PortRecord r;
      r.dt = dt_;
      if (I.has_source) r.waveform = I.source.waveform;
      out.ports.push_back(std::move(r));
    }
    return out;
  }
  sim.validate();

  const auto t_start = std::chrono::steady_clock::now();
  const int T = std::max(1, sim.threads);
  const int nz1 = I.nz + 1;
  std::vector<int> cuts(std::size_t(T) + 1);
  for (int t = 0; t <= T; ++t) cuts[std::size_t(t)] = int(std::int64_t(nz1) * t / T);

  std::atomic<int> control{0}; // 0 run, 1 stop decayed, 2 stop max, 3 error
  std::string error_msg;
  double peak = 0.0;
  double window_max = 0.0;
  const long window = 512;
  const double preamble =
      I.has_source ? I.source.waveform.duration() : 0.0;
  long steps_done = 0;
  bool decayed = false;

  std::barrier bar(T);

  auto worker = [&](int tid) {
    const int kb = cuts[std::size_t(tid)];
    const int ke = cuts[std::size_t(tid) + 1];
    for (long n = 0; n < sim.max_steps; ++n) {
      I.update_h(kb, ke);
      I.shells_h(kb, ke);
      bar.arrive_and_wait();
      I.update_e(kb, ke);
      I.shells_e(kb, ke);
      bar.arrive_and_wait();
      if (tid == 0) {
        st_.step += 1;
        const double t = double(st_.step) * dt_;
        I.apply_monitors(t);
        ++steps_done;
        // Stop criterion on the first port record.
        if (!I.port_series.empty() && sim.stop_db < 0.0) {
          const double a = std::abs(I.port_series[0].back());
          peak = std::max(peak, a);
          window_max = std::max(window_max, a);
          if (steps_done % window == 0) {
            if (t > preamble && peak > 0.0 &&
                window_max <= peak * std::pow(10.0, sim.stop_db / 20.0)) {
              decayed = true;
              control.store(1, std::memory_order_relaxed);
            }
            window_max = 0.0;
          }
        }
        if (steps_done % 256 == 0 || n + 1 == sim.max_steps) {
          double m = 0.0;
          bool bad = false;
          for (const Array3* arr : {&st_.ex, &st_.ey, &st_.ez}) {
            for (double v : arr->v) {
              if (!(std::abs(v) <= sim.overflow)) {
                bad = true;
                break;
              }
              m = std::max(m, std::abs(v));
            }
            if (bad) break;
          }
          if (bad) {
            error_msg = "field overflow or NaN at step " +
                        std::to_string(st_.step);
            control.store(3, std::memory_order_relaxed);
          }
          (void)m;
        }
        if (sim.progress_every > 0 && steps_done % sim.progress_every == 0) {
          const double wall =
              std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t_start)
                  .count();
          double e2 = 0.0;
          for (const Array3* arr : {&st_.ex, &st_.ey, &st_.ez}) {
            for (double v : arr->v) e2 += v * v;
          }
          std::fprintf(stderr, "[nfmi] step %ld field energy %.6e wall %.1fs\n",
                       st_.step, e2, wall);
        }
        if (n + 1 == sim.max_steps && control.load(std::memory_order_relaxed) == 0) {
          control.store(2, std::memory_order_relaxed);
        }
      }
      bar.arrive_and_wait();
      if (control.load(std::memory_order_relaxed) != 0) break;
    }
  };

  if (T == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(T));
    for (int t = 0; t < T; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  if (control.load() == 3) throw DivergedSimulation(error_msg);

  out.steps = steps_done;
  out.decayed = decayed;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  for (std::size_t p = 0; p < I.port_profiles.size(); ++p) {
    ports::PortRecord r;
    r.amplitude = I.port_series[p];
    r.dt = dt_;
    if (I.has_source) r.waveform = I.source.waveform;
    r.decayed = decayed;
    for (double a : r.amplitude) r.peak = std::max(r.peak, std::abs(a));
    out.ports.push_back(std::move(r));
  }
  // Finalize running DFTs with the dt factor.
  out.planes = I.planes;
  for (auto& P : out.planes) {
    for (auto& chan : P.ch) {
      for (auto& v : chan) v *= dt_;
    }
  }
  out.lines = I.lines;
  for (auto& L : out.lines) {
    for (auto& chan : L.ch) {
      for (auto& v : chan) v *= dt_;
    }
  }
  out.point_series = I.point_series;
  return out;
}

} // namespace nfmi::solver
