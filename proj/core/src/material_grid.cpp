#include "nfmi/material_grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "nfmi/errors.hpp"

namespace nfmi::mesh {

namespace {

struct IndexRange {
  int lo = 0, hi = 0; // half-open
  bool empty() const { return hi <= lo; }
};

// Planes (0..n) whose coordinate falls inside [a, b], expanded by one so
// that midpoint tests straddling the box boundary are not missed.
IndexRange plane_range(const std::vector<double>& d, double origin, double a,
                       double b) {
  const int n = static_cast<int>(d.size());
  double x = origin;
  int lo = n + 1, hi = 0;
  for (int i = 0; i <= n; ++i) {
    if (x >= a && x <= b) {
      lo = std::min(lo, i);
      hi = std::max(hi, i + 1);
    }
    if (i < n) x += d[std::size_t(i)];
  }
  if (lo > hi) return {0, 0};
  return {std::max(0, lo - 1), std::min(n + 1, hi + 1)};
}

IndexRange cell_range(const std::vector<double>& d, double origin, double a,
                      double b) {
  const int n = static_cast<int>(d.size());
  double x = origin;
  int lo = n, hi = 0;
  for (int i = 0; i < n; ++i) {
    const double c = x + 0.5 * d[std::size_t(i)];
    if (c >= a && c <= b) {
      lo = std::min(lo, i);
      hi = std::max(hi, i + 1);
    }
    x += d[std::size_t(i)];
  }
  if (lo > hi) return {0, 0};
  return {std::max(0, lo - 1), std::min(n, hi + 1)};
}

struct FeatureCheck {
  Aabb region;
  bool axes[3];
  double size;
  std::string what;
};

void collect_feature_checks(const Shape& s, std::vector<FeatureCheck>& out) {
  if (const auto* p = std::get_if<PlateWithIris>(&s)) {
    const Aabb slot{{p->cx - p->slot_radius, p->cy - p->slot_radius, p->z0},
                    {p->cx + p->slot_radius, p->cy + p->slot_radius,
                     p->z0 + p->thickness}};
    out.push_back({slot, {true, true, false}, p->gap, "iris gap"});
    out.push_back({slot, {true, true, false}, p->strip_width, "iris strip width"});
    out.push_back({bounding_box(s), {false, false, true}, p->thickness,
                   "iris thickness"});
  } else if (const auto* w = std::get_if<Wire>(&s)) {
    const Vec3 d = w->b - w->a;
    const double ax = std::abs(d.x), ay = std::abs(d.y), az = std::abs(d.z);
    bool axes[3] = {true, true, true};
    if (ax >= ay && ax >= az) {
      axes[0] = false;
    } else if (ay >= az) {
      axes[1] = false;
    } else {
      axes[2] = false;
    }
    out.push_back({bounding_box(s), {axes[0], axes[1], axes[2]}, w->radius,
                   "wire radius"});
  }
}

void enforce_feature_resolution(const Scene& scene, const GridSpec& grid) {
  std::vector<FeatureCheck> checks;
  for (const auto& p : scene.paints) collect_feature_checks(p.shape, checks);
  const std::vector<double>* axes[3] = {&grid.dx, &grid.dy, &grid.dz};
  const double origins[3] = {grid.origin.x, grid.origin.y, grid.origin.z};
  for (const auto& c : checks) {
    const double los[3] = {c.region.lo.x, c.region.lo.y, c.region.lo.z};
    const double his[3] = {c.region.hi.x, c.region.hi.y, c.region.hi.z};
    for (int a = 0; a < 3; ++a) {
      if (!c.axes[a]) continue;
      const auto r = cell_range(*axes[a], origins[a], los[a], his[a]);
      if (r.empty()) continue;
      double dmax = 0.0;
      for (int i = r.lo; i < r.hi; ++i) {
        dmax = std::max(dmax, (*axes[a])[std::size_t(i)]);
      }
      if (c.size < 2.0 * dmax - 1e-15) {
        throw GridTooCoarse(c.what + " (" + std::to_string(c.size * 1e3) +
                            " mm) spans fewer than 2 cells (local max " +
                            std::to_string(dmax * 1e3) + " mm)");
      }
    }
  }
}

} // namespace

double MaterialGrid::max_eps_r() const {
  double m = 1.0;
  for (const auto& e : table) {
    if (!e.pec) m = std::max(m, e.eps_r);
  }
  return m;
}

bool MaterialGrid::identical(const MaterialGrid& o) const {
  if (nx != o.nx || ny != o.ny || nz != o.nz) return false;
  if (ex != o.ex || ey != o.ey || ez != o.ez) return false;
  if (table.size() != o.table.size()) return false;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].eps_r != o.table[i].eps_r ||
        table[i].sigma != o.table[i].sigma || table[i].pec != o.table[i].pec) {
      return false;
    }
  }
  return true;
}

MaterialGrid rasterize(const Scene& scene, const GridSpec& grid) {
  scene.validate();
  enforce_feature_resolution(scene, grid);

  const int nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  MaterialGrid mg;
  mg.nx = nx;
  mg.ny = ny;
  mg.nz = nz;

  // Cell-center material ids (scene indices) and per-edge PEC masks.
  std::vector<std::uint16_t> cells(std::size_t(nx) * ny * nz, 0);
  const std::size_t padded = mg.padded_size();
  std::vector<std::uint8_t> px(padded, 0), py(padded, 0), pz(padded, 0);

  auto cidx = [&](int i, int j, int k) {
    return (std::size_t(k) * ny + j) * nx + i;
  };

  // Cache plane/center coordinates.
  std::vector<double> xe(nx + 1), yev(ny + 1), zev(nz + 1);
  for (int i = 0; i <= nx; ++i) xe[std::size_t(i)] = grid.xe(i);
  for (int j = 0; j <= ny; ++j) yev[std::size_t(j)] = grid.ye(j);
  for (int k = 0; k <= nz; ++k) zev[std::size_t(k)] = grid.ze(k);
  std::vector<double> xcv(nx), ycv(ny), zcv(nz);
  for (int i = 0; i < nx; ++i) xcv[std::size_t(i)] = grid.xc(i);
  for (int j = 0; j < ny; ++j) ycv[std::size_t(j)] = grid.yc(j);
  for (int k = 0; k < nz; ++k) zcv[std::size_t(k)] = grid.zc(k);

  for (const auto& p : scene.paints) {
    const bool is_pec = scene.materials[std::size_t(p.material)].pec;
    const Aabb bb = bounding_box(p.shape);

    // Cells by center containment.
    const auto ci = cell_range(grid.dx, grid.origin.x, bb.lo.x, bb.hi.x);
    const auto cj = cell_range(grid.dy, grid.origin.y, bb.lo.y, bb.hi.y);
    const auto ck = cell_range(grid.dz, grid.origin.z, bb.lo.z, bb.hi.z);
    for (int k = ck.lo; k < ck.hi; ++k) {
      for (int j = cj.lo; j < cj.hi; ++j) {
        for (int i = ci.lo; i < ci.hi; ++i) {
          if (contains(p.shape, {xcv[std::size_t(i)], ycv[std::size_t(j)],
                                 zcv[std::size_t(k)]})) {
            cells[cidx(i, j, k)] = std::uint16_t(p.material);
          }
        }
      }
    }

    // Edges by midpoint containment: set or clear the PEC mask.
    const auto pi = plane_range(grid.dx, grid.origin.x, bb.lo.x, bb.hi.x);
    const auto pj = plane_range(grid.dy, grid.origin.y, bb.lo.y, bb.hi.y);
    const auto pk = plane_range(grid.dz, grid.origin.z, bb.lo.z, bb.hi.z);
    const std::uint8_t val = is_pec ? 1 : 0;
    // Ex: (xc(i), ye(j), ze(k))
    for (int k = pk.lo; k < pk.hi; ++k) {
      for (int j = pj.lo; j < pj.hi; ++j) {
        for (int i = std::max(0, ci.lo); i < std::min(nx, ci.hi); ++i) {
          if (contains(p.shape, {xcv[std::size_t(i)], yev[std::size_t(j)],
                                 zev[std::size_t(k)]})) {
            px[std::size_t(mg.idx(i, j, k))] = val;
          }
        }
      }
    }
    // Ey: (xe(i), yc(j), ze(k))
    for (int k = pk.lo; k < pk.hi; ++k) {
      for (int j = std::max(0, cj.lo); j < std::min(ny, cj.hi); ++j) {
        for (int i = pi.lo; i < pi.hi; ++i) {
          if (contains(p.shape, {xe[std::size_t(i)], ycv[std::size_t(j)],
                                 zev[std::size_t(k)]})) {
            py[std::size_t(mg.idx(i, j, k))] = val;
          }
        }
      }
    }
    // Ez: (xe(i), ye(j), zc(k))
    for (int k = std::max(0, ck.lo); k < std::min(nz, ck.hi); ++k) {
      for (int j = pj.lo; j < pj.hi; ++j) {
        for (int i = pi.lo; i < pi.hi; ++i) {
          if (contains(p.shape, {xe[std::size_t(i)], yev[std::size_t(j)],
                                 zcv[std::size_t(k)]})) {
            pz[std::size_t(mg.idx(i, j, k))] = val;
          }
        }
      }
    }
  }

  // Resolve edge materials: PEC mask wins, otherwise mean of adjacent cells.
  mg.table.push_back({1.0, 0.0, true});
  std::map<std::pair<double, double>, std::uint16_t> lut;
  auto intern = [&](double eps, double sig) -> std::uint16_t {
    const auto key = std::make_pair(eps, sig);
    auto it = lut.find(key);
    if (it != lut.end()) return it->second;
    mg.table.push_back({eps, sig, false});
    const auto id = std::uint16_t(mg.table.size() - 1);
    lut.emplace(key, id);
    return id;
  };

  auto cell_props = [&](int i, int j, int k, double& eps, double& sig) {
    const auto& m = scene.materials[cells[cidx(i, j, k)]];
    eps = m.pec ? 1.0 : m.eps_r;
    sig = m.pec ? 0.0 : m.sigma;
  };
  auto average4 = [&](int i0, int i1, int j0, int j1, int k0, int k1,
                      int which) -> std::uint16_t {
    double eps = 0.0, sig = 0.0;
    int count = 0;
    for (int k = k0; k <= k1; ++k) {
      for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
          if (i < 0 || i >= nx || j < 0 || j >= ny || k < 0 || k >= nz) continue;
          double e, s;
          cell_props(i, j, k, e, s);
          eps += e;
          sig += s;
          ++count;
        }
      }
    }
    (void)which;
    if (count == 0) return intern(1.0, 0.0);
    return intern(eps / count, sig / count);
  };

  mg.ex.assign(padded, 0);
  mg.ey.assign(padded, 0);
  mg.ez.assign(padded, 0);
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const auto e = std::size_t(mg.idx(i, j, k));
        if (i < nx) {
          mg.ex[e] = px[e] ? 0 : average4(i, i, j - 1, j, k - 1, k, 0);
        }
        if (j < ny) {
          mg.ey[e] = py[e] ? 0 : average4(i - 1, i, j, j, k - 1, k, 1);
        }
        if (k < nz) {
          mg.ez[e] = pz[e] ? 0 : average4(i - 1, i, j - 1, j, k, k, 2);
        }
      }
    }
  }
  if (mg.table.size() > 60000) {
    throw GridTooLarge("rasterize: too many distinct edge materials");
  }
  return mg;
}

} // namespace nfmi::mesh
