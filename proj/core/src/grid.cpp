#include "nfmi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nfmi/errors.hpp"

namespace nfmi::mesh {

namespace {

double min_of(const std::vector<double>& v) {
  return *std::min_element(v.begin(), v.end());
}

double plane_coord(const std::vector<double>& d, double origin, int i) {
  double x = origin;
  for (int t = 0; t < i; ++t) x += d[std::size_t(t)];
  return x;
}

int nearest_plane(const std::vector<double>& d, double origin, double v) {
  const int n = static_cast<int>(d.size());
  double x = origin;
  int best = 0;
  double best_err = std::abs(v - x);
  for (int i = 1; i <= n; ++i) {
    x += d[std::size_t(i - 1)];
    const double err = std::abs(v - x);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  return best;
}

} // namespace

double GridSpec::min_dx() const { return min_of(dx); }
double GridSpec::min_dy() const { return min_of(dy); }
double GridSpec::min_dz() const { return min_of(dz); }

double GridSpec::xe(int i) const { return plane_coord(dx, origin.x, i); }
double GridSpec::ye(int j) const { return plane_coord(dy, origin.y, j); }
double GridSpec::ze(int k) const { return plane_coord(dz, origin.z, k); }

int GridSpec::nearest_xplane(double v) const { return nearest_plane(dx, origin.x, v); }
int GridSpec::nearest_yplane(double v) const { return nearest_plane(dy, origin.y, v); }
int GridSpec::nearest_zplane(double v) const { return nearest_plane(dz, origin.z, v); }

std::size_t GridSpec::estimated_bytes_per_cell() {
  // Six double field arrays, three uint16 edge-material arrays, CPML psi
  // shells and monitor slack.
  return 96;
}

void GridSpec::validate(std::size_t mem_budget_mb) const {
  const char* names[3] = {"x", "y", "z"};
  const std::vector<double>* axes[3] = {&dx, &dy, &dz};
  for (int a = 0; a < 3; ++a) {
    if (axes[a]->size() < 8) {
      throw InvalidSpec(std::string("grid: axis ") + names[a] +
                        " has fewer than 8 cells");
    }
    for (double d : *axes[a]) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw InvalidSpec(std::string("grid: nonpositive cell size on axis ") +
                          names[a]);
      }
    }
  }
  const auto bytes = static_cast<std::size_t>(cell_count()) *
                     estimated_bytes_per_cell();
  if (bytes > mem_budget_mb * std::size_t(1) * 1024 * 1024) {
    throw GridTooLarge("grid: estimated " + std::to_string(bytes / (1024 * 1024)) +
                       " MiB exceeds budget " + std::to_string(mem_budget_mb) +
                       " MiB");
  }
}

GridSpec make_uniform_grid(Vec3 lo, Vec3 hi, double delta) {
  if (!(delta > 0.0)) throw InvalidSpec("uniform grid: delta must be > 0");
  GridSpec g;
  g.origin = lo;
  const double len[3] = {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  std::vector<double>* axes[3] = {&g.dx, &g.dy, &g.dz};
  for (int a = 0; a < 3; ++a) {
    if (!(len[a] > 0.0)) throw InvalidSpec("uniform grid: empty extent");
    const int n = std::max<int>(8, int(std::lround(len[a] / delta)));
    axes[a]->assign(std::size_t(n), len[a] / n);
  }
  return g;
}

namespace {

// Fills a gap of length `len` between boundary cell sizes `left`/`right`
// (zero means the gap touches the domain edge and that side is
// unconstrained). Emitted cells grow geometrically from each constrained
// side, capped at delta_coarse, then are scaled down slightly so the gap
// tiles exactly.
std::vector<double> fill_gap(double len, double left, double right,
                             double dc, double ratio) {
  std::vector<double> out;
  if (len <= 1e-15) return out;

  const double grow = std::min(ratio, 1.0 + 0.85 * (ratio - 1.0));
  double la = left > 0.0 ? left : dc;
  double lb = right > 0.0 ? right : dc;
  std::vector<double> ls, rs;
  double placed = 0.0;
  while (true) {
    const double ca = left > 0.0 ? std::min(la * grow, dc) : dc;
    const double cb = right > 0.0 ? std::min(lb * grow, dc) : dc;
    const bool from_left = ca <= cb;
    const double c = from_left ? ca : cb;
    if (from_left) {
      ls.push_back(c);
      la = c;
    } else {
      rs.push_back(c);
      lb = c;
    }
    placed += c;
    if (placed >= len) break;
  }
  out = ls;
  out.insert(out.end(), rs.rbegin(), rs.rend());
  const double f = len / placed; // <= 1 by construction
  for (double& c : out) c *= f;
  return out;
}

struct Segment {
  double lo, hi, delta; // delta == 0 marks a gap
};

} // namespace

std::vector<double> grade_axis(double domain_lo, double domain_hi,
                               std::vector<FineRegion> regions,
                               double delta_coarse, double max_ratio) {
  if (!(domain_hi > domain_lo)) {
    throw UnsatisfiableGrading("grade_axis: empty domain");
  }
  if (!(delta_coarse > 0.0)) {
    throw UnsatisfiableGrading("grade_axis: delta_coarse must be > 0");
  }
  if (!(max_ratio > 1.0)) {
    throw UnsatisfiableGrading("grade_axis: ratio must exceed 1");
  }
  for (const auto& r : regions) {
    if (!(r.delta > 0.0) || !(r.hi > r.lo)) {
      throw UnsatisfiableGrading("grade_axis: degenerate fine region");
    }
    if (r.lo < domain_lo - 1e-12 || r.hi > domain_hi + 1e-12) {
      throw UnsatisfiableGrading("grade_axis: fine region outside domain");
    }
  }

  std::sort(regions.begin(), regions.end(),
            [](const FineRegion& a, const FineRegion& b) { return a.lo < b.lo; });
  // Merge overlapping or touching regions, keeping the finer delta.
  std::vector<FineRegion> merged;
  for (const auto& r : regions) {
    if (!merged.empty() && r.lo <= merged.back().hi + 1e-12) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
      merged.back().delta = std::min(merged.back().delta, r.delta);
    } else {
      merged.push_back(r);
    }
  }

  // Assemble segments: alternating gaps and fine regions.
  std::vector<Segment> segs;
  double cursor = domain_lo;
  for (const auto& r : merged) {
    if (r.lo > cursor + 1e-12) segs.push_back({cursor, r.lo, 0.0});
    segs.push_back({std::max(cursor, r.lo), r.hi, std::min(r.delta, delta_coarse)});
    cursor = r.hi;
  }
  if (domain_hi > cursor + 1e-12) segs.push_back({cursor, domain_hi, 0.0});

  std::vector<double> out;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto& seg = segs[s];
    const double len = seg.hi - seg.lo;
    if (seg.delta > 0.0) {
      const int n = std::max<int>(1, int(std::ceil(len / seg.delta - 1e-9)));
      for (int i = 0; i < n; ++i) out.push_back(len / n);
    } else {
      const double left = (s == 0 || out.empty()) ? 0.0 : out.back();
      double rcell = 0.0; // boundary cell size of the fine region to the right
      if (s + 1 < segs.size()) {
        const auto& nxt = segs[s + 1];
        const double nlen = nxt.hi - nxt.lo;
        const int n = std::max<int>(1, int(std::ceil(nlen / nxt.delta - 1e-9)));
        rcell = nlen / n;
      }
      auto gap = fill_gap(len, left, rcell, delta_coarse, max_ratio);
      out.insert(out.end(), gap.begin(), gap.end());
    }
  }

  // Final ratio audit: geometric growth plus exact-fit scaling must respect
  // the requested bound.
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double r = out[i] / out[i - 1];
    if (r > max_ratio * (1.0 + 1e-9) || 1.0 / r > max_ratio * (1.0 + 1e-9)) {
      throw UnsatisfiableGrading(
          "grade_axis: cannot satisfy adjacency ratio " +
          std::to_string(max_ratio) + " (got " + std::to_string(r) + ")");
    }
  }
  if (out.empty()) throw UnsatisfiableGrading("grade_axis: produced no cells");
  return out;
}

GridSpec grade_mesh(const AxisGrading& x, const AxisGrading& y,
                    const AxisGrading& z, double max_ratio) {
  GridSpec g;
  g.origin = {x.lo, y.lo, z.lo};
  g.dx = grade_axis(x.lo, x.hi, x.regions, x.delta_coarse, max_ratio);
  g.dy = grade_axis(y.lo, y.hi, y.regions, y.delta_coarse, max_ratio);
  g.dz = grade_axis(z.lo, z.hi, z.regions, z.delta_coarse, max_ratio);
  return g;
}

} // namespace nfmi::mesh
