#include "nfmi/field_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfmi/errors.hpp"

namespace nfmi::fields {

namespace {

using cplx = std::complex<double>;

const solver::PlaneDft* find_plane(const solver::RunResult& run, int axis,
                                   int index, double f, std::size_t* fi_out) {
  for (const auto& p : run.planes) {
    if (p.def.normal_axis != axis || p.def.plane_index != index) continue;
    for (std::size_t fi = 0; fi < p.def.freqs_hz.size(); ++fi) {
      if (std::abs(p.def.freqs_hz[fi] - f) <= 1e-6 * std::max(1.0, f)) {
        *fi_out = fi;
        return &p;
      }
    }
  }
  return nullptr;
}

} // namespace

FieldMap dft_field_plane(const solver::RunResult& run,
                         const mesh::GridSpec& grid, int normal_axis,
                         int plane_index, double f) {
  std::size_t fi = 0;
  const auto* P = find_plane(run, normal_axis, plane_index, f, &fi);
  if (!P) {
    throw PlaneNotRecorded("dft_field_plane: plane (axis " +
                           std::to_string(normal_axis) + ", index " +
                           std::to_string(plane_index) + ") at " +
                           std::to_string(f * 1e-9) +
                           " GHz was not registered before the run");
  }
  FieldMap out;
  out.normal_axis = normal_axis;
  out.freq_hz = f;

  const auto& t0 = P->ch[fi * 3 + 0];
  const auto& t1 = P->ch[fi * 3 + 1];
  const auto& nrm = P->ch[fi * 3 + 2];
  const int n1 = P->n1, n2 = P->n2;
  auto at = [&](const std::vector<cplx>& ch, int i, int j) {
    return ch[std::size_t(j) * n1 + i];
  };

  // Co-locate at in-plane cell centers: tangential components are averaged
  // along their own axis, the normal channel over the four corners.
  const int m1 = n1 - 1, m2 = n2 - 1;
  out.mag = scan::Image2D<double>(m1, m2);
  for (int j = 0; j < m2; ++j) {
    for (int i = 0; i < m1; ++i) {
      const cplx a = 0.5 * (at(t0, i, j) + at(t0, i, j + 1));
      const cplx b = 0.5 * (at(t1, i, j) + at(t1, i + 1, j));
      const cplx c = 0.25 * (at(nrm, i, j) + at(nrm, i + 1, j) +
                             at(nrm, i, j + 1) + at(nrm, i + 1, j + 1));
      out.mag.at(i, j) =
          std::sqrt(std::norm(a) + std::norm(b) + std::norm(c));
    }
  }
  switch (normal_axis) {
    case 2:
      out.plane_coord = grid.ze(plane_index);
      for (int i = 0; i < m1; ++i) out.c1.push_back(grid.xc(i));
      for (int j = 0; j < m2; ++j) out.c2.push_back(grid.yc(j));
      break;
    case 0:
      out.plane_coord = grid.xe(plane_index);
      for (int i = 0; i < m1; ++i) out.c1.push_back(grid.yc(i));
      for (int j = 0; j < m2; ++j) out.c2.push_back(grid.zc(j));
      break;
    default:
      out.plane_coord = grid.ye(plane_index);
      for (int i = 0; i < m1; ++i) out.c1.push_back(grid.xc(i));
      for (int j = 0; j < m2; ++j) out.c2.push_back(grid.zc(j));
      break;
  }
  return out;
}

FieldMap mirror_expand(const FieldMap& m, bool mirror_c1, bool mirror_c2) {
  FieldMap out = m;
  if (mirror_c1) {
    const int n = int(m.c1.size());
    out.c1.clear();
    for (int i = n - 1; i >= 0; --i) out.c1.push_back(-m.c1[std::size_t(i)]);
    for (int i = 0; i < n; ++i) out.c1.push_back(m.c1[std::size_t(i)]);
    scan::Image2D<double> img(2 * n, m.mag.n2);
    for (int j = 0; j < m.mag.n2; ++j) {
      for (int i = 0; i < n; ++i) {
        img.at(n - 1 - i, j) = m.mag.at(i, j);
        img.at(n + i, j) = m.mag.at(i, j);
      }
    }
    out.mag = std::move(img);
  }
  if (mirror_c2) {
    const FieldMap& src = out;
    const int n = int(src.c2.size());
    FieldMap next = src;
    next.c2.clear();
    for (int j = n - 1; j >= 0; --j) next.c2.push_back(-src.c2[std::size_t(j)]);
    for (int j = 0; j < n; ++j) next.c2.push_back(src.c2[std::size_t(j)]);
    scan::Image2D<double> img(src.mag.n1, 2 * n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < src.mag.n1; ++i) {
        img.at(i, n - 1 - j) = src.mag.at(i, j);
        img.at(i, n + j) = src.mag.at(i, j);
      }
    }
    next.mag = std::move(img);
    out = std::move(next);
  }
  return out;
}

namespace {

// Width of the half-power contour along one row/column through the peak.
double contour_width(const std::vector<double>& coords,
                     const std::vector<double>& vals, int peak, double thresh) {
  const int n = int(vals.size());
  double lo = coords[std::size_t(peak)], hi = coords[std::size_t(peak)];
  bool found_lo = false, found_hi = false;
  for (int i = peak; i + 1 < n; ++i) {
    if (vals[std::size_t(i + 1)] < thresh) {
      const double a = vals[std::size_t(i)], b = vals[std::size_t(i + 1)];
      const double t = (a - thresh) / (a - b);
      hi = coords[std::size_t(i)] +
           t * (coords[std::size_t(i + 1)] - coords[std::size_t(i)]);
      found_hi = true;
      break;
    }
  }
  for (int i = peak; i > 0; --i) {
    if (vals[std::size_t(i - 1)] < thresh) {
      const double a = vals[std::size_t(i)], b = vals[std::size_t(i - 1)];
      const double t = (a - thresh) / (a - b);
      lo = coords[std::size_t(i)] -
           t * (coords[std::size_t(i)] - coords[std::size_t(i - 1)]);
      found_lo = true;
      break;
    }
  }
  if (!found_lo || !found_hi) {
    throw MultiPeak("footprint: half-power contour does not close inside the map");
  }
  return hi - lo;
}

} // namespace

Footprint footprint_3db(const FieldMap& map) {
  const auto& img = map.mag;
  if (img.n1 < 5 || img.n2 < 5) throw InvalidSpec("footprint: map too small");
  int pi = 0, pj = 0;
  double peak = -1.0;
  for (int j = 0; j < img.n2; ++j) {
    for (int i = 0; i < img.n1; ++i) {
      if (img.at(i, j) > peak) {
        peak = img.at(i, j);
        pi = i;
        pj = j;
      }
    }
  }
  if (!(peak > 0.0)) throw MultiPeak("footprint: map has no unique maximum");
  if (pi < 1 || pj < 1 || pi >= img.n1 - 1 || pj >= img.n2 - 1) {
    throw MultiPeak("footprint: global maximum touches the map edge");
  }
  const double thresh = peak / std::sqrt(2.0);
  // Secondary-peak audit: a distinct local maximum within 3 dB of the peak.
  for (int j = 1; j + 1 < img.n2; ++j) {
    for (int i = 1; i + 1 < img.n1; ++i) {
      if (std::abs(i - pi) <= 2 && std::abs(j - pj) <= 2) continue;
      const double v = img.at(i, j);
      if (v < thresh) continue;
      bool is_max = true;
      for (int dj = -1; dj <= 1 && is_max; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          if (img.at(i + di, j + dj) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        throw MultiPeak(
            "footprint: secondary field peak within 3 dB at (" +
            std::to_string(map.c1[std::size_t(i)] * 1e3) + " mm, " +
            std::to_string(map.c2[std::size_t(j)] * 1e3) + " mm); primary at (" +
            std::to_string(map.c1[std::size_t(pi)] * 1e3) + " mm, " +
            std::to_string(map.c2[std::size_t(pj)] * 1e3) + " mm)");
      }
    }
  }

  std::vector<double> row(std::size_t(img.n1)), col(std::size_t(img.n2));
  for (int i = 0; i < img.n1; ++i) row[std::size_t(i)] = img.at(i, pj);
  for (int j = 0; j < img.n2; ++j) col[std::size_t(j)] = img.at(pi, j);

  Footprint fp;
  fp.wx = contour_width(map.c1, row, pi, thresh);
  fp.wy = contour_width(map.c2, col, pj, thresh);
  fp.peak_x = map.c1[std::size_t(pi)];
  fp.peak_y = map.c2[std::size_t(pj)];
  fp.peak_mag = peak;
  return fp;
}

std::vector<DecaySample> decay_curve(const solver::RunResult& run,
                                     const mesh::GridSpec& grid, int axis,
                                     double aperture_coord, double f) {
  const solver::LineDft* L = nullptr;
  std::size_t fi = 0;
  for (const auto& l : run.lines) {
    if (l.def.axis != axis) continue;
    for (std::size_t q = 0; q < l.def.freqs_hz.size(); ++q) {
      if (std::abs(l.def.freqs_hz[q] - f) <= 1e-6 * std::max(1.0, f)) {
        L = &l;
        fi = q;
        break;
      }
    }
    if (L) break;
  }
  if (!L) throw PlaneNotRecorded("decay_curve: axial line not recorded at this frequency");

  std::vector<DecaySample> out;
  for (int k = 0; k < L->n; ++k) {
    const double coord = axis == 2 ? grid.ze(k) : axis == 0 ? grid.xe(k) : grid.ye(k);
    if (coord < aperture_coord - 1e-12) continue;
    const double m = std::sqrt(std::norm(L->ch[fi * 3 + 0][std::size_t(k)]) +
                               std::norm(L->ch[fi * 3 + 1][std::size_t(k)]) +
                               std::norm(L->ch[fi * 3 + 2][std::size_t(k)]));
    out.push_back({coord - aperture_coord, m});
  }
  return out;
}

} // namespace nfmi::fields
