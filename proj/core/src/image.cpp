#include "nfmi/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

namespace nfmi::scan {

namespace {

double wrap_to_pi(double d) {
  while (d > kPi) d -= 2.0 * kPi;
  while (d <= -kPi) d += 2.0 * kPi;
  return d;
}

} // namespace

Image2D<double> unwrap_phase_2d(const Image2D<double>& wrapped) {
  Image2D<double> out(wrapped.n1, wrapped.n2);
  if (wrapped.n1 == 0 || wrapped.n2 == 0) return out;
  out.at(0, 0) = wrapped.at(0, 0);
  for (int j = 1; j < wrapped.n2; ++j) {
    const double d = wrap_to_pi(wrapped.at(0, j) - wrapped.at(0, j - 1));
    out.at(0, j) = out.at(0, j - 1) + d;
  }
  for (int j = 0; j < wrapped.n2; ++j) {
    for (int i = 1; i < wrapped.n1; ++i) {
      const double d = wrap_to_pi(wrapped.at(i, j) - wrapped.at(i - 1, j));
      out.at(i, j) = out.at(i - 1, j) + d;
    }
  }
  return out;
}

double catmull_rom_weight(double s) {
  const double a = -0.5;
  const double t = std::abs(s);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
  return 0.0;
}

Image2D<double> upsample(const Image2D<double>& img, int factor) {
  if (factor < 1) throw InvalidSpec("upsample: factor must be >= 1");
  if (factor == 1) return img;
  const int n1 = img.n1 * factor, n2 = img.n2 * factor;
  auto clampi = [](int v, int hi) { return std::min(std::max(v, 0), hi); };

  // Horizontal pass.
  Image2D<double> tmp(n1, img.n2);
  for (int j = 0; j < img.n2; ++j) {
    for (int o = 0; o < n1; ++o) {
      const double x = (o + 0.5) / factor - 0.5;
      const int i0 = int(std::floor(x));
      const double f = x - i0;
      double acc = 0.0;
      for (int t = -1; t <= 2; ++t) {
        acc += catmull_rom_weight(f - t) * img.at(clampi(i0 + t, img.n1 - 1), j);
      }
      tmp.at(o, j) = acc;
    }
  }
  Image2D<double> out(n1, n2);
  for (int o2 = 0; o2 < n2; ++o2) {
    const double y = (o2 + 0.5) / factor - 0.5;
    const int j0 = int(std::floor(y));
    const double f = y - j0;
    for (int o = 0; o < n1; ++o) {
      double acc = 0.0;
      for (int t = -1; t <= 2; ++t) {
        acc += catmull_rom_weight(f - t) * tmp.at(o, clampi(j0 + t, img.n2 - 1));
      }
      out.at(o, o2) = acc;
    }
  }
  return out;
}

double resolvability(const std::vector<double>& positions,
                     const std::vector<double>& values, double peak1_pos,
                     double peak2_pos) {
  if (positions.size() != values.size() || positions.size() < 5) {
    throw InvalidSpec("resolvability: need a sampled curve");
  }
  const int n = static_cast<int>(positions.size());
  auto local_max_near = [&](double where) {
    int best = -1;
    double best_dist = 1e300;
    for (int i = 1; i + 1 < n; ++i) {
      if (values[std::size_t(i)] >= values[std::size_t(i - 1)] &&
          values[std::size_t(i)] >= values[std::size_t(i + 1)]) {
        const double d = std::abs(positions[std::size_t(i)] - where);
        if (d < best_dist) {
          best_dist = d;
          best = i;
        }
      }
    }
    return best;
  };
  const int p1 = local_max_near(peak1_pos);
  const int p2 = local_max_near(peak2_pos);
  if (p1 < 0 || p2 < 0 || p1 == p2) {
    throw SinglePeak("resolvability: annotated pair produced one maximum");
  }
  const int lo = std::min(p1, p2), hi = std::max(p1, p2);
  double valley = 1e300;
  for (int i = lo + 1; i < hi; ++i) {
    valley = std::min(valley, values[std::size_t(i)]);
  }
  if (valley >= std::min(values[std::size_t(p1)], values[std::size_t(p2)])) {
    throw SinglePeak("resolvability: no interior valley between the maxima");
  }
  const double pk = std::min(values[std::size_t(p1)], values[std::size_t(p2)]);
  return 20.0 * std::log10(pk / std::max(valley, 1e-300));
}

void save_pgm(const std::string& path, const Image2D<double>& img,
              const std::string& unit_note) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  double lo = 1e300, hi = -1e300;
  for (double v : img.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  os << "P5\n# min=" << lo << " max=" << hi;
  if (!unit_note.empty()) os << " unit=" << unit_note;
  os << "\n" << img.n1 << " " << img.n2 << "\n255\n";
  for (int j = img.n2 - 1; j >= 0; --j) { // top row = largest y
    for (int i = 0; i < img.n1; ++i) {
      const double t = (img.at(i, j) - lo) / (hi - lo);
      os.put(char(std::lround(255.0 * std::clamp(t, 0.0, 1.0))));
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

void save_csv_matrix(const std::string& path, const Image2D<double>& img) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  char buf[64];
  for (int j = 0; j < img.n2; ++j) {
    for (int i = 0; i < img.n1; ++i) {
      std::snprintf(buf, sizeof buf, "%.12e", img.at(i, j));
      os << buf << (i + 1 < img.n1 ? "," : "\n");
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

Image2D<double> load_csv_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix");
  Image2D<double> img(int(rows[0].size()), int(rows.size()));
  for (int j = 0; j < img.n2; ++j) {
    if (rows[std::size_t(j)].size() != std::size_t(img.n1)) {
      throw IoError(path + ": ragged matrix");
    }
    for (int i = 0; i < img.n1; ++i) img.at(i, j) = rows[std::size_t(j)][std::size_t(i)];
  }
  return img;
}

} // namespace nfmi::scan
