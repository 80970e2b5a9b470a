#pragma once

#include <string>
#include <vector>

namespace nfmi::scan {

template <typename T>
struct Image2D {
  int n1 = 0, n2 = 0; // fast (x) and slow (y) extents
  std::vector<T> data;

  Image2D() = default;
  Image2D(int a, int b, T fill = T{}) : n1(a), n2(b), data(std::size_t(a) * b, fill) {}
  T& at(int i, int j) { return data[std::size_t(j) * n1 + i]; }
  const T& at(int i, int j) const { return data[std::size_t(j) * n1 + i]; }
};

// Itoh-condition phase unwrapping: the first column is unwrapped
// top-to-bottom, then each row from its (now fixed) first element. Input in
// radians, wrapped to (-pi, pi].
Image2D<double> unwrap_phase_2d(const Image2D<double>& wrapped);

// Separable bicubic resampling with the Catmull-Rom kernel (a = -0.5),
// edge-clamped; output extents are factor * input extents.
Image2D<double> upsample(const Image2D<double>& img, int factor);

double catmull_rom_weight(double s);

// Dip depth between the two line-scan peaks closest to the annotated
// locations. `positions` and `values` are a sampled response curve (values
// linear, e.g. |S11|); returns the dip depth in dB. Throws SinglePeak when
// the annotated pair has merged into one maximum.
double resolvability(const std::vector<double>& positions,
                     const std::vector<double>& values, double peak1_pos,
                     double peak2_pos);

void save_pgm(const std::string& path, const Image2D<double>& img,
              const std::string& unit_note = "");
void save_csv_matrix(const std::string& path, const Image2D<double>& img);
Image2D<double> load_csv_matrix(const std::string& path);

} // namespace nfmi::scan
