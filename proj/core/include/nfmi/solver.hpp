#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "nfmi/grid.hpp"
#include "nfmi/material_grid.hpp"
#include "nfmi/modes.hpp"
#include "nfmi/spectrum.hpp"
#include "nfmi/waveform.hpp"

namespace nfmi::solver {

struct Array3 {
  std::vector<double> v;
  int NX = 0, NY = 0, NZ = 0;

  void resize(int nx, int ny, int nz) {
    NX = nx;
    NY = ny;
    NZ = nz;
    v.assign(std::size_t(nx) * ny * nz, 0.0);
  }
  std::int64_t idx(int i, int j, int k) const {
    return (std::int64_t(k) * NY + j) * NX + i;
  }
  double& operator()(int i, int j, int k) { return v[std::size_t(idx(i, j, k))]; }
  double operator()(int i, int j, int k) const {
    return v[std::size_t(idx(i, j, k))];
  }
};

struct FieldState {
  Array3 ex, ey, ez, hx, hy, hz;
  long step = 0;
};

struct CpmlParams {
  int thickness = 10;
  double order = 3.0;
  double sigma_scale = 0.8; // fraction of the polynomial-grading optimum
  double kappa_max = 5.0;
  double alpha_max = 0.05; // S/m
  void validate() const;
};

enum class FaceKind { Pec, Pmc, Cpml };
enum Face { XLo = 0, XHi = 1, YLo = 2, YHi = 3, ZLo = 4, ZHi = 5 };

struct Boundary {
  FaceKind kind[6] = {FaceKind::Pec, FaceKind::Pec, FaceKind::Pec,
                      FaceKind::Pec, FaceKind::Pec, FaceKind::Pec};
  int thickness[6] = {0, 0, 0, 0, 0, 0}; // CPML layers per face
  double face_eps[6] = {1, 1, 1, 1, 1, 1}; // eps_r seen by each absorber

  static Boundary all_cpml(int layers);
};

struct SimConfig {
  double courant = 0.95;
  long max_steps = 1;
  double stop_db = -60.0;   // port-record decay threshold below peak
  double overflow = 1e9;    // field magnitude bound, V/m
  int threads = 1;
  long progress_every = 0;  // stderr cadence; 0 silences progress
  void validate() const;
};

double stable_dt(const mesh::GridSpec& grid, double safety, double c_max);
double fastest_phase_velocity(const mesh::MaterialGrid& materials);

struct SourceDef {
  ports::ModeProfile profile;
  ports::GaussianSine waveform;
  double amplitude = 1.0;
};

struct PlaneMonitorDef {
  int normal_axis = 2; // 0=x, 1=y, 2=z
  int plane_index = 0; // integer plane along the normal
  std::vector<double> freqs_hz;
};

struct LineMonitorDef {
  int axis = 2;     // line direction
  int i0 = 0, j0 = 0; // transverse integer indices
  std::vector<double> freqs_hz;
};

struct PointProbeDef {
  int comp = 0; // 0..2 = Ex..Ez, 3..5 = Hx..Hz
  int i = 0, j = 0, k = 0;
};

// Phasor samples accumulated by a running DFT over one plane: three E
// channels (two tangential at native positions, normal averaged onto the
// plane) per registered frequency.
struct PlaneDft {
  PlaneMonitorDef def;
  int n1 = 0, n2 = 0; // fast, slow extents
  std::vector<std::vector<std::complex<double>>> ch; // [freq*3 + c][n1*n2]
};

struct LineDft {
  LineMonitorDef def;
  int n = 0;
  std::vector<std::vector<std::complex<double>>> ch; // [freq*3 + c][n]
};

struct RunResult {
  std::vector<ports::PortRecord> ports;
  std::vector<PlaneDft> planes;
  std::vector<LineDft> lines;
  std::vector<std::vector<double>> point_series;
  long steps = 0;
  double dt = 0.0;
  bool decayed = false; // stop threshold reached before max steps
  double wall_seconds = 0.0;
};

class FdtdSolver {
 public:
  FdtdSolver(const mesh::GridSpec& grid, const mesh::MaterialGrid& materials,
             const Boundary& boundary, const CpmlParams& cpml, double dt);
  ~FdtdSolver();

  void set_source(SourceDef s);
  int add_port(ports::ModeProfile profile);
  int add_plane(PlaneMonitorDef def);
  int add_line(LineMonitorDef def);
  int add_point(PointProbeDef def);

  // One full leapfrog step (H then E, CPML convolutions, source, monitors).
  void step_once();

  RunResult run(const SimConfig& sim);

  FieldState& state() { return st_; }
  const mesh::GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }

  // Exactly conserved discrete energy for lossless media: the E-quadratic
  // plus the time-staggered H product.
  double energy_invariant() const;
  // Max |div B| per cell relative to the local flux magnitude, skipping
  // `skin` cells at the domain border.
  double max_rel_div_b(int skin) const;
  double max_abs_field() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  FieldState st_;
  mesh::GridSpec grid_;
  double dt_ = 0.0;
};

} // namespace nfmi::solver
