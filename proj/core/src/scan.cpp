#include "nfmi/scan.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"
#include "nfmi/threading.hpp"

#include <nlohmann/json.hpp>

namespace nfmi::scan {

namespace fs = std::filesystem;
using nlohmann::json;

void ScanPlan::validate() const {
  if (xs.empty()) throw InvalidSpec("scan plan: empty offsets grid");
  if (!(sod >= 0.0)) throw InvalidSpec("scan plan: SOD must be >= 0");
  if (!(step_x > 0.0)) throw InvalidSpec("scan plan: step must be > 0");
  if (ys.size() > 1 && !(step_y > 0.0)) {
    throw InvalidSpec("scan plan: 2D scans need a y step");
  }
  if (freqs_hz.empty()) throw InvalidSpec("scan plan: no frequencies");
}

const ports::Spectrum& ScanRecord::at(int ix, int iy) const {
  return spectra[std::size_t(iy) * plan.xs.size() + std::size_t(ix)];
}

void ScanRecord::save_dir(const std::string& dir) const {
  fs::create_directories(dir);
  json j;
  j["sod_mm"] = plan.sod * 1e3;
  j["step_x_mm"] = plan.step_x * 1e3;
  j["step_y_mm"] = plan.step_y * 1e3;
  j["x_mm"] = json::array();
  for (double x : plan.xs) j["x_mm"].push_back(x * 1e3);
  j["y_mm"] = json::array();
  for (double y : plan.ys) j["y_mm"].push_back(y * 1e3);
  j["freqs_hz"] = plan.freqs_hz;
  j["status"] = status;
  std::ofstream os(dir + "/plan.json");
  if (!os) throw IoError("cannot write " + dir + "/plan.json");
  os << j.dump(2) << "\n";

  const int nx = int(plan.xs.size());
  const int ny = int(std::max<std::size_t>(1, plan.ys.size()));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto& sp = spectra[std::size_t(iy) * nx + ix];
      if (sp.freq_hz.empty()) continue;
      char name[64];
      std::snprintf(name, sizeof name, "/point_%d_%d.csv", ix, iy);
      sp.save_csv(dir + name);
    }
  }
}

ScanRecord ScanRecord::load_dir(const std::string& dir) {
  std::ifstream is(dir + "/plan.json");
  if (!is) throw IoError("cannot read " + dir + "/plan.json");
  json j;
  is >> j;
  ScanRecord rec;
  rec.plan.sod = j.at("sod_mm").get<double>() * 1e-3;
  rec.plan.step_x = j.at("step_x_mm").get<double>() * 1e-3;
  rec.plan.step_y = j.value("step_y_mm", 0.0) * 1e-3;
  for (double x : j.at("x_mm")) rec.plan.xs.push_back(x * 1e-3);
  for (double y : j.at("y_mm")) rec.plan.ys.push_back(y * 1e-3);
  rec.plan.freqs_hz = j.at("freqs_hz").get<std::vector<double>>();
  const int nx = int(rec.plan.xs.size());
  const int ny = int(std::max<std::size_t>(1, rec.plan.ys.size()));
  if (j.contains("status")) {
    rec.status = j.at("status").get<std::vector<std::string>>();
  } else {
    rec.status.assign(std::size_t(nx) * ny, "ok");
  }
  rec.spectra.resize(std::size_t(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      char name[64];
      std::snprintf(name, sizeof name, "/point_%d_%d.csv", ix, iy);
      const std::string path = dir + name;
      if (fs::exists(path)) {
        rec.spectra[std::size_t(iy) * nx + ix] = ports::Spectrum::load_csv(path);
      }
    }
  }
  // Shared-grid invariant.
  for (const auto& sp : rec.spectra) {
    if (sp.freq_hz.empty()) continue;
    if (sp.freq_hz.size() != rec.plan.freqs_hz.size()) {
      throw IoError(dir + ": point spectra disagree with the plan grid");
    }
  }
  return rec;
}

ScanRecord run_scan(const ScanSetup& setup) {
  setup.plan.validate();
  setup.probe.validate();
  setup.sample.validate();

  // Widen the domain and refine the mesh to cover the sample at every
  // lateral offset.
  probe::ProbeDomainOptions dom = setup.domain;
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0, zmax = 0.0;
  bool any_shape = false;
  for (const auto& p : setup.sample.paints) {
    const auto bb = mesh::bounding_box(p.shape);
    const double feat = mesh::smallest_feature(p.shape);
    for (double ox : {setup.plan.xs.front(), setup.plan.xs.back()}) {
      xmin = std::min(xmin, bb.lo.x + ox);
      xmax = std::max(xmax, bb.hi.x + ox);
    }
    const double oy0 = setup.plan.ys.empty() ? 0.0 : setup.plan.ys.front();
    const double oy1 = setup.plan.ys.empty() ? 0.0 : setup.plan.ys.back();
    ymin = std::min(ymin, bb.lo.y + oy0);
    ymax = std::max(ymax, bb.hi.y + oy1);
    zmax = std::max(zmax, bb.hi.z);
    any_shape = true;
    if (feat > 0.0) {
      const double d = 0.5 * feat;
      dom.extra_fine_x.push_back(
          {bb.lo.x + setup.plan.xs.front() - 2e-4,
           bb.hi.x + setup.plan.xs.back() + 2e-4, std::min(d, dom.fine_xy)});
      dom.extra_fine_z.push_back({bb.lo.z - 2e-4, bb.hi.z + 2e-4, d});
    }
  }
  const double L = setup.probe.waveguide_length;
  if (any_shape) {
    const double rg = setup.probe.guide_radius + mesh::kGuideWallThickness;
    const double usable = rg + dom.transverse_pad;
    const double need = std::max(std::abs(xmin), xmax) + 1.5e-3;
    dom.extra_x_halfwidth = std::max(dom.extra_x_halfwidth, need - usable);
    const double need_y = std::max(std::abs(ymin), ymax) + 1.5e-3;
    dom.extra_y_halfwidth = std::max(dom.extra_y_halfwidth, need_y - usable);
    dom.air_depth = std::max(dom.air_depth, zmax - L + 3e-3);
  }

  probe::DomainSetup dev = probe::build_probe_domain(setup.probe, dom);
  const probe::DomainSetup ref_dom =
      probe::reference_variant(dev, setup.probe, dom);

  // Sample must stay inside the meshed region at all offsets.
  const double gx_hi = dev.grid.xe(dev.grid.nx());
  const double gx_lo = dev.grid.origin.x;
  if (any_shape && (xmin < gx_lo - 1e-9 || xmax > gx_hi + 1e-9)) {
    throw InvalidSpec("run_scan: sample leaves the domain at some offset");
  }

  solver::SimConfig sim = setup.sim;
  sim.threads = 1;
  auto ref_sol = ref_dom.make_solver(sim.courant);
  const auto ref_run = ref_sol->run(sim);
  ref_sol.reset();

  const int nx = int(setup.plan.xs.size());
  const int ny = int(std::max<std::size_t>(1, setup.plan.ys.size()));
  ScanRecord rec;
  rec.plan = setup.plan;
  rec.spectra.resize(std::size_t(nx) * ny);
  rec.status.assign(std::size_t(nx) * ny, "ok");

  parallel_for_jobs(nx * ny, setup.workers, [&](int job) {
    const int ix = job % nx, iy = job / nx;
    const double ox = setup.plan.xs[std::size_t(ix)];
    const double oy = setup.plan.ys.empty() ? 0.0 : setup.plan.ys[std::size_t(iy)];
    try {
      probe::DomainSetup point = dev;
      point.scene.append(setup.sample.translated({ox, oy, 0.0}));
      auto sol = point.make_solver(sim.courant);
      const auto run = sol->run(sim);
      rec.spectra[std::size_t(job)] = ports::extract_s11(
          run.ports[0], ref_run.ports[0], setup.plan.freqs_hz, point.deembed);
      if (!run.decayed) rec.status[std::size_t(job)] = "non_decaying";
    } catch (const std::exception& e) {
      rec.status[std::size_t(job)] = std::string("error: ") + e.what();
      if (setup.strict) throw;
    }
  });
  return rec;
}

double select_frequency(const ScanRecord& record, const FrequencyRule& rule) {
  if (record.spectra.empty() || record.plan.freqs_hz.empty()) {
    throw InvalidSpec("select_frequency: empty record");
  }
  const auto& first = record.spectra.front();
  if (first.freq_hz.empty()) {
    throw InvalidSpec("select_frequency: first scan point has no spectrum");
  }
  double target = 0.0;
  switch (rule.kind) {
    case FrequencyRule::ResonanceOfFirstPoint:
      target = probe::find_resonance(first).f_r;
      break;
    case FrequencyRule::MinOfFirstPoint: {
      std::size_t arg = 0;
      double best = 1e300;
      for (std::size_t i = 0; i < first.freq_hz.size(); ++i) {
        if (std::abs(first.s11[i]) < best) {
          best = std::abs(first.s11[i]);
          arg = i;
        }
      }
      target = first.freq_hz[arg];
      break;
    }
    case FrequencyRule::Explicit:
      target = rule.explicit_hz;
      break;
  }
  // Snap to the record's grid.
  double snapped = record.plan.freqs_hz.front();
  for (double f : record.plan.freqs_hz) {
    if (std::abs(f - target) < std::abs(snapped - target)) snapped = f;
  }
  return snapped;
}

ScanImage form_image(const ScanRecord& record, double f_hz) {
  const int nx = int(record.plan.xs.size());
  const int ny = int(std::max<std::size_t>(1, record.plan.ys.size()));
  ScanImage img;
  img.freq_hz = f_hz;
  img.s11 = Image2D<std::complex<double>>(nx, ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto& sp = record.spectra[std::size_t(iy) * nx + ix];
      if (sp.freq_hz.empty()) {
        img.s11.at(ix, iy) = 0.0;
        continue;
      }
      img.s11.at(ix, iy) = sp.s11[sp.nearest_index(f_hz)];
    }
  }
  for (double x : record.plan.xs) img.x_mm.push_back(x * 1e3);
  for (double y : record.plan.ys) img.y_mm.push_back(y * 1e3);
  if (img.y_mm.empty()) img.y_mm.push_back(0.0);
  return img;
}

Image2D<double> ScanImage::magnitude_db() const {
  Image2D<double> out(s11.n1, s11.n2);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = 20.0 * std::log10(std::abs(s11.data[i]) + 1e-300);
  }
  return out;
}

Image2D<double> ScanImage::phase_deg_unwrapped() const {
  Image2D<double> wrapped(s11.n1, s11.n2);
  for (std::size_t i = 0; i < wrapped.data.size(); ++i) {
    wrapped.data[i] = std::arg(s11.data[i]);
  }
  auto un = unwrap_phase_2d(wrapped);
  for (auto& v : un.data) v *= 180.0 / kPi;
  return un;
}

} // namespace nfmi::scan
