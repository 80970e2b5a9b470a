#include "nfmi/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"
#include "nfmi/field_map.hpp"
#include "nfmi/raw_grid.hpp"
#include "nfmi/sha256.hpp"
#include "nfmi/version.hpp"

#include <nlohmann/json.hpp>

namespace nfmi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Artifacts {
  std::string dir;
  std::map<std::string, std::string> hashes;

  std::string path(const std::string& rel) const { return dir + "/" + rel; }
  void note(const std::string& rel) { hashes[rel] = sha256_file_hex(path(rel)); }
};

void write_manifest(Artifacts& art, double wall_seconds) {
  json m;
  m["tool"] = "nfmi";
  m["version"] = kVersion;
  m["wall_seconds"] = wall_seconds;
  m["artifacts"] = json::object();
  for (const auto& [rel, hash] : art.hashes) m["artifacts"][rel] = hash;
  std::ofstream os(art.path("manifest.json"));
  if (!os) throw IoError("cannot write manifest.json");
  os << m.dump(2) << "\n";
}

probe::DomainSetup short_variant(const probe::DomainSetup& device,
                                 const mesh::ProbeSpec& spec,
                                 const probe::ProbeDomainOptions& opt) {
  probe::DomainSetup s = device;
  s.scene = mesh::Scene{};
  s.scene.add_material(mesh::Material::vacuum());
  const int pec = s.scene.add_material(mesh::Material::perfect_conductor());
  const int fill = s.scene.add_material(mesh::Material::dielectric(
      "fill", spec.eps_fill, spec.tan_delta_fill));
  const double z_lo = s.grid.origin.z;
  const double L = s.aperture_z;
  const double rw = spec.guide_radius + mesh::kGuideWallThickness;
  s.scene.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                    {0.0, 0.0, 0.5 * (z_lo - 1e-3 + L)},
                                    rw, L - z_lo + 1e-3},
                pec);
  s.scene.paint(mesh::SolidCylinder{mesh::Axis::Z,
                                    {0.0, 0.0, 0.5 * (z_lo - 1e-3 + L)},
                                    spec.guide_radius, L - z_lo + 1e-3},
                fill);
  s.scene.paint(mesh::SolidCylinder{mesh::Axis::Z, {0.0, 0.0, L + 1.25e-3}, rw, 2.5e-3},
                pec);
  (void)opt;
  return s;
}

void save_field_outputs(Artifacts& art, const std::string& stem,
                        const fields::FieldMap& map) {
  scan::Image2D<double> db(map.mag.n1, map.mag.n2);
  double peak = 0.0;
  for (double v : map.mag.data) peak = std::max(peak, v);
  if (!(peak > 0.0)) peak = 1.0;
  for (std::size_t i = 0; i < db.data.size(); ++i) {
    db.data[i] = 20.0 * std::log10(map.mag.data[i] / peak + 1e-12);
  }
  scan::save_csv_matrix(art.path(stem + ".csv"), db);
  art.note(stem + ".csv");
  scan::save_pgm(art.path(stem + ".pgm"), db, "dB");
  art.note(stem + ".pgm");

  mesh::RawField rf;
  rf.nx = map.mag.n1;
  rf.ny = map.mag.n2;
  rf.nz = 1;
  rf.sx.assign(map.c1.begin(), map.c1.end());
  rf.sy.assign(map.c2.begin(), map.c2.end());
  rf.sz = {map.plane_coord};
  rf.real = map.mag.data;
  mesh::save_real_field(art.path(stem + ".nfmg"), rf);
  art.note(stem + ".nfmg");
}

int plane_index_for(const probe::DomainSetup& dom, const PlaneRequest& r) {
  if (r.kind == "xy") {
    return dom.grid.nearest_zplane(dom.aperture_z +
                                   /* plate top + standoff */ r.offset);
  }
  if (r.kind == "xz") return dom.grid.nearest_yplane(r.offset);
  return dom.grid.nearest_xplane(r.offset);
}

long estimate_steps(const probe::DomainSetup& dom, const solver::SimConfig& sim) {
  (void)dom;
  return sim.max_steps;
}

int dry_run_report(const ExperimentConfig& c) {
  std::printf("experiment: %s\n", c.resolved_json().c_str());
  if (c.kind == ExperimentKind::Simulate || c.kind == ExperimentKind::Sweep ||
      c.kind == ExperimentKind::Scan) {
    probe::ProbeDomainOptions dom = c.domain;
    const auto setup = probe::build_probe_domain(c.probe_spec, dom);
    const auto cells = setup.grid.cell_count();
    const double mb = double(cells) *
                      double(mesh::GridSpec::estimated_bytes_per_cell()) /
                      (1024.0 * 1024.0);
    int runs = 2; // device + reference
    if (c.kind == ExperimentKind::Sweep) runs = int(c.sweep_values.size()) + 1;
    if (c.kind == ExperimentKind::Scan) runs = c.plan.npoints() + 1;
    std::printf("plan: %d solver runs, grid %d x %d x %d (%lld cells), "
                "~%.0f MiB per solver, max %ld steps\n",
                runs, setup.grid.nx(), setup.grid.ny(), setup.grid.nz(),
                static_cast<long long>(cells), mb,
                estimate_steps(setup, c.sim));
  } else {
    std::printf("plan: post-processing only\n");
  }
  return kExitOk;
}

void run_simulate(const ExperimentConfig& c, Artifacts& art) {
  probe::ProbeDomainOptions dom = c.domain;
  probe::DomainSetup dev = probe::build_probe_domain(c.probe_spec, dom);
  if (c.termination == probe::Termination::MatchedFar) {
    dev = probe::reference_variant(dev, c.probe_spec, dom);
  } else if (c.termination == probe::Termination::ShortAtAperture) {
    dev = short_variant(dev, c.probe_spec, dom);
  }
  const probe::DomainSetup ref = probe::reference_variant(dev, c.probe_spec, dom);

  solver::SimConfig sim = c.sim;
  auto ref_sol = ref.make_solver(sim.courant);
  const auto ref_run = ref_sol->run(sim);
  ref_sol.reset();

  auto sol = dev.make_solver(sim.courant);
  // Field monitors.
  struct PlaneKey {
    int axis, index;
  };
  std::vector<PlaneKey> plane_keys;
  for (const auto& pr : c.planes) {
    solver::PlaneMonitorDef def;
    def.normal_axis = pr.kind == "xy" ? 2 : pr.kind == "xz" ? 1 : 0;
    def.plane_index = plane_index_for(dev, pr);
    def.freqs_hz = pr.freqs_hz;
    sol->add_plane(def);
    plane_keys.push_back({def.normal_axis, def.plane_index});
  }
  if (!c.axis_line_freqs.empty()) {
    solver::LineMonitorDef def;
    def.axis = 2;
    def.i0 = dev.grid.nearest_xplane(0.0);
    def.j0 = dev.grid.nearest_yplane(0.0);
    def.freqs_hz = c.axis_line_freqs;
    sol->add_line(def);
  }
  if (c.dump_material_grid) {
    const auto mg = mesh::rasterize(dev.scene, dev.grid);
    mesh::save_material_grid(art.path("material_grid.nfmg"), dev.grid, mg);
    art.note("material_grid.nfmg");
  }
  const auto run = sol->run(sim);

  const auto freqs = ports::uniform_band(
      std::max(c.f_lo, dev.deembed.cutoff_hz * 1.03), c.f_hi, c.df);
  bool insufficient = false;
  const auto sp = ports::extract_s11(run.ports[0], ref_run.ports[0], freqs,
                                     dev.deembed, &insufficient);
  sp.save_csv(art.path("spectrum.csv"));
  art.note("spectrum.csv");

  json meta;
  meta["steps"] = run.steps;
  meta["decayed"] = run.decayed;
  meta["insufficient_decay"] = insufficient;
  meta["dt_s"] = run.dt;
  meta["cutoff_ghz"] = dev.deembed.cutoff_hz * 1e-9;
  meta["deembed_mm"] = dev.deembed.distance * 1e3;
  try {
    const auto res = probe::find_resonance(sp);
    meta["resonance_ghz"] = res.f_r * 1e-9;
    meta["depth_db"] = res.depth_db;
  } catch (const std::exception& e) {
    meta["resonance_error"] = e.what();
  }
  {
    std::ofstream os(art.path("run.json"));
    os << meta.dump(2) << "\n";
  }
  art.note("run.json");

  for (std::size_t p = 0; p < c.planes.size(); ++p) {
    for (double f : c.planes[p].freqs_hz) {
      auto map = fields::dft_field_plane(run, dev.grid, plane_keys[p].axis,
                                         plane_keys[p].index, f);
      map = fields::mirror_expand(map, dev.mirror_x && plane_keys[p].axis != 0,
                                  dev.mirror_y && plane_keys[p].axis != 1);
      char stem[64];
      std::snprintf(stem, sizeof stem, "plane%zu_%.3fghz", p, f * 1e-9);
      save_field_outputs(art, stem, map);
    }
  }
  if (!c.axis_line_freqs.empty()) {
    for (double f : c.axis_line_freqs) {
      const auto curve =
          fields::decay_curve(run, dev.grid, 2,
                              dev.aperture_z + c.probe_spec.iris_thickness, f);
      char name[64];
      std::snprintf(name, sizeof name, "decay_%.3fghz.csv", f * 1e-9);
      std::ofstream os(art.path(name));
      os << "z_mm,mag,db_rel_first\n";
      const double ref0 = curve.empty() || curve.front().mag <= 0.0
                              ? 1.0
                              : curve.front().mag;
      for (const auto& s : curve) {
        char line[128];
        std::snprintf(line, sizeof line, "%.6f,%.9e,%.4f\n", s.z * 1e3, s.mag,
                      20.0 * std::log10(s.mag / ref0 + 1e-12));
        os << line;
      }
      os.close();
      art.note(name);
    }
  }
}

void run_sweep(const ExperimentConfig& c, Artifacts& art) {
  probe::SweepOptions opt;
  opt.domain = c.domain;
  opt.sim = c.sim;
  opt.df = c.df;
  opt.workers = c.workers;
  opt.strict = c.strict;
  const auto result =
      probe::sweep_iris(c.probe_spec, c.sweep_param, c.sweep_values, opt);
  result.save_csv(art.path("sweep.csv"));
  art.note("sweep.csv");
}

void save_scan_images(const ExperimentConfig& c, Artifacts& art,
                      const scan::ScanRecord& rec,
                      const scan::FrequencyRule& rule, int upsample_factor) {
  const double f = scan::select_frequency(rec, rule);
  auto img = scan::form_image(rec, f);
  auto mag = img.magnitude_db();
  auto ph = img.phase_deg_unwrapped();
  if (upsample_factor > 1) {
    mag = scan::upsample(mag, upsample_factor);
    ph = scan::upsample(ph, upsample_factor);
  }
  scan::save_csv_matrix(art.path("image_mag_db.csv"), mag);
  art.note("image_mag_db.csv");
  scan::save_csv_matrix(art.path("image_phase_deg.csv"), ph);
  art.note("image_phase_deg.csv");
  scan::save_pgm(art.path("image_mag_db.pgm"), mag, "dB");
  art.note("image_mag_db.pgm");
  scan::save_pgm(art.path("image_phase_deg.pgm"), ph, "deg");
  art.note("image_phase_deg.pgm");
  json meta;
  meta["frequency_ghz"] = f * 1e-9;
  meta["upsample"] = upsample_factor;
  std::ofstream os(art.path("image.json"));
  os << meta.dump(2) << "\n";
  os.close();
  art.note("image.json");
}

void run_scan_experiment(const ExperimentConfig& c, Artifacts& art) {
  scan::ScanSetup setup;
  setup.probe = c.probe_spec;
  setup.domain = c.domain;
  setup.sample = c.sample;
  setup.plan = c.plan;
  setup.sim = c.sim;
  setup.workers = c.workers;
  setup.strict = c.strict;
  const auto rec = scan::run_scan(setup);
  rec.save_dir(art.path("record"));
  art.note("record/plan.json");
  save_scan_images(c, art, rec, c.image_rule, 1);
}

void run_analyze(const ExperimentConfig& c, Artifacts& art) {
  const auto rec = scan::ScanRecord::load_dir(c.analyze.record_dir);
  save_scan_images(c, art, rec, c.analyze.rule, c.analyze.upsample);
  if (c.analyze.wire_pair_mm.size() == 2 && rec.plan.ys.size() <= 1) {
    const double f = scan::select_frequency(rec, c.analyze.rule);
    std::vector<double> pos, val;
    for (std::size_t i = 0; i < rec.plan.xs.size(); ++i) {
      pos.push_back(rec.plan.xs[i] * 1e3);
      const auto& sp = rec.spectra[i];
      val.push_back(std::abs(sp.s11[sp.nearest_index(f)]));
    }
    json out;
    try {
      const double dip = scan::resolvability(pos, val, c.analyze.wire_pair_mm[0],
                                             c.analyze.wire_pair_mm[1]);
      out["resolved"] = dip >= 1.0;
      out["dip_db"] = dip;
    } catch (const SinglePeak&) {
      out["resolved"] = false;
      out["verdict"] = "single_peak";
    }
    std::ofstream os(art.path("resolvability.json"));
    os << out.dump(2) << "\n";
    os.close();
    art.note("resolvability.json");
  }
}

void run_render(const ExperimentConfig& c, Artifacts& art) {
  scan::Image2D<double> img;
  const auto& in = c.render.input;
  if (in.size() > 5 && in.substr(in.size() - 5) == ".nfmg") {
    const auto rf = mesh::load_field(in);
    if (rf.complex_valued) {
      img = scan::Image2D<double>(rf.nx, rf.ny);
      for (std::size_t i = 0; i < img.data.size(); ++i) {
        img.data[i] = std::abs(rf.cplx[i]);
      }
    } else {
      img = scan::Image2D<double>(rf.nx, rf.ny);
      img.data.assign(rf.real.begin(), rf.real.begin() + img.data.size());
    }
  } else {
    img = scan::load_csv_matrix(in);
  }
  scan::save_pgm(art.path(c.render.output), img);
  art.note(c.render.output);
}

} // namespace

int run_experiment(const ExperimentConfig& config, bool dry_run) {
  try {
    if (dry_run) return dry_run_report(config);
    const auto t0 = std::chrono::steady_clock::now();
    Artifacts art;
    art.dir = config.out_dir;
    fs::create_directories(art.dir);
    {
      std::ofstream os(art.path("resolved_config.json"));
      if (!os) throw IoError("cannot write resolved_config.json");
      os << config.resolved_json() << "\n";
    }
    art.note("resolved_config.json");

    switch (config.kind) {
      case ExperimentKind::Simulate: run_simulate(config, art); break;
      case ExperimentKind::Sweep: run_sweep(config, art); break;
      case ExperimentKind::Scan: run_scan_experiment(config, art); break;
      case ExperimentKind::Analyze: run_analyze(config, art); break;
      case ExperimentKind::Render: run_render(config, art); break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(art, wall);
    return kExitOk;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSchema;
  } catch (const DivergedSimulation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDiverged;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}

} // namespace nfmi::cli
