#include "nfmi/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nfmi/constants.hpp"
#include "nfmi/errors.hpp"

#include <nlohmann/json.hpp>

namespace nfmi::cli {

using nlohmann::json;

namespace {

// Object wrapper that records which keys were consumed and rejects the rest,
// hinting at missing unit suffixes.
struct Obj {
  const json& j;
  std::string path;
  mutable std::set<std::string> known;

  Obj(const json& jj, std::string p) : j(jj), path(std::move(p)) {
    if (!j.is_object()) throw SchemaError(path + ": expected an object");
  }

  const json* find(const std::string& key) const {
    known.insert(key);
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  double num(const std::string& key, double dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_number()) throw SchemaError(path + "." + key + ": expected a number");
    return v->get<double>();
  }

  double req_num(const std::string& key) const {
    const json* v = find(key);
    if (!v) throw SchemaError(path + "." + key + ": missing required field");
    if (!v->is_number()) throw SchemaError(path + "." + key + ": expected a number");
    return v->get<double>();
  }

  long integer(const std::string& key, long dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_number_integer()) {
      throw SchemaError(path + "." + key + ": expected an integer");
    }
    return v->get<long>();
  }

  bool boolean(const std::string& key, bool dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_boolean()) throw SchemaError(path + "." + key + ": expected a bool");
    return v->get<bool>();
  }

  std::string str(const std::string& key, const std::string& dflt) const {
    const json* v = find(key);
    if (!v) return dflt;
    if (!v->is_string()) throw SchemaError(path + "." + key + ": expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    static const char* kSuffixes[] = {"_mm", "_ghz", "_mhz", "_deg"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (known.count(it.key())) continue;
      for (const char* s : kSuffixes) {
        if (known.count(it.key() + s)) {
          throw UnitError(path + "." + it.key() + ": missing unit suffix (use " +
                          it.key() + s + ")");
        }
      }
      throw SchemaError(path + "." + it.key() + ": unknown key");
    }
  }
};

Vec3 vec3_mm(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number()) {
    throw SchemaError(path + ": expected [x, y, z] in millimeters");
  }
  return {v[0].get<double>() * 1e-3, v[1].get<double>() * 1e-3,
          v[2].get<double>() * 1e-3};
}

std::vector<double> ghz_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw SchemaError(path + ": expected a list of GHz values");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaError(path + ": expected numbers");
    out.push_back(e.get<double>() * 1e9);
  }
  return out;
}

void parse_probe(const json& j, const std::string& path, ExperimentConfig& c) {
  Obj o(j, path);
  const std::string kind = o.str("kind", "iris_loaded");
  if (kind == "iris_loaded") {
    c.probe_kind = probe::ProbeKind::IrisLoaded;
  } else if (kind == "open_circular") {
    c.probe_kind = probe::ProbeKind::OpenCircular;
  } else if (kind == "wr90") {
    c.probe_kind = probe::ProbeKind::Wr90;
  } else {
    throw SchemaError(path + ".kind: must be iris_loaded, open_circular or wr90");
  }
  auto& p = c.probe_spec;
  p.waveguide_length = o.num("L_mm", p.waveguide_length * 1e3) * 1e-3;
  p.guide_radius = o.num("a_mm", p.guide_radius * 1e3) * 1e-3;
  p.slot_radius = o.num("R_mm", p.slot_radius * 1e3) * 1e-3;
  p.gap = o.num("g_mm", p.gap * 1e3) * 1e-3;
  p.strip_width = o.num("W_mm", p.strip_width * 1e3) * 1e-3;
  p.iris_thickness = o.num("t_a_mm", p.iris_thickness * 1e3) * 1e-3;
  p.eps_fill = o.num("eps_fill", p.eps_fill);
  p.tan_delta_fill = o.num("tan_delta_fill", p.tan_delta_fill);
  c.pol_angle = o.num("pol_angle_deg", 0.0) * kPi / 180.0;
  o.finish();
  try {
    p.validate();
  } catch (const InvalidSpec& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void parse_grid(const json& j, const std::string& path, ExperimentConfig& c) {
  Obj o(j, path);
  auto& d = c.domain;
  d.fine_xy = o.num("fine_xy_mm", d.fine_xy * 1e3) * 1e-3;
  d.coarse_xy = o.num("coarse_xy_mm", d.coarse_xy * 1e3) * 1e-3;
  d.fine_z = o.num("fine_z_mm", d.fine_z * 1e3) * 1e-3;
  d.guide_dz = o.num("guide_dz_mm", d.guide_dz * 1e3) * 1e-3;
  d.air_depth = o.num("air_depth_mm", d.air_depth * 1e3) * 1e-3;
  d.port_distance = o.num("port_distance_mm", d.port_distance * 1e3) * 1e-3;
  d.source_distance = o.num("source_distance_mm", d.source_distance * 1e3) * 1e-3;
  d.pml_layers = int(o.integer("pml_layers", d.pml_layers));
  d.pml_back = int(o.integer("pml_back", d.pml_back));
  d.grading_ratio = o.num("grading_ratio", d.grading_ratio);
  const std::string sym = o.str("symmetry", "none");
  if (sym == "quarter") {
    d.quarter = true;
  } else if (sym == "half_y") {
    d.half_y = true;
  } else if (sym != "none") {
    throw SchemaError(path + ".symmetry: must be none, half_y or quarter");
  }
  for (double v : {d.fine_xy, d.coarse_xy, d.fine_z, d.guide_dz}) {
    if (!(v > 0.0)) throw SchemaError(path + ": grid spacings must be > 0");
  }
  o.finish();
}

void parse_solver(const json& j, const std::string& path, ExperimentConfig& c) {
  Obj o(j, path);
  c.sim.courant = o.num("courant", c.sim.courant);
  c.sim.max_steps = o.integer("max_steps", c.sim.max_steps);
  c.sim.stop_db = o.num("stop_db", c.sim.stop_db);
  c.sim.threads = int(o.integer("threads", c.sim.threads));
  c.sim.progress_every = o.integer("progress_every", c.sim.progress_every);
  c.sim.overflow = o.num("overflow", c.sim.overflow);
  if (c.sim.max_steps < 1) throw SchemaError(path + ".max_steps: must be >= 1");
  if (!(c.sim.courant > 0.0) || c.sim.courant > 0.99) {
    throw SchemaError(path + ".courant: must lie in (0, 0.99]");
  }
  o.finish();
}

int material_index(const mesh::Scene& s, const std::string& name,
                   const std::string& path) {
  for (std::size_t i = 0; i < s.materials.size(); ++i) {
    if (s.materials[i].name == name) return int(i);
  }
  throw SchemaError(path + ": material '" + name + "' is not defined");
}

void parse_sample(const json& j, const std::string& path, ExperimentConfig& c) {
  Obj o(j, path);
  c.sample.add_material(mesh::Material::vacuum());
  if (const json* mats = o.find("materials")) {
    if (!mats->is_array()) throw SchemaError(path + ".materials: expected a list");
    int mi = 0;
    for (const auto& mj : *mats) {
      const std::string mpath = path + ".materials[" + std::to_string(mi++) + "]";
      Obj mo(mj, mpath);
      const std::string name = mo.str("name", "");
      if (name.empty()) throw SchemaError(mpath + ".name: missing");
      if (mo.boolean("pec", false)) {
        auto m = mesh::Material::perfect_conductor();
        m.name = name;
        c.sample.add_material(m);
      } else {
        const double eps = mo.req_num("eps_r");
        const double td = mo.num("tan_delta", 0.0);
        const double sig = mo.num("sigma", 0.0);
        try {
          c.sample.add_material(mesh::Material::dielectric(name, eps, td, sig));
        } catch (const InvalidSpec& e) {
          throw SchemaError(mpath + ": " + e.what());
        }
      }
      mo.finish();
    }
  }
  const json* shapes = o.find("shapes");
  if (!shapes || !shapes->is_array()) {
    throw SchemaError(path + ".shapes: expected a list");
  }
  int si = 0;
  for (const auto& sj : *shapes) {
    const std::string spath = path + ".shapes[" + std::to_string(si++) + "]";
    Obj so(sj, spath);
    const std::string kind = so.str("kind", "");
    const std::string mat = so.str("material", "");
    const int mid = mat == "air" || mat.empty()
                        ? 0
                        : material_index(c.sample, mat, spath + ".material");
    try {
      if (kind == "box") {
        c.sample.paint(mesh::Box{vec3_mm(*so.find("corner_mm"), spath + ".corner_mm"),
                                 vec3_mm(*so.find("extents_mm"), spath + ".extents_mm")},
                       mid);
      } else if (kind == "cylinder") {
        const std::string ax = so.str("axis", "z");
        const mesh::Axis axis = ax == "x"   ? mesh::Axis::X
                                : ax == "y" ? mesh::Axis::Y
                                            : mesh::Axis::Z;
        c.sample.paint(
            mesh::SolidCylinder{axis,
                                vec3_mm(*so.find("center_mm"), spath + ".center_mm"),
                                so.req_num("radius_mm") * 1e-3,
                                so.req_num("length_mm") * 1e-3},
            mid);
      } else if (kind == "wire") {
        c.sample.paint(mesh::Wire{vec3_mm(*so.find("from_mm"), spath + ".from_mm"),
                                  vec3_mm(*so.find("to_mm"), spath + ".to_mm"),
                                  so.req_num("radius_mm") * 1e-3},
                       mid);
      } else if (kind == "hole") {
        const json* host = so.find("host");
        if (!host) throw SchemaError(spath + ".host: missing");
        Obj ho(*host, spath + ".host");
        mesh::Box hb{vec3_mm(*ho.find("corner_mm"), spath + ".host.corner_mm"),
                     vec3_mm(*ho.find("extents_mm"), spath + ".host.extents_mm")};
        ho.finish();
        c.sample.paint(mesh::CylindricalHole{vec3_mm(*so.find("mouth_mm"),
                                                     spath + ".mouth_mm"),
                                             so.req_num("radius_mm") * 1e-3,
                                             so.req_num("depth_mm") * 1e-3, hb},
                       mid);
      } else if (kind == "half_space") {
        const json* n = so.find("normal");
        if (!n) throw SchemaError(spath + ".normal: missing");
        c.sample.paint(
            mesh::HalfSpace{vec3_mm(*so.find("point_mm"), spath + ".point_mm"),
                            {(*n)[0].get<double>(), (*n)[1].get<double>(),
                             (*n)[2].get<double>()}},
            mid);
      } else {
        throw SchemaError(spath + ".kind: unknown shape kind '" + kind + "'");
      }
    } catch (const InvalidSpec& e) {
      throw SchemaError(spath + ": " + e.what());
    }
    so.finish();
  }
  c.has_sample = true;
  o.finish();
}

std::vector<double> parse_offsets(const json& j, const std::string& path,
                                  double* step_out) {
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>() * 1e-3);
    if (out.size() >= 2) *step_out = out[1] - out[0];
    return out;
  }
  Obj o(j, path);
  const double from = o.req_num("from");
  const double to = o.req_num("to");
  const double step = o.req_num("step");
  o.finish();
  if (!(step > 0.0) || to < from) {
    throw SchemaError(path + ": need step > 0 and to >= from");
  }
  *step_out = step * 1e-3;
  std::vector<double> out;
  for (double v = from; v <= to + 0.5 * step; v += step) out.push_back(v * 1e-3);
  return out;
}

void parse_plan(const json& j, const std::string& path, ExperimentConfig& c) {
  Obj o(j, path);
  const json* xs = o.find("x_mm");
  if (!xs) throw SchemaError(path + ".x_mm: missing scan offsets");
  c.plan.xs = parse_offsets(*xs, path + ".x_mm", &c.plan.step_x);
  if (const json* ys = o.find("y_mm")) {
    c.plan.ys = parse_offsets(*ys, path + ".y_mm", &c.plan.step_y);
  }
  c.plan.sod = o.num("sod_mm", 1.0) * 1e-3;
  o.finish();
}

void parse_rule(const json& j, const std::string& path, scan::FrequencyRule& r) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "resonance_first") {
      r.kind = scan::FrequencyRule::ResonanceOfFirstPoint;
    } else if (s == "min_first") {
      r.kind = scan::FrequencyRule::MinOfFirstPoint;
    } else {
      throw SchemaError(path + ": unknown rule '" + s + "'");
    }
    return;
  }
  Obj o(j, path);
  r.kind = scan::FrequencyRule::Explicit;
  r.explicit_hz = o.req_num("explicit_ghz") * 1e9;
  o.finish();
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Obj o(j, "config");

  const std::string kind = o.str("experiment", "");
  if (kind == "simulate") {
    c.kind = ExperimentKind::Simulate;
  } else if (kind == "sweep") {
    c.kind = ExperimentKind::Sweep;
  } else if (kind == "scan") {
    c.kind = ExperimentKind::Scan;
  } else if (kind == "analyze") {
    c.kind = ExperimentKind::Analyze;
  } else if (kind == "render") {
    c.kind = ExperimentKind::Render;
  } else {
    throw SchemaError(
        "config.experiment: must be simulate, sweep, scan, analyze or render");
  }

  c.out_dir = o.str("out_dir", c.out_dir);
  c.workers = int(o.integer("workers", c.workers));
  c.seed = o.integer("seed", 0);
  c.mem_budget_mb = std::size_t(o.integer("mem_budget_mb", long(c.mem_budget_mb)));
  c.strict = o.boolean("strict", false);
  if (c.workers < 1) throw SchemaError("config.workers: must be >= 1");

  if (const json* p = o.find("probe")) parse_probe(*p, "config.probe", c);
  if (const json* b = o.find("band")) {
    Obj bo(*b, "config.band");
    c.f_lo = bo.num("f_lo_ghz", c.f_lo * 1e-9) * 1e9;
    c.f_hi = bo.num("f_hi_ghz", c.f_hi * 1e-9) * 1e9;
    c.df = bo.num("df_mhz", c.df * 1e-6) * 1e6;
    bo.finish();
    if (!(c.f_lo > 0.0) || !(c.f_hi > c.f_lo) || !(c.df > 0.0)) {
      throw SchemaError("config.band: need 0 < f_lo < f_hi and df > 0");
    }
  }
  if (const json* g = o.find("grid")) parse_grid(*g, "config.grid", c);
  if (const json* s = o.find("solver")) parse_solver(*s, "config.solver", c);

  const std::string term = o.str("termination", "device");
  if (term == "device") {
    c.termination = probe::Termination::Device;
  } else if (term == "matched") {
    c.termination = probe::Termination::MatchedFar;
  } else if (term == "matched_at_aperture") {
    c.termination = probe::Termination::MatchedAtAperture;
  } else if (term == "short") {
    c.termination = probe::Termination::ShortAtAperture;
  } else {
    throw SchemaError("config.termination: unknown termination '" + term + "'");
  }

  c.dump_material_grid = o.boolean("dump_material_grid", false);

  if (const json* pl = o.find("planes")) {
    if (!pl->is_array()) throw SchemaError("config.planes: expected a list");
    int pi = 0;
    for (const auto& pj : *pl) {
      const std::string ppath = "config.planes[" + std::to_string(pi++) + "]";
      Obj po(pj, ppath);
      PlaneRequest r;
      r.kind = po.str("kind", "xy");
      if (r.kind != "xy" && r.kind != "xz" && r.kind != "yz") {
        throw SchemaError(ppath + ".kind: must be xy, xz or yz");
      }
      r.offset = po.num("offset_mm", 1.0) * 1e-3;
      const json* fq = po.find("freqs_ghz");
      if (!fq) throw SchemaError(ppath + ".freqs_ghz: missing");
      r.freqs_hz = ghz_list(*fq, ppath + ".freqs_ghz");
      po.finish();
      c.planes.push_back(std::move(r));
    }
  }
  if (const json* al = o.find("axis_line")) {
    Obj ao(*al, "config.axis_line");
    const json* fq = ao.find("freqs_ghz");
    if (!fq) throw SchemaError("config.axis_line.freqs_ghz: missing");
    c.axis_line_freqs = ghz_list(*fq, "config.axis_line.freqs_ghz");
    ao.finish();
  }

  if (const json* sw = o.find("sweep")) {
    Obj so(*sw, "config.sweep");
    const std::string p = so.str("param", "R");
    if (p == "R") {
      c.sweep_param = probe::IrisParam::SlotRadius;
    } else if (p == "W") {
      c.sweep_param = probe::IrisParam::StripWidth;
    } else if (p == "g") {
      c.sweep_param = probe::IrisParam::Gap;
    } else {
      throw SchemaError("config.sweep.param: must be R, W or g");
    }
    const json* vals = so.find("values_mm");
    if (!vals || !vals->is_array() || vals->empty()) {
      throw SchemaError("config.sweep.values_mm: expected a nonempty list");
    }
    for (const auto& v : *vals) c.sweep_values.push_back(v.get<double>() * 1e-3);
    so.finish();
  }

  if (const json* sa = o.find("sample")) parse_sample(*sa, "config.sample", c);
  if (const json* pl = o.find("plan")) parse_plan(*pl, "config.plan", c);
  if (const json* fr = o.find("frequency_rule")) {
    parse_rule(*fr, "config.frequency_rule", c.image_rule);
  }

  if (const json* an = o.find("analyze")) {
    Obj ao(*an, "config.analyze");
    c.analyze.record_dir = ao.str("record_dir", "");
    if (c.analyze.record_dir.empty()) {
      throw SchemaError("config.analyze.record_dir: missing");
    }
    if (const json* fr = ao.find("frequency_rule")) {
      parse_rule(*fr, "config.analyze.frequency_rule", c.analyze.rule);
    }
    c.analyze.upsample = int(ao.integer("upsample", 1));
    if (c.analyze.upsample < 1) {
      throw SchemaError("config.analyze.upsample: must be >= 1");
    }
    if (const json* wp = ao.find("wire_pair_mm")) {
      for (const auto& v : *wp) c.analyze.wire_pair_mm.push_back(v.get<double>());
      if (c.analyze.wire_pair_mm.size() != 2) {
        throw SchemaError("config.analyze.wire_pair_mm: expected two positions");
      }
    }
    ao.finish();
  }
  if (const json* re = o.find("render")) {
    Obj ro(*re, "config.render");
    c.render.input = ro.str("input", "");
    c.render.output = ro.str("output", "render.pgm");
    if (c.render.input.empty()) throw SchemaError("config.render.input: missing");
    ro.finish();
  }

  o.finish();

  // Cross-field requirements.
  if (c.kind == ExperimentKind::Sweep && c.sweep_values.empty()) {
    throw SchemaError("config.sweep: required for sweep experiments");
  }
  if (c.kind == ExperimentKind::Scan) {
    if (!c.has_sample) throw SchemaError("config.sample: required for scan experiments");
    if (c.plan.xs.empty()) throw SchemaError("config.plan: required for scan experiments");
  }
  if (c.kind == ExperimentKind::Analyze && c.analyze.record_dir.empty()) {
    throw SchemaError("config.analyze: required for analyze experiments");
  }
  if (c.kind == ExperimentKind::Render && c.render.input.empty()) {
    throw SchemaError("config.render: required for render experiments");
  }

  c.domain.kind = c.probe_kind;
  c.domain.termination = c.termination;
  c.domain.pol_angle = c.pol_angle;
  c.domain.f_lo = c.f_lo;
  c.domain.f_hi = c.f_hi;
  c.domain.mem_budget_mb = c.mem_budget_mb;
  c.plan.freqs_hz = ports::uniform_band(c.f_lo, c.f_hi, c.df);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::resolved_json() const {
  json j;
  j["experiment"] = kind == ExperimentKind::Simulate ? "simulate"
                    : kind == ExperimentKind::Sweep  ? "sweep"
                    : kind == ExperimentKind::Scan   ? "scan"
                    : kind == ExperimentKind::Analyze ? "analyze"
                                                      : "render";
  j["out_dir"] = out_dir;
  j["workers"] = workers;
  j["seed"] = seed;
  j["mem_budget_mb"] = mem_budget_mb;
  j["strict"] = strict;
  j["probe"] = {
      {"kind", probe_kind == probe::ProbeKind::IrisLoaded ? "iris_loaded"
               : probe_kind == probe::ProbeKind::OpenCircular ? "open_circular"
                                                              : "wr90"},
      {"L_mm", probe_spec.waveguide_length * 1e3},
      {"a_mm", probe_spec.guide_radius * 1e3},
      {"R_mm", probe_spec.slot_radius * 1e3},
      {"g_mm", probe_spec.gap * 1e3},
      {"W_mm", probe_spec.strip_width * 1e3},
      {"t_a_mm", probe_spec.iris_thickness * 1e3},
      {"eps_fill", probe_spec.eps_fill},
      {"tan_delta_fill", probe_spec.tan_delta_fill},
      {"pol_angle_deg", pol_angle * 180.0 / kPi},
  };
  j["band"] = {{"f_lo_ghz", f_lo * 1e-9},
               {"f_hi_ghz", f_hi * 1e-9},
               {"df_mhz", df * 1e-6}};
  j["grid"] = {{"fine_xy_mm", domain.fine_xy * 1e3},
               {"coarse_xy_mm", domain.coarse_xy * 1e3},
               {"fine_z_mm", domain.fine_z * 1e3},
               {"guide_dz_mm", domain.guide_dz * 1e3},
               {"air_depth_mm", domain.air_depth * 1e3},
               {"port_distance_mm", domain.port_distance * 1e3},
               {"source_distance_mm", domain.source_distance * 1e3},
               {"pml_layers", domain.pml_layers},
               {"pml_back", domain.pml_back},
               {"grading_ratio", domain.grading_ratio},
               {"symmetry", domain.quarter ? "quarter"
                            : domain.half_y ? "half_y"
                                            : "none"}};
  j["solver"] = {{"courant", sim.courant},     {"max_steps", sim.max_steps},
                 {"stop_db", sim.stop_db},     {"threads", sim.threads},
                 {"progress_every", sim.progress_every}, {"overflow", sim.overflow}};
  j["termination"] = termination == probe::Termination::Device ? "device"
                     : termination == probe::Termination::MatchedFar ? "matched"
                     : termination == probe::Termination::MatchedAtAperture
                         ? "matched_at_aperture"
                         : "short";
  if (!sweep_values.empty()) {
    json vals = json::array();
    for (double v : sweep_values) vals.push_back(v * 1e3);
    j["sweep"] = {{"param", iris_param_name(sweep_param)}, {"values_mm", vals}};
  }
  if (!plan.xs.empty()) {
    json xs = json::array(), ys = json::array();
    for (double v : plan.xs) xs.push_back(v * 1e3);
    for (double v : plan.ys) ys.push_back(v * 1e3);
    j["plan"] = {{"x_mm", xs}, {"y_mm", ys}, {"sod_mm", plan.sod * 1e3}};
  }
  return j.dump(2);
}

} // namespace nfmi::cli
