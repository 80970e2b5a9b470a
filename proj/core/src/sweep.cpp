#include "nfmi/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "nfmi/errors.hpp"
#include "nfmi/threading.hpp"

namespace nfmi::probe {

std::string iris_param_name(IrisParam p) {
  switch (p) {
    case IrisParam::SlotRadius: return "R";
    case IrisParam::StripWidth: return "W";
    default: return "g";
  }
}

namespace {

mesh::ProbeSpec with_param(mesh::ProbeSpec s, IrisParam p, double v) {
  switch (p) {
    case IrisParam::SlotRadius: s.slot_radius = v; break;
    case IrisParam::StripWidth: s.strip_width = v; break;
    case IrisParam::Gap: s.gap = v; break;
  }
  return s;
}

} // namespace

SweepResult sweep_iris(const mesh::ProbeSpec& base, IrisParam param,
                       const std::vector<double>& values,
                       const SweepOptions& opt) {
  if (values.empty()) throw InvalidSpec("sweep_iris: no values");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!((values[i] > values[i - 1]) || (values[i] < values[i - 1])) ||
        (values[i] > values[i - 1]) != (values[1] > values[0])) {
      throw InvalidSpec("sweep_iris: values must be strictly monotone");
    }
  }

  // Size the mesh for the most demanding swept geometry.
  ProbeDomainOptions dom = opt.domain;
  double min_feature = std::min({base.gap, base.strip_width});
  double max_rw = base.slot_radius + base.strip_width;
  for (double v : values) {
    const auto s = with_param(base, param, v);
    s.validate();
    min_feature = std::min({min_feature, s.gap, s.strip_width});
    max_rw = std::max(max_rw, s.slot_radius + s.strip_width);
  }
  dom.fine_xy = std::min(dom.fine_xy, 0.5 * min_feature);
  dom.fine_z = std::min(dom.fine_z, 0.5 * base.iris_thickness);

  // Shared grid and reference run.
  const auto largest = with_param(
      base, param, param == IrisParam::Gap ? values.front() : values.back());
  DomainSetup proto = build_probe_domain(largest, dom);
  const DomainSetup ref_dom = reference_variant(proto, base, dom);

  solver::SimConfig sim = opt.sim;
  sim.threads = 1;
  auto ref_sol = ref_dom.make_solver(sim.courant);
  const auto ref_run = ref_sol->run(sim);
  ref_sol.reset();

  const auto freqs = ports::uniform_band(
      std::max(dom.f_lo, proto.deembed.cutoff_hz * 1.03), dom.f_hi, opt.df);

  SweepResult result;
  result.points.resize(values.size());
  parallel_for_jobs(int(values.size()), opt.workers, [&](int j) {
    auto& pt = result.points[std::size_t(j)];
    pt.param = iris_param_name(param);
    pt.value = values[std::size_t(j)];
    try {
      const auto spec_j = with_param(base, param, values[std::size_t(j)]);
      DomainSetup dev = proto;
      dev.scene = build_probe_domain(spec_j, dom).scene;
      auto sol = dev.make_solver(sim.courant);
      const auto run = sol->run(sim);
      const auto sp =
          ports::extract_s11(run.ports[0], ref_run.ports[0], freqs, dev.deembed);
      const auto res = find_resonance(sp);
      pt.f_r = res.f_r;
      pt.depth_db = res.depth_db;
      pt.status = "ok";
    } catch (const std::exception& e) {
      pt.status = std::string("error: ") + e.what();
      if (opt.strict) throw;
    }
  });
  return result;
}

} // namespace nfmi::probe
