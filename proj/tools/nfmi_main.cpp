// Batch front-end: parses an experiment config, runs it on a worker pool and
// writes all artifacts under the output directory.

#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "nfmi/errors.hpp"
#include "nfmi/experiment.hpp"
#include "nfmi/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  bool strict = false;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file (JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--workers", args.workers, "worker pool size (overrides config)");
  cmd->add_flag("--strict", args.strict, "fail on per-point errors");
  cmd->add_flag("--dry-run", args.dry_run,
                "validate the config and print the job plan without computing");
}

int dispatch(const CommonArgs& args, nfmi::cli::ExperimentKind expected,
             const char* name) {
  nfmi::cli::ExperimentConfig cfg;
  try {
    cfg = nfmi::cli::load_config_file(args.config_path);
  } catch (const nfmi::SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nfmi::cli::kExitSchema;
  } catch (const nfmi::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nfmi::cli::kExitIo;
  }
  if (cfg.kind != expected) {
    std::fprintf(stderr,
                 "error: config declares a different experiment than '%s'\n",
                 name);
    return nfmi::cli::kExitSchema;
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.workers > 0) cfg.workers = args.workers;
  if (args.strict) cfg.strict = true;
  if (const char* env = std::getenv("NFMI_MEM_BUDGET_MB")) {
    const long cap = std::atol(env);
    if (cap > 0) {
      cfg.mem_budget_mb = std::min<std::size_t>(cfg.mem_budget_mb, std::size_t(cap));
      cfg.domain.mem_budget_mb = cfg.mem_budget_mb;
    }
  }
  return nfmi::cli::run_experiment(cfg, args.dry_run);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-field microwave imaging workbench"};
  app.set_version_flag("--version", nfmi::kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  auto* simulate = app.add_subcommand("simulate", "single probe simulation");
  add_common(simulate, args);
  auto* sweep = app.add_subcommand("sweep", "iris parameter sweep");
  add_common(sweep, args);
  auto* scn = app.add_subcommand("scan", "virtual raster / line scan");
  add_common(scn, args);
  auto* analyze = app.add_subcommand("analyze", "post-process an existing scan record");
  add_common(analyze, args);
  auto* render = app.add_subcommand("render", "CSV / raw-grid to PGM quicklook");
  add_common(render, args);

  CLI11_PARSE(app, argc, argv);

  using nfmi::cli::ExperimentKind;
  if (simulate->parsed()) return dispatch(args, ExperimentKind::Simulate, "simulate");
  if (sweep->parsed()) return dispatch(args, ExperimentKind::Sweep, "sweep");
  if (scn->parsed()) return dispatch(args, ExperimentKind::Scan, "scan");
  if (analyze->parsed()) return dispatch(args, ExperimentKind::Analyze, "analyze");
  if (render->parsed()) return dispatch(args, ExperimentKind::Render, "render");
  return nfmi::cli::kExitError;
}
