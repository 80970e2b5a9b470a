#pragma once

#include <string>

#include "nfmi/config.hpp"

namespace nfmi::cli {

// Exit codes used by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitIo = 4;

// Runs the experiment and writes all artifacts (CSV spectra, sweep tables,
// scan directories, raw grids, PGM quicklooks, resolved_config.json and
// manifest.json) under config.out_dir. With dry_run the config is validated
// and the job plan (runs, cells, estimated memory) is printed instead.
int run_experiment(const ExperimentConfig& config, bool dry_run = false);

} // namespace nfmi::cli
