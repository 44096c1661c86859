#pragma once

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace ganstab::tools {

/// Files produced by one command: (file name, contents). Nothing touches the
/// disk until the whole set has been produced.
using OutputSet = std::vector<std::pair<std::string, std::string>>;

OutputSet cmd_simulate(const ExperimentConfig& cfg);
OutputSet cmd_discrete(const ExperimentConfig& cfg);
/// `nan_cells` receives the number of grid cells whose field could not be evaluated.
/// Output is identical for every `threads` value.
OutputSet cmd_streamline(const ExperimentConfig& cfg, std::size_t* nan_cells = nullptr, unsigned threads = 1);
OutputSet cmd_stability(const ExperimentConfig& cfg);

/// Dispatches on cfg.run.kind.
OutputSet run_experiment(const ExperimentConfig& cfg, std::size_t* nan_cells = nullptr, unsigned threads = 1);

/// --out, then the config's output.dir, then $GANSTAB_OUTPUT_DIR, then ".".
std::string resolve_output_dir(const std::string& cli_out, const std::string& config_dir);

/// Creates dir if needed and writes every file; returns the written paths.
std::vector<std::string> write_outputs(const std::string& dir, const OutputSet& files);

/// "_meta" block embedded in every JSON output.
Json meta_block(const std::string& config_hash, const std::string& kind);

}  // namespace ganstab::tools
