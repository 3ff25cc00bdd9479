#pragma once

#include <cstdint>

#include "config.hpp"

namespace wskde_cli {

/// Replication-parallel experiment drivers. Each writes its CSV outputs and
/// a metadata.json into cfg.out_dir; outputs are byte-identical across runs
/// and job counts for a fixed config.
void run_coverage(const ExperimentConfig& cfg, unsigned jobs);
void run_bo(const ExperimentConfig& cfg, unsigned jobs);
void run_estimate(const ExperimentConfig& cfg);
void emit_peak_table(const ExperimentConfig& cfg);

}  // namespace wskde_cli
