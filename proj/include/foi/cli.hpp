#pragma once

#include <string>
#include <vector>

#include "foi/config.hpp"

namespace foi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingInput = 3;
inline constexpr int kExitPipeline = 4;

/// Writes the synthetic slide raster, annotations.json and tissue_reference.pgm.
void cmd_synth(const RunConfig& config);
/// Writes valid_mask.pgm and the valid_mask.json sidecar.
void cmd_mask(const RunConfig& config);
/// Writes the stitched detector map as segmap.foim.
void cmd_detect(const RunConfig& config);
/// Runs the whole pipeline and writes proposal.json.
void cmd_propose(const RunConfig& config);
/// Runs and evaluates every configured slide; writes report.json and scatter.csv.
void cmd_evaluate(const RunConfig& config);

/// Entry point of the `foi` executable; returns the process exit code.
int run(int argc, char** argv);

}  // namespace foi::cli
