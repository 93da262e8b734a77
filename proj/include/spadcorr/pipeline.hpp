#pragma once

#include <optional>

#include "spadcorr/config.hpp"
#include "spadcorr/export.hpp"

namespace spadcorr {

// Artifact-producing command implementations shared by the command-line tool
// and the Python bindings. Every file written is recorded as a
// "name size hash" manifest line; reruns with equal inputs reproduce the
// manifests exactly.

struct CommandResult {
    std::vector<std::string> manifest;
    std::vector<std::string> summary;
    double seconds = 0.0;
};

// Simulates the configured run and writes <out>/nf.spf1 and/or <out>/ff.spf1.
CommandResult cmd_simulate(const RunConfig& config);

// Sum/minus projections plus a conditional slice through the intensity peak,
// as CSV and PGM.
CommandResult cmd_jpd(const std::filesystem::path& frames_path,
                      const std::filesystem::path& out_dir, int n_threads = 0);

struct EprArtifacts {
    EprReport report;
    std::optional<ScalingResult> scaling;
};

CommandResult cmd_epr(const std::filesystem::path& nf_path,
                      const std::filesystem::path& ff_path, double calibration_nf,
                      double calibration_ff, const std::vector<std::uint64_t>& checkpoints,
                      const std::filesystem::path& out_dir, EprArtifacts* artifacts = nullptr,
                      int n_threads = 0);

CommandResult cmd_certify(const std::filesystem::path& nf_path,
                          const std::filesystem::path& ff_path, int grid_side,
                          int grid_spacing, const std::filesystem::path& out_dir,
                          WitnessReport* report_out = nullptr, int n_threads = 0,
                          int n_blocks = 20);

// simulate -> jpd -> epr -> certify with one combined summary.
CommandResult cmd_pipeline(const RunConfig& config);

// Per-block grid statistics for the jackknife, streamed off an SPF1 file.
std::vector<GridStats> grid_stats_blocks(const std::filesystem::path& path,
                                         const ModeGrid& grid, int n_blocks,
                                         int n_threads = 0);

}  // namespace spadcorr
