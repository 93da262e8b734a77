#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spadcorr/sim.hpp"

namespace spadcorr {

enum class RunMode { NearFieldOnly, FarFieldOnly, Both };

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

// Declarative description of one pipeline run, loadable from a flat
// key=value file. Presets ship with the repo and are also embedded here so a
// build works without the data files.
struct RunConfig {
    std::string preset_name = "custom";
    RunMode mode = RunMode::Both;
    SensorGeometry geometry;
    SourceParams source;
    DetectorParams detector;
    std::uint64_t n_frames = 0;
    std::vector<std::uint64_t> checkpoints;
    int grid_side = 14;
    int grid_spacing = 1;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = ".";

    // um of crystal-plane separation per minus-coordinate bin.
    [[nodiscard]] double calibration_nf() const {
        return geometry.pixel_pitch_um / detector.magnification_nf;
    }
    // rad/um of momentum sum per sum-coordinate bin.
    [[nodiscard]] double calibration_ff() const {
        return geometry.pixel_pitch_um * detector.fourier_scale_ff;
    }

    void validate() const;
};

// Embedded presets: "paper-ff", "paper-nf", "separable", "entangled".
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

RunConfig load_config(const std::filesystem::path& path);
// Inverse of load_config; round-trips all fields.
std::string serialize_config(const RunConfig& config);

// Applies one key=value assignment (shared by file loading and CLI overrides).
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

std::vector<std::uint64_t> parse_checkpoints(const std::string& csv);

}  // namespace spadcorr
