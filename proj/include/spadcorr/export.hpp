#pragma once

#include <filesystem>
#include <string>

#include "spadcorr/epr.hpp"
#include "spadcorr/witness.hpp"

namespace spadcorr {

// All writers are deterministic: numbers use shortest round-trip formatting,
// so re-running a pipeline reproduces the files byte for byte.

void write_values_csv(const std::filesystem::path& path, int width, int height,
                      const std::vector<double>& values);
void write_projection_csv(const std::filesystem::path& path, const Projection& proj);

// 16-bit binary PGM, linear min-max scaling; the scaling is recorded in a
// ".meta" sidecar so values remain recoverable.
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<double>& values);

void write_coincidence_csv(const std::filesystem::path& path, const CoincidenceMatrix& mat,
                           const ModeGrid& grid);
CoincidenceMatrix read_coincidence_csv(const std::filesystem::path& path);

void write_bounds_csv(const std::filesystem::path& path, const WitnessReport& report);
std::string format_witness_report(const WitnessReport& report);

void write_scaling_csv(const std::filesystem::path& path, const ScalingResult& scaling);
std::string format_epr_report(const EprReport& report);

// FNV-1a over the file contents; "name size hash" manifest line.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string manifest_line(const std::filesystem::path& path);

}  // namespace spadcorr
