#include "spadcorr/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "spadcorr/frame_io.hpp"

namespace spadcorr {

const char* to_string(RunMode mode) {
    switch (mode) {
        case RunMode::NearFieldOnly: return "nf";
        case RunMode::FarFieldOnly: return "ff";
        case RunMode::Both: return "both";
    }
    throw ValidationError("bad run mode");
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "nf") return RunMode::NearFieldOnly;
    if (s == "ff") return RunMode::FarFieldOnly;
    if (s == "both") return RunMode::Both;
    throw ValidationError("unknown mode: " + s + " (expected nf, ff or both)");
}

void RunConfig::validate() const {
    geometry.validate();
    source.validate();
    detector.validate();
    if (grid_side < 2 || grid_spacing < 0)
        throw ValidationError("grid side must be >= 2 and spacing >= 0");
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw ValidationError("checkpoints must be strictly ascending");
    if (!checkpoints.empty() && checkpoints.back() > n_frames)
        throw ValidationError("checkpoints exceed the frame count");
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bad numeric value for " + key + ": " + value);
    }
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
    // Scientific notation is accepted for frame counts (1e6 etc.).
    const double v = parse_double(key, value);
    if (v < 0 || v != std::floor(v) || v > 1e18)
        throw ValidationError("bad count for " + key + ": " + value);
    return std::uint64_t(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError("bad boolean for " + key + ": " + value);
}

}  // namespace

std::vector<std::uint64_t> parse_checkpoints(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(parse_count("checkpoints", item));
    return out;
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "preset") config.preset_name = value;
    else if (key == "mode") config.mode = run_mode_from_string(value);
    else if (key == "n_frames") config.n_frames = parse_count(key, value);
    else if (key == "seed") config.seed = parse_count(key, value);
    else if (key == "checkpoints") config.checkpoints = parse_checkpoints(value);
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "grid.side") config.grid_side = int(parse_count(key, value));
    else if (key == "grid.spacing") config.grid_spacing = int(parse_count(key, value));
    else if (key == "geometry.width") config.geometry.width = int(parse_count(key, value));
    else if (key == "geometry.height") config.geometry.height = int(parse_count(key, value));
    else if (key == "geometry.pixel_pitch_um")
        config.geometry.pixel_pitch_um = parse_double(key, value);
    else if (key == "geometry.exposure_ns")
        config.geometry.exposure_ns = parse_double(key, value);
    else if (key == "source.sigma_pump_um")
        config.source.sigma_pump_um = parse_double(key, value);
    else if (key == "source.delta_r_um") config.source.delta_r_um = parse_double(key, value);
    else if (key == "source.delta_k_rad_um")
        config.source.delta_k_rad_um = parse_double(key, value);
    else if (key == "source.mean_pairs_per_frame")
        config.source.mean_pairs_per_frame = parse_double(key, value);
    else if (key == "source.wavelength_nm")
        config.source.wavelength_nm = parse_double(key, value);
    else if (key == "source.correlated") config.source.correlated = parse_bool(key, value);
    else if (key == "detector.quantum_efficiency")
        config.detector.quantum_efficiency = parse_double(key, value);
    else if (key == "detector.fill_factor")
        config.detector.fill_factor = parse_double(key, value);
    else if (key == "detector.dark_count_prob")
        config.detector.dark_count_prob = parse_double(key, value);
    else if (key == "detector.magnification_nf")
        config.detector.magnification_nf = parse_double(key, value);
    else if (key == "detector.fourier_scale_ff")
        config.detector.fourier_scale_ff = parse_double(key, value);
    else throw ValidationError("unknown config key: " + key);
}

RunConfig load_config(const std::filesystem::path& path) {
    RunConfig config;
    bool preset_applied = false;
    // A preset key pulls in the embedded baseline first, then the remaining
    // entries override it; order of the other keys does not matter.
    const auto entries = read_key_value_file(path);
    if (const auto it = entries.find("preset"); it != entries.end()) {
        config = preset_config(it->second);
        preset_applied = true;
    }
    for (const auto& [key, value] : entries) {
        if (preset_applied && key == "preset") continue;
        apply_config_entry(config, key, value);
    }
    config.validate();
    return config;
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    out.precision(17);
    out << "preset=" << config.preset_name << '\n';
    out << "mode=" << to_string(config.mode) << '\n';
    out << "n_frames=" << config.n_frames << '\n';
    out << "seed=" << config.seed << '\n';
    if (!config.checkpoints.empty()) {
        out << "checkpoints=";
        for (std::size_t i = 0; i < config.checkpoints.size(); ++i)
            out << (i ? "," : "") << config.checkpoints[i];
        out << '\n';
    }
    out << "output_dir=" << config.output_dir.string() << '\n';
    out << "grid.side=" << config.grid_side << '\n';
    out << "grid.spacing=" << config.grid_spacing << '\n';
    out << "geometry.width=" << config.geometry.width << '\n';
    out << "geometry.height=" << config.geometry.height << '\n';
    out << "geometry.pixel_pitch_um=" << config.geometry.pixel_pitch_um << '\n';
    out << "geometry.exposure_ns=" << config.geometry.exposure_ns << '\n';
    out << "source.sigma_pump_um=" << config.source.sigma_pump_um << '\n';
    out << "source.delta_r_um=" << config.source.delta_r_um << '\n';
    out << "source.delta_k_rad_um=" << config.source.delta_k_rad_um << '\n';
    out << "source.mean_pairs_per_frame=" << config.source.mean_pairs_per_frame << '\n';
    out << "source.wavelength_nm=" << config.source.wavelength_nm << '\n';
    out << "source.correlated=" << (config.source.correlated ? "true" : "false") << '\n';
    out << "detector.quantum_efficiency=" << config.detector.quantum_efficiency << '\n';
    out << "detector.fill_factor=" << config.detector.fill_factor << '\n';
    out << "detector.dark_count_prob=" << config.detector.dark_count_prob << '\n';
    out << "detector.magnification_nf=" << config.detector.magnification_nf << '\n';
    out << "detector.fourier_scale_ff=" << config.detector.fourier_scale_ff << '\n';
    return out.str();
}

RunConfig preset_config(const std::string& name) {
    // Baseline: 32x64 binary array, 150 um pitch, 10 ns exposure; source widths
    // delta_r = 4.3 um and delta_k = 1.0666e-2 rad/um with a 350 um pump waist;
    // 9% detection efficiency at 80% fill factor; near-field magnification
    // 300/35, far-field scale 2*pi / (0.694 um * 70 mm effective focal length).
    RunConfig config;
    config.preset_name = name;
    config.n_frames = 1000000;
    config.grid_side = 14;
    config.grid_spacing = 1;

    if (name == "paper-ff") {
        config.mode = RunMode::FarFieldOnly;
    } else if (name == "paper-nf") {
        config.mode = RunMode::NearFieldOnly;
    } else if (name == "separable") {
        config.mode = RunMode::Both;
        config.source.correlated = false;
    } else if (name == "entangled") {
        // High-fidelity variant for dimensionality certification on a 4x4
        // grid: wider position correlation (half a pixel, so cross-pixel
        // coincidences are abundant), near-ideal detection, modest pair rate
        // to keep accidentals low.
        config.mode = RunMode::Both;
        config.source.delta_r_um = 8.6;
        config.source.mean_pairs_per_frame = 30.0;
        config.detector.quantum_efficiency = 0.9;
        config.detector.fill_factor = 1.0;
        config.detector.dark_count_prob = 0.0;
        config.grid_side = 4;
        config.grid_spacing = 1;
    } else {
        throw ValidationError("unknown preset: " + name);
    }
    config.validate();
    return config;
}

std::vector<std::string> preset_names() {
    return {"paper-ff", "paper-nf", "separable", "entangled"};
}

}  // namespace spadcorr
