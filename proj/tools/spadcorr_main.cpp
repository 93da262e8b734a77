#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "spadcorr/pipeline.hpp"

namespace {

using namespace spadcorr;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string frames;
    std::string seed;
    std::string mode;
    std::string checkpoints;
    std::string grid_side;
    std::string grid_spacing;
    std::string out_dir;
};

void add_config_flags(CLI::App& cmd, CommonOpts& opts) {
    cmd.add_option("--config", opts.config_path, "key=value run configuration file");
    cmd.add_option("--preset", opts.preset, "built-in preset (paper-ff, paper-nf, separable)");
    cmd.add_option("--frames", opts.frames, "frame count (scientific notation accepted)");
    cmd.add_option("--seed", opts.seed, "run seed");
    cmd.add_option("--mode", opts.mode, "imaging mode: nf, ff or both");
    cmd.add_option("--checkpoints", opts.checkpoints, "comma-separated frame counts");
    cmd.add_option("--grid-side", opts.grid_side, "mode grid side length");
    cmd.add_option("--grid-spacing", opts.grid_spacing, "mode grid pixel gap");
    cmd.add_option("--out", opts.out_dir, "output directory");
}

RunConfig build_config(const CommonOpts& opts) {
    RunConfig config;
    if (!opts.config_path.empty()) config = load_config(opts.config_path);
    if (!opts.preset.empty()) config = preset_config(opts.preset);
    if (!opts.frames.empty()) apply_config_entry(config, "n_frames", opts.frames);
    if (!opts.seed.empty()) apply_config_entry(config, "seed", opts.seed);
    if (!opts.mode.empty()) apply_config_entry(config, "mode", opts.mode);
    if (!opts.checkpoints.empty())
        apply_config_entry(config, "checkpoints", opts.checkpoints);
    if (!opts.grid_side.empty()) apply_config_entry(config, "grid.side", opts.grid_side);
    if (!opts.grid_spacing.empty())
        apply_config_entry(config, "grid.spacing", opts.grid_spacing);
    if (!opts.out_dir.empty()) apply_config_entry(config, "output_dir", opts.out_dir);
    config.validate();
    return config;
}

void print_result(const std::string& command, const CommandResult& result) {
    std::cout << "== " << command << " ==\n";
    for (const auto& line : result.summary) std::cout << line << '\n';
    if (!result.manifest.empty()) {
        std::cout << "artifacts (name size fnv1a):\n";
        for (const auto& line : result.manifest) std::cout << "  " << line << '\n';
    }
    std::printf("elapsed: %.3f s\n", result.seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photon-pair correlation analysis for binary SPAD frame streams"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string nf_path, ff_path, frames_path;

    auto* sim = app.add_subcommand("simulate", "Generate frame files for a configuration");
    add_config_flags(*sim, opts);

    auto* jpd = app.add_subcommand("jpd", "Project the joint distribution of one frame file");
    jpd->add_option("frames_file", frames_path, "SPF1 frame file")->required();
    add_config_flags(*jpd, opts);

    auto* epr = app.add_subcommand("epr", "Correlation-width product and confidence");
    epr->add_option("--nf", nf_path, "near-field SPF1 file")->required();
    epr->add_option("--ff", ff_path, "far-field SPF1 file")->required();
    add_config_flags(*epr, opts);

    auto* certify = app.add_subcommand("certify", "Dimensionality witness on a mode grid");
    certify->add_option("--nf", nf_path, "near-field SPF1 file")->required();
    certify->add_option("--ff", ff_path, "far-field SPF1 file")->required();
    add_config_flags(*certify, opts);

    auto* pipeline = app.add_subcommand("pipeline", "simulate + jpd + epr + certify");
    add_config_flags(*pipeline, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig config = build_config(opts);
        const auto out = opts.out_dir.empty() ? config.output_dir
                                              : std::filesystem::path(opts.out_dir);
        if (sim->parsed()) {
            print_result("simulate", cmd_simulate(config));
        } else if (jpd->parsed()) {
            print_result("jpd", cmd_jpd(frames_path, out));
        } else if (epr->parsed()) {
            print_result("epr", cmd_epr(nf_path, ff_path, config.calibration_nf(),
                                        config.calibration_ff(), config.checkpoints, out));
        } else if (certify->parsed()) {
            print_result("certify", cmd_certify(nf_path, ff_path, config.grid_side,
                                                config.grid_spacing, out));
        } else if (pipeline->parsed()) {
            print_result("pipeline", cmd_pipeline(config));
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
