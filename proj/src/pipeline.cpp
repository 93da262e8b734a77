#include "spadcorr/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "spadcorr/epr.hpp"
#include "spadcorr/frame_source.hpp"

namespace spadcorr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
}

void record(CommandResult& result, const std::filesystem::path& path) {
    result.manifest.push_back(manifest_line(path));
}

std::string fmt_double(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

}  // namespace

CommandResult cmd_simulate(const RunConfig& config) {
    config.validate();
    const auto t0 = Clock::now();
    CommandResult result;
    ensure_dir(config.output_dir);

    const auto run_one = [&](ImagingMode mode, const char* name) {
        const FrameSet frames =
            simulate_run(config.source, config.detector, config.geometry, mode,
                         config.n_frames, config.seed);
        const auto path = config.output_dir / name;
        write_frames(path, frames);
        record(result, path);
        record(result, path.string() + ".meta");
        result.summary.push_back(std::string(name) + ": " + std::to_string(config.n_frames) +
                                 " frames, seed " + std::to_string(config.seed));
    };
    if (config.mode != RunMode::FarFieldOnly) run_one(ImagingMode::NearField, "nf.spf1");
    if (config.mode != RunMode::NearFieldOnly) run_one(ImagingMode::FarField, "ff.spf1");

    result.seconds = elapsed(t0);
    return result;
}

CommandResult cmd_jpd(const std::filesystem::path& frames_path,
                      const std::filesystem::path& out_dir, int n_threads) {
    const auto t0 = Clock::now();
    CommandResult result;
    ensure_dir(out_dir);

    FileFrameSource source(frames_path);
    AccumOptions opt;
    opt.n_threads = n_threads;
    const AccumStats stats = accumulate(source, opt);
    if (stats.n_frames == 0) throw ValidationError("no frames in " + frames_path.string());

    const auto emit = [&](const Projection& proj, const std::string& stem) {
        const auto csv = out_dir / (stem + ".csv");
        const auto pgm = out_dir / (stem + ".pgm");
        write_projection_csv(csv, proj);
        write_pgm16(pgm, proj.width, proj.height, proj.values);
        record(result, csv);
        record(result, pgm);
        record(result, pgm.string() + ".meta");
    };
    emit(sum_projection(stats), "sum_projection");
    emit(minus_projection(stats), "minus_projection");

    // Conditional slice anchored at the brightest pixel.
    const auto intensity = intensity_image(stats);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < intensity.size(); ++i)
        if (intensity[i] > intensity[peak]) peak = i;
    const int anchor_row = int(peak) / stats.geometry.width;
    const int anchor_col = int(peak) % stats.geometry.width;
    const Projection slice = conditional_projection(stats, anchor_row, anchor_col);
    emit(slice, "conditional_slice");

    result.summary.push_back("frames: " + std::to_string(stats.n_frames));
    result.summary.push_back("conditional anchor: (" + std::to_string(anchor_row) + "," +
                             std::to_string(anchor_col) +
                             "), snr " + fmt_double(slice.snr));
    result.seconds = elapsed(t0);
    return result;
}

CommandResult cmd_epr(const std::filesystem::path& nf_path,
                      const std::filesystem::path& ff_path, double calibration_nf,
                      double calibration_ff, const std::vector<std::uint64_t>& checkpoints,
                      const std::filesystem::path& out_dir, EprArtifacts* artifacts,
                      int n_threads) {
    const auto t0 = Clock::now();
    CommandResult result;
    ensure_dir(out_dir);

    FileFrameSource nf(nf_path);
    FileFrameSource ff(ff_path);

    AccumOptions opt;
    opt.n_threads = n_threads;
    const AccumStats nf_stats = accumulate(nf, opt);
    const AccumStats ff_stats = accumulate(ff, opt);
    const auto fit_nf = fit_nf_width(nf_stats, calibration_nf);
    const auto fit_ff = fit_ff_width(ff_stats, calibration_ff);
    const EprReport report =
        epr_evaluate(fit_nf, fit_ff, std::min(nf_stats.n_frames, ff_stats.n_frames));

    // Residual heat maps of both fits.
    const auto emit_residual = [&](const AccumStats& stats, const GaussianFitResult& fit,
                                   bool minus, const std::string& stem) {
        const Projection proj = minus ? minus_projection(stats) : sum_projection(stats);
        const Projection model = render_fit(proj, fit);
        std::vector<double> residual(proj.values.size());
        for (std::size_t i = 0; i < residual.size(); ++i)
            residual[i] = proj.values[i] - model.values[i];
        const auto pgm = out_dir / (stem + ".pgm");
        write_pgm16(pgm, proj.width, proj.height, residual);
        record(result, pgm);
        record(result, pgm.string() + ".meta");
    };
    emit_residual(nf_stats, fit_nf, true, "nf_fit_residual");
    emit_residual(ff_stats, fit_ff, false, "ff_fit_residual");

    const auto summary_path = out_dir / "epr_summary.txt";
    {
        std::ofstream out(summary_path);
        if (!out) throw IoError("cannot open for writing: " + summary_path.string());
        out << format_epr_report(report);
    }
    record(result, summary_path);

    EprArtifacts local;
    local.report = report;
    if (!checkpoints.empty()) {
        nf.rewind();
        ff.rewind();
        local.scaling = confidence_scaling(nf, ff, checkpoints, calibration_nf,
                                           calibration_ff, n_threads);
        const auto scaling_path = out_dir / "scaling.csv";
        write_scaling_csv(scaling_path, *local.scaling);
        record(result, scaling_path);
        result.summary.push_back("scaling: c=" + fmt_double(local.scaling->coefficient) +
                                 ", R^2=" + fmt_double(local.scaling->r_squared));
    }

    std::istringstream lines(format_epr_report(report));
    for (std::string line; std::getline(lines, line);) result.summary.push_back(line);
    if (artifacts) *artifacts = std::move(local);
    result.seconds = elapsed(t0);
    return result;
}

std::vector<GridStats> grid_stats_blocks(const std::filesystem::path& path,
                                         const ModeGrid& grid, int n_blocks, int n_threads) {
    FileFrameSource source(path);
    std::vector<GridStats> blocks;
    AccumOptions opt;
    opt.n_threads = n_threads;
    opt.n_blocks = n_blocks;
    opt.block_observer = [&](int, const AccumStats& stats) {
        blocks.push_back(extract_grid_stats(stats, grid));
    };
    accumulate(source, opt);
    return blocks;
}

CommandResult cmd_certify(const std::filesystem::path& nf_path,
                          const std::filesystem::path& ff_path, int grid_side,
                          int grid_spacing, const std::filesystem::path& out_dir,
                          WitnessReport* report_out, int n_threads, int n_blocks) {
    const auto t0 = Clock::now();
    CommandResult result;
    ensure_dir(out_dir);

    const SensorGeometry geom = FileFrameSource(nf_path).geometry();
    const ModeGrid grid = select_grid_centered(geom, grid_side, grid_spacing);
    const auto nf_blocks = grid_stats_blocks(nf_path, grid, n_blocks, n_threads);
    const auto ff_blocks = grid_stats_blocks(ff_path, grid, n_blocks, n_threads);
    const WitnessReport report = witness_pipeline(nf_blocks, ff_blocks, grid);

    write_coincidence_csv(out_dir / "coincidence_position.csv", report.position, grid);
    write_coincidence_csv(out_dir / "coincidence_momentum.csv", report.momentum, grid);
    write_bounds_csv(out_dir / "bounds.csv", report);
    const auto report_path = out_dir / "witness_report.txt";
    {
        std::ofstream out(report_path);
        if (!out) throw IoError("cannot open for writing: " + report_path.string());
        out << format_witness_report(report);
    }
    record(result, out_dir / "coincidence_position.csv");
    record(result, out_dir / "coincidence_momentum.csv");
    record(result, out_dir / "bounds.csv");
    record(result, report_path);

    std::istringstream lines(format_witness_report(report));
    for (std::string line; std::getline(lines, line);) result.summary.push_back(line);
    // Timing stays out of the artifact file so that reruns reproduce the
    // manifest byte for byte.
    result.summary.push_back("witness time: " + fmt_double(report.witness_seconds) + " s");
    if (report_out) *report_out = report;
    result.seconds = elapsed(t0);
    return result;
}

CommandResult cmd_pipeline(const RunConfig& config) {
    const auto t0 = Clock::now();
    if (config.mode != RunMode::Both)
        throw ValidationError("the full pipeline needs both imaging modes (mode=both)");

    CommandResult result;
    const auto absorb = [&](const CommandResult& sub, const std::string& stage) {
        result.summary.push_back("[" + stage + "] " + fmt_double(sub.seconds) + " s");
        for (const auto& line : sub.summary) result.summary.push_back("  " + line);
        for (const auto& line : sub.manifest) result.manifest.push_back(line);
    };

    absorb(cmd_simulate(config), "simulate");
    const auto nf_path = config.output_dir / "nf.spf1";
    const auto ff_path = config.output_dir / "ff.spf1";
    absorb(cmd_jpd(nf_path, config.output_dir / "jpd_nf"), "jpd nf");
    absorb(cmd_jpd(ff_path, config.output_dir / "jpd_ff"), "jpd ff");

    EprArtifacts epr;
    absorb(cmd_epr(nf_path, ff_path, config.calibration_nf(), config.calibration_ff(),
                   config.checkpoints, config.output_dir / "epr", &epr),
           "epr");
    WitnessReport witness;
    absorb(cmd_certify(nf_path, ff_path, config.grid_side, config.grid_spacing,
                       config.output_dir / "witness", &witness),
           "certify");

    result.summary.push_back("product: " + fmt_double(epr.report.product));
    result.summary.push_back("confidence: " + fmt_double(epr.report.confidence));
    result.summary.push_back("F tilde: " + fmt_double(witness.f_tilde));
    result.summary.push_back("d_ent: " + std::to_string(witness.d_ent));
    result.seconds = elapsed(t0);
    result.summary.push_back("total wall clock: " + fmt_double(result.seconds) + " s");
    return result;
}

}  // namespace spadcorr
