#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spadcorr/epr.hpp"
#include "spadcorr/frame_source.hpp"
#include "spadcorr/pipeline.hpp"

namespace py = pybind11;
using namespace spadcorr;

namespace {

// (n, height, width) uint8 array -> bit-packed FrameSet.
FrameSet frames_from_array(py::array_t<std::uint8_t, py::array::c_style> array,
                           double pixel_pitch_um, double exposure_ns) {
    if (array.ndim() != 3) throw ValidationError("expected a (n, height, width) array");
    SensorGeometry geom;
    geom.height = int(array.shape(1));
    geom.width = int(array.shape(2));
    geom.pixel_pitch_um = pixel_pitch_um;
    geom.exposure_ns = exposure_ns;
    geom.validate();

    FrameSet frames;
    frames.geometry = geom;
    frames.resize_frames(std::uint64_t(array.shape(0)));
    auto view = array.unchecked<3>();
    for (py::ssize_t f = 0; f < array.shape(0); ++f)
        for (int row = 0; row < geom.height; ++row)
            for (int col = 0; col < geom.width; ++col)
                if (view(f, row, col))
                    frames.set_pixel(std::uint64_t(f), row * geom.width + col);
    return frames;
}

AccumStats accumulate_frames(const FrameSet& frames, int n_threads) {
    MemoryFrameSource source(frames);
    AccumOptions opt;
    opt.n_threads = n_threads;
    return accumulate(source, opt);
}

AccumStats accumulate_file(const std::filesystem::path& path, int n_threads) {
    FileFrameSource source(path);
    AccumOptions opt;
    opt.n_threads = n_threads;
    return accumulate(source, opt);
}

py::array_t<double> projection_array(const Projection& proj) {
    py::array_t<double> out({proj.height, proj.width});
    auto view = out.mutable_unchecked<2>();
    for (int row = 0; row < proj.height; ++row)
        for (int col = 0; col < proj.width; ++col) view(row, col) = proj.at(row, col);
    return out;
}

py::array_t<double> matrix_array(const CoincidenceMatrix& mat) {
    py::array_t<double> out({mat.d, mat.d});
    auto view = out.mutable_unchecked<2>();
    for (int m = 0; m < mat.d; ++m)
        for (int n = 0; n < mat.d; ++n) view(m, n) = mat.at(m, n);
    return out;
}

py::dict result_dict(const CommandResult& result) {
    py::dict out;
    out["summary"] = result.summary;
    out["manifest"] = result.manifest;
    out["seconds"] = result.seconds;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Photon-pair correlation analysis for binary SPAD frame streams";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    py::class_<SensorGeometry>(m, "SensorGeometry")
        .def(py::init<>())
        .def_readwrite("width", &SensorGeometry::width)
        .def_readwrite("height", &SensorGeometry::height)
        .def_readwrite("pixel_pitch_um", &SensorGeometry::pixel_pitch_um)
        .def_readwrite("exposure_ns", &SensorGeometry::exposure_ns);

    py::class_<SourceParams>(m, "SourceParams")
        .def(py::init<>())
        .def_readwrite("sigma_pump_um", &SourceParams::sigma_pump_um)
        .def_readwrite("delta_r_um", &SourceParams::delta_r_um)
        .def_readwrite("delta_k_rad_um", &SourceParams::delta_k_rad_um)
        .def_readwrite("mean_pairs_per_frame", &SourceParams::mean_pairs_per_frame)
        .def_readwrite("wavelength_nm", &SourceParams::wavelength_nm)
        .def_readwrite("correlated", &SourceParams::correlated);

    py::class_<DetectorParams>(m, "DetectorParams")
        .def(py::init<>())
        .def_readwrite("quantum_efficiency", &DetectorParams::quantum_efficiency)
        .def_readwrite("fill_factor", &DetectorParams::fill_factor)
        .def_readwrite("dark_count_prob", &DetectorParams::dark_count_prob)
        .def_readwrite("magnification_nf", &DetectorParams::magnification_nf)
        .def_readwrite("fourier_scale_ff", &DetectorParams::fourier_scale_ff);

    py::enum_<ImagingMode>(m, "ImagingMode")
        .value("NEAR_FIELD", ImagingMode::NearField)
        .value("FAR_FIELD", ImagingMode::FarField);

    py::enum_<RunMode>(m, "RunMode")
        .value("NF", RunMode::NearFieldOnly)
        .value("FF", RunMode::FarFieldOnly)
        .value("BOTH", RunMode::Both);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("preset_name", &RunConfig::preset_name)
        .def_readwrite("mode", &RunConfig::mode)
        .def_readwrite("geometry", &RunConfig::geometry)
        .def_readwrite("source", &RunConfig::source)
        .def_readwrite("detector", &RunConfig::detector)
        .def_readwrite("n_frames", &RunConfig::n_frames)
        .def_readwrite("checkpoints", &RunConfig::checkpoints)
        .def_readwrite("grid_side", &RunConfig::grid_side)
        .def_readwrite("grid_spacing", &RunConfig::grid_spacing)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def("calibration_nf", &RunConfig::calibration_nf)
        .def("calibration_ff", &RunConfig::calibration_ff)
        .def("validate", &RunConfig::validate);

    m.def("preset_config", &preset_config, py::arg("name"));
    m.def("preset_names", &preset_names);
    m.def("load_config", &load_config, py::arg("path"));
    m.def("serialize_config", &serialize_config, py::arg("config"));

    py::class_<FrameSet>(m, "FrameSet")
        .def_readonly("geometry", &FrameSet::geometry)
        .def_readonly("n_frames", &FrameSet::n_frames)
        .def("pixel", &FrameSet::pixel, py::arg("frame"), py::arg("pixel_index"));

    m.def("frames_from_array", &frames_from_array, py::arg("array"),
          py::arg("pixel_pitch_um") = 150.0, py::arg("exposure_ns") = 10.0);
    m.def("simulate_run", &simulate_run, py::arg("source"), py::arg("detector"),
          py::arg("geometry"), py::arg("mode"), py::arg("n_frames"), py::arg("seed"),
          py::arg("n_threads") = 0, py::call_guard<py::gil_scoped_release>());
    m.def("write_frames", &write_frames, py::arg("path"), py::arg("frames"));
    m.def("read_frames", &read_frames, py::arg("path"));

    py::class_<AccumStats>(m, "AccumStats")
        .def_readonly("n_frames", &AccumStats::n_frames)
        .def("pair_count", &AccumStats::pair_count, py::arg("i"), py::arg("j"))
        .def("marginal",
             [](const AccumStats& stats, int pixel) {
                 return stats.marginal.at(std::size_t(pixel));
             })
        .def("gamma", &jpd_element, py::arg("i"), py::arg("j"))
        .def("intensity", [](const AccumStats& s) {
            const auto img = intensity_image(s);
            py::array_t<double> out({s.geometry.height, s.geometry.width});
            auto view = out.mutable_unchecked<2>();
            for (int row = 0; row < s.geometry.height; ++row)
                for (int col = 0; col < s.geometry.width; ++col)
                    view(row, col) = img[std::size_t(row) * s.geometry.width + col];
            return out;
        });

    m.def("accumulate_frames", &accumulate_frames, py::arg("frames"),
          py::arg("n_threads") = 0, py::call_guard<py::gil_scoped_release>());
    m.def("accumulate_file", &accumulate_file, py::arg("path"), py::arg("n_threads") = 0,
          py::call_guard<py::gil_scoped_release>());

    py::class_<Projection>(m, "Projection")
        .def_readonly("width", &Projection::width)
        .def_readonly("height", &Projection::height)
        .def_readonly("center_col", &Projection::center_col)
        .def_readonly("center_row", &Projection::center_row)
        .def_readonly("snr", &Projection::snr)
        .def("array", &projection_array);

    m.def("sum_projection", &sum_projection, py::arg("stats"));
    m.def("minus_projection", &minus_projection, py::arg("stats"));
    m.def("conditional_projection", &conditional_projection, py::arg("stats"),
          py::arg("anchor_row"), py::arg("anchor_col"));

    py::class_<GaussianFitResult>(m, "GaussianFitResult")
        .def_readonly("amplitude", &GaussianFitResult::amplitude)
        .def_readonly("delta_px", &GaussianFitResult::delta_px)
        .def_readonly("delta", &GaussianFitResult::delta)
        .def_readonly("delta_uncertainty", &GaussianFitResult::delta_uncertainty)
        .def_readonly("sigma_noise", &GaussianFitResult::sigma_noise)
        .def_readonly("r_squared", &GaussianFitResult::r_squared)
        .def_readonly("units", &GaussianFitResult::units)
        .def_readonly("reliable", &GaussianFitResult::reliable)
        .def_readonly("pixel_limited", &GaussianFitResult::pixel_limited);

    m.def(
        "fit_gaussian_peak",
        [](const Projection& proj, bool exclude_center, double calibration,
           const std::string& units) {
            return fit_gaussian_peak(proj, exclude_center, calibration, units);
        },
        py::arg("projection"), py::arg("exclude_center"), py::arg("calibration") = 1.0,
        py::arg("units") = "px");

    py::class_<EprReport>(m, "EprReport")
        .def_readonly("delta_r", &EprReport::delta_r)
        .def_readonly("delta_k", &EprReport::delta_k)
        .def_readonly("product", &EprReport::product)
        .def_readonly("sigma_product", &EprReport::sigma_product)
        .def_readonly("confidence", &EprReport::confidence)
        .def_readonly("raw_violation", &EprReport::raw_violation)
        .def_readonly("confident_violation", &EprReport::confident_violation)
        .def_readonly("reliable", &EprReport::reliable);

    m.def("epr_evaluate", &epr_evaluate, py::arg("fit_nf"), py::arg("fit_ff"),
          py::arg("n_frames"));
    m.def("fit_nf_width", &fit_nf_width, py::arg("stats"), py::arg("calibration_um_per_bin"));
    m.def("fit_ff_width", &fit_ff_width, py::arg("stats"),
          py::arg("calibration_radum_per_bin"));

    py::class_<ModeGrid>(m, "ModeGrid")
        .def_readonly("side", &ModeGrid::side)
        .def_readonly("spacing", &ModeGrid::spacing)
        .def_readonly("origin_row", &ModeGrid::origin_row)
        .def_readonly("origin_col", &ModeGrid::origin_col)
        .def("d", &ModeGrid::d)
        .def("pixel_of", &ModeGrid::pixel_of, py::arg("mode"));

    m.def("select_grid", &select_grid, py::arg("geometry"), py::arg("side"),
          py::arg("spacing"), py::arg("origin_row"), py::arg("origin_col"));
    m.def("select_grid_centered", &select_grid_centered, py::arg("geometry"),
          py::arg("side"), py::arg("spacing"));

    py::enum_<MubBasis>(m, "MubBasis")
        .value("POSITION", MubBasis::Position)
        .value("MOMENTUM", MubBasis::Momentum);

    py::class_<CoincidenceMatrix>(m, "CoincidenceMatrix")
        .def_readonly("basis", &CoincidenceMatrix::basis)
        .def_readonly("d", &CoincidenceMatrix::d)
        .def("array", &matrix_array);

    m.def(
        "coincidence_matrix",
        [](const AccumStats& stats, const ModeGrid& grid, MubBasis basis) {
            return coincidence_matrix(stats, grid, basis);
        },
        py::arg("stats"), py::arg("grid"), py::arg("basis"));
    m.def("compute_F1", &compute_F1, py::arg("position_matrix"));
    m.def("compute_F2_lower", &compute_F2_lower, py::arg("position_matrix"),
          py::arg("momentum_matrix"));

    py::class_<WitnessReport>(m, "WitnessReport")
        .def_readonly("d", &WitnessReport::d)
        .def_readonly("f1", &WitnessReport::f1)
        .def_readonly("f2_lower", &WitnessReport::f2_lower)
        .def_readonly("f_tilde", &WitnessReport::f_tilde)
        .def_readonly("uncertainty", &WitnessReport::uncertainty)
        .def_readonly("bounds", &WitnessReport::bounds)
        .def_readonly("d_ent", &WitnessReport::d_ent)
        .def_readonly("position", &WitnessReport::position)
        .def_readonly("momentum", &WitnessReport::momentum);

    m.def("certify", &certify, py::arg("f1"), py::arg("f2_lower"), py::arg("uncertainty"),
          py::arg("d"));
    m.def(
        "witness_files",
        [](const std::filesystem::path& nf_path, const std::filesystem::path& ff_path,
           int side, int spacing, int n_blocks, int n_threads) {
            const SensorGeometry geom = FileFrameSource(nf_path).geometry();
            const ModeGrid grid = select_grid_centered(geom, side, spacing);
            const auto nf = grid_stats_blocks(nf_path, grid, n_blocks, n_threads);
            const auto ff = grid_stats_blocks(ff_path, grid, n_blocks, n_threads);
            return witness_pipeline(nf, ff, grid);
        },
        py::arg("nf_path"), py::arg("ff_path"), py::arg("side") = 14, py::arg("spacing") = 1,
        py::arg("n_blocks") = 20, py::arg("n_threads") = 0,
        py::call_guard<py::gil_scoped_release>());

    m.def("cmd_simulate", [](const RunConfig& c) { return result_dict(cmd_simulate(c)); },
          py::arg("config"));
    m.def(
        "cmd_jpd",
        [](const std::filesystem::path& frames, const std::filesystem::path& out) {
            return result_dict(cmd_jpd(frames, out));
        },
        py::arg("frames_path"), py::arg("out_dir"));
    m.def("cmd_pipeline", [](const RunConfig& c) { return result_dict(cmd_pipeline(c)); },
          py::arg("config"));
}
