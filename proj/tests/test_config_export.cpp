#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spadcorr/config.hpp"
#include "spadcorr/export.hpp"
#include "spadcorr/frame_io.hpp"

using namespace spadcorr;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("shipped preset files match the embedded presets") {
    const std::filesystem::path presets =
        std::filesystem::path(SPADCORR_SOURCE_DIR) / "presets";
    for (const std::string& name : preset_names()) {
        const RunConfig from_file = load_config(presets / (name + ".cfg"));
        const RunConfig embedded = preset_config(name);
        CHECK(serialize_config(from_file) == serialize_config(embedded));
    }
    CHECK_THROWS_AS(preset_config("nonesuch"), ValidationError);
}

TEST_CASE("config serialization round-trips every field") {
    RunConfig cfg = preset_config("paper-ff");
    cfg.n_frames = 12345;
    cfg.seed = 987;
    cfg.checkpoints = {100, 12345};
    cfg.grid_side = 5;
    cfg.grid_spacing = 2;
    cfg.source.delta_r_um = 5.125;
    cfg.output_dir = "out/here";

    const auto path = temp_path("roundtrip.cfg");
    std::ofstream(path) << serialize_config(cfg);
    const RunConfig back = load_config(path);
    CHECK(serialize_config(back) == serialize_config(cfg));
    CHECK(back.checkpoints == cfg.checkpoints);
    CHECK(back.output_dir == cfg.output_dir);
}

TEST_CASE("frame counts accept scientific notation") {
    RunConfig cfg;
    apply_config_entry(cfg, "n_frames", "1e6");
    CHECK(cfg.n_frames == 1000000);
    apply_config_entry(cfg, "n_frames", "2500");
    CHECK(cfg.n_frames == 2500);
    CHECK_THROWS_AS(apply_config_entry(cfg, "n_frames", "1.5"), ValidationError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "n_frames", "-3"), ValidationError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "seed", "banana"), ValidationError);
}

TEST_CASE("unknown keys and bad values are rejected") {
    RunConfig cfg;
    CHECK_THROWS_AS(apply_config_entry(cfg, "source.sigma", "1"), ValidationError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "mode", "sideways"), ValidationError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "source.correlated", "maybe"), ValidationError);
    CHECK_NOTHROW(apply_config_entry(cfg, "mode", "nf"));
    CHECK(cfg.mode == RunMode::NearFieldOnly);
}

TEST_CASE("validation catches inconsistent checkpoint lists") {
    RunConfig cfg = preset_config("paper-nf");
    cfg.n_frames = 1000;
    cfg.checkpoints = {100, 100};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.checkpoints = {100, 2000};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.checkpoints = {100, 1000};
    CHECK_NOTHROW(cfg.validate());
    CHECK(parse_checkpoints("1e3,3e3,1e4") == std::vector<std::uint64_t>{1000, 3000, 10000});
}

TEST_CASE("calibrations derive from pitch, magnification and lens scale") {
    const RunConfig cfg = preset_config("paper-nf");
    // 150 um pitch demagnified by 300/35 -> 17.5 um of crystal plane per bin.
    CHECK(cfg.calibration_nf() == doctest::Approx(17.5).epsilon(1e-12));
    CHECK(cfg.calibration_ff() ==
          doctest::Approx(150.0 * 1.2933687334663618e-4).epsilon(1e-12));
}

TEST_CASE("value CSV output is deterministic and exact") {
    const auto path = temp_path("values.csv");
    write_values_csv(path, 2, 2, {0.0, 0.5, -0.25, 1e-9});
    CHECK(slurp(path) == "row,col,value\n0,0,0\n0,1,0.5\n1,0,-0.25\n1,1,1e-09\n");
    const std::string first = manifest_line(path);
    write_values_csv(path, 2, 2, {0.0, 0.5, -0.25, 1e-9});
    CHECK(manifest_line(path) == first);
    CHECK_THROWS_AS(write_values_csv(path, 3, 2, {1.0}), ValidationError);
}

TEST_CASE("16-bit PGM uses min-max scaling with a sidecar") {
    const auto path = temp_path("img.pgm");
    write_pgm16(path, 3, 2, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
    const std::string raw = slurp(path);
    CHECK(raw.rfind("P5\n3 2\n65535\n", 0) == 0);
    CHECK(raw.size() == std::string("P5\n3 2\n65535\n").size() + 12);
    // First sample maps to 0, last to 65535 (big-endian).
    CHECK((unsigned char)raw[raw.size() - 12] == 0);
    CHECK((unsigned char)raw[raw.size() - 11] == 0);
    CHECK((unsigned char)raw[raw.size() - 2] == 0xff);
    CHECK((unsigned char)raw[raw.size() - 1] == 0xff);

    const auto meta = read_key_value_file(path.string() + ".meta");
    CHECK(meta.at("min") == "0");
    CHECK(meta.at("max") == "5");
    CHECK(meta.at("maxval") == "65535");
}

TEST_CASE("coincidence matrices survive a CSV round trip") {
    SensorGeometry g{16, 8, 150.0, 10.0};
    const ModeGrid grid = select_grid_centered(g, 2, 1);
    CoincidenceMatrix mat;
    mat.basis = MubBasis::Momentum;
    mat.d = 4;
    mat.counts = {1.0, 0.0, 0.25, 3.5, 0.0, 2.0, 0.0, 0.0,
                  0.125, 0.0, 7.0, 0.0, 1e-12, 0.0, 0.0, 9.0};
    const auto path = temp_path("coinc.csv");
    write_coincidence_csv(path, mat, grid);
    const CoincidenceMatrix back = read_coincidence_csv(path);
    CHECK(back.basis == MubBasis::Momentum);
    CHECK(back.d == 4);
    CHECK(back.counts == mat.counts);

    const std::string header = slurp(path).substr(0, slurp(path).find('\n'));
    CHECK(header.find("basis=momentum") != std::string::npos);
    CHECK(header.find("side=2") != std::string::npos);
}

TEST_CASE("bound ladder CSV lists r from 1 to d") {
    const WitnessReport rep = certify(0.25, 0.25, 0.0, 4);
    const auto path = temp_path("bounds.csv");
    write_bounds_csv(path, rep);
    CHECK(slurp(path) == "r,bound\n1,0.25\n2,0.5\n3,0.75\n4,1\n");
}

TEST_CASE("report formatting carries the headline numbers") {
    const WitnessReport rep = certify(0.01, 0.24, 0.009, 196);
    const std::string w = format_witness_report(rep);
    CHECK(w.find("dimension d: 196") != std::string::npos);
    CHECK(w.find("certified dimensionality: ") != std::string::npos);
    CHECK(w.find("jackknife") != std::string::npos);

    EprReport er;
    er.delta_r = 4.3;
    er.delta_k = 1.0666e-2;
    er.product = er.delta_r * er.delta_k;
    er.confidence = 12.0;
    er.raw_violation = true;
    er.confident_violation = true;
    const std::string e = format_epr_report(er);
    CHECK(e.find("separability bound: 0.5") != std::string::npos);
    CHECK(e.find("confident violation (C > 5): yes") != std::string::npos);
}

TEST_CASE("manifest hashing is the 64-bit FNV-1a reference") {
    const auto path = temp_path("abc.txt");
    std::ofstream(path, std::ios::binary) << "abc";
    CHECK(fnv1a_file(path) == 0xe71fa2190541574bull);
    CHECK(manifest_line(path) == "abc.txt 3 e71fa2190541574b");
    CHECK_THROWS_AS(fnv1a_file(temp_path("does_not_exist.bin")), IoError);
}
