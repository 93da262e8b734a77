#include <cmath>
#include <numeric>

#include "doctest.h"
#include "spadcorr/sim.hpp"

using namespace spadcorr;

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
    const double n = double(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

double lit_pixels(const FrameSet& fs, std::uint64_t l) {
    int count = 0;
    for (int p = 0; p < fs.geometry.n_pixels(); ++p) count += fs.pixel(l, p) ? 1 : 0;
    return double(count);
}

}  // namespace

TEST_CASE("pair sampling hits the configured widths") {
    SourceParams src;  // defaults: sigma_pump 350, delta_r 4.3, delta_k 1.0666e-2
    const std::size_t n = 500000;
    const auto pairs = sample_pairs(src, n, 42);
    REQUIRE(pairs.size() == n);

    std::vector<double> dx(n), cx(n), ksum(n), kdiff(n);
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = pairs[i].x1 - pairs[i].x2;
        cx[i] = 0.5 * (pairs[i].x1 + pairs[i].x2);
        ksum[i] = pairs[i].k1x + pairs[i].k2x;
        kdiff[i] = pairs[i].k1x - pairs[i].k2x;
    }
    CHECK(moments(dx).sd == doctest::Approx(src.delta_r_um).epsilon(0.01));
    CHECK(moments(cx).sd == doctest::Approx(src.sigma_pump_um / 2.0).epsilon(0.01));
    CHECK(moments(ksum).sd == doctest::Approx(src.delta_k_rad_um).epsilon(0.01));
    CHECK(moments(kdiff).sd == doctest::Approx(1.0 / (2.0 * src.delta_r_um)).epsilon(0.01));

    // The sampled widths must reproduce the sub-Heisenberg product.
    CHECK(moments(dx).sd * moments(ksum).sd < 0.5);
}

TEST_CASE("vanishing position width collapses the pair separation") {
    SourceParams src;
    src.delta_r_um = 1e-4;
    const auto pairs = sample_pairs(src, 20000, 7);
    double worst = 0.0;
    for (const auto& p : pairs)
        worst = std::max(worst, std::max(std::abs(p.x1 - p.x2), std::abs(p.y1 - p.y2)));
    CHECK(worst < 1e-3);
}

TEST_CASE("separable source decorrelates the photons") {
    SourceParams src;
    src.correlated = false;
    const std::size_t n = 300000;
    const auto pairs = sample_pairs(src, n, 11);

    double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& p : pairs) {
        sx += p.x1;
        sy += p.x2;
        sxy += p.x1 * p.x2;
        sxx += p.x1 * p.x1;
        syy += p.x2 * p.x2;
    }
    const double nn = double(n);
    const double cov = sxy / nn - (sx / nn) * (sy / nn);
    const double var1 = sxx / nn - (sx / nn) * (sx / nn);
    const double var2 = syy / nn - (sy / nn) * (sy / nn);
    CHECK(std::abs(cov / std::sqrt(var1 * var2)) < 0.01);

    // Each photon keeps the single-photon marginal width.
    const double want = std::hypot(src.sigma_pump_um / 2.0, 0.5 * src.delta_r_um);
    CHECK(std::sqrt(var1) == doctest::Approx(want).epsilon(0.01));
}

TEST_CASE("a correlated source outside the sampling regime is rejected") {
    SourceParams src;
    src.delta_r_um = 100.0;
    src.delta_k_rad_um = 0.1;  // product 10 >= 1/2
    CHECK_THROWS_AS(src.validate(), ValidationError);
    src.correlated = false;  // separable sources have no such constraint
    CHECK_NOTHROW(src.validate());
}

TEST_CASE("runs are deterministic and thread-count independent") {
    SourceParams src;
    src.mean_pairs_per_frame = 20.0;
    DetectorParams det;
    SensorGeometry geom;
    const FrameSet a = simulate_run(src, det, geom, ImagingMode::NearField, 600, 5, 1);
    const FrameSet b = simulate_run(src, det, geom, ImagingMode::NearField, 600, 5, 4);
    CHECK(a.payload == b.payload);
    const FrameSet c = simulate_run(src, det, geom, ImagingMode::NearField, 600, 6, 4);
    CHECK(a.payload != c.payload);
}

TEST_CASE("empty and silent runs produce empty frames") {
    SourceParams src;
    DetectorParams det;
    SensorGeometry geom;
    const FrameSet none = simulate_run(src, det, geom, ImagingMode::FarField, 0, 1);
    CHECK(none.n_frames == 0);
    CHECK(none.payload.empty());

    src.mean_pairs_per_frame = 0.0;
    det.dark_count_prob = 0.0;
    const FrameSet dark = simulate_run(src, det, geom, ImagingMode::FarField, 50, 1);
    for (auto byte : dark.payload) CHECK(byte == 0);
}

TEST_CASE("a pair on the optical axis lands on the centre pixel") {
    DetectorParams det;
    det.quantum_efficiency = 1.0;
    det.fill_factor = 1.0;
    det.dark_count_prob = 0.0;
    SensorGeometry geom;
    PairRecord pr{};  // both photons exactly on the axis

    std::vector<std::uint8_t> packed(frame_bytes(geom), 0xff);  // must be cleared
    detect_frame(std::span<const PairRecord>(&pr, 1), det, geom, ImagingMode::NearField, 3,
                 packed.data());
    int lit = 0, where = -1;
    for (int p = 0; p < geom.n_pixels(); ++p)
        if ((packed[p >> 3] >> (p & 7)) & 1u) {
            ++lit;
            where = p;
        }
    CHECK(lit == 1);
    CHECK(where == (geom.height / 2) * geom.width + geom.width / 2);
}

TEST_CASE("mean lit pixels matches the configured rate") {
    // 2 * mu * QE * fill detected photons per frame. Measured in the far
    // field, where the momentum spread keeps every photon on the array, and
    // at a tenth of the nominal rate so OR-binarization collisions are
    // negligible. At the full 234 pairs/frame the expected 33.7 detections
    // collapse onto ~29 lit pixels because the peak is only ~3 px wide.
    SourceParams src;
    src.mean_pairs_per_frame = 23.4;
    DetectorParams det;
    SensorGeometry geom;
    const std::uint64_t n = 5000;
    const FrameSet fs = simulate_run(src, det, geom, ImagingMode::FarField, n, 99);
    double total = 0.0;
    for (std::uint64_t l = 0; l < n; ++l) total += lit_pixels(fs, l);
    const double want = 2.0 * 23.4 * det.quantum_efficiency * det.fill_factor;  // 3.37
    CHECK(total / double(n) == doctest::Approx(want).epsilon(0.06));

    SourceParams full;  // nominal 234 pairs/frame
    const FrameSet sat = simulate_run(full, det, geom, ImagingMode::FarField, 1000, 98);
    double sat_total = 0.0;
    for (std::uint64_t l = 0; l < 1000; ++l) sat_total += lit_pixels(sat, l);
    CHECK(sat_total / 1000.0 > 25.0);
    CHECK(sat_total / 1000.0 < 33.7);
}

TEST_CASE("occupancy grows with quantum efficiency") {
    SourceParams src;
    SensorGeometry geom;
    auto occupancy = [&](double qe) {
        DetectorParams det;
        det.quantum_efficiency = qe;
        const FrameSet fs = simulate_run(src, det, geom, ImagingMode::NearField, 500, 17);
        double total = 0.0;
        for (std::uint64_t l = 0; l < 500; ++l) total += lit_pixels(fs, l);
        return total / 500.0;
    };
    const double low = occupancy(0.05), mid = occupancy(0.09), high = occupancy(0.20);
    CHECK(low < mid);
    CHECK(mid < high);
}

TEST_CASE("dark counts alone follow the configured probability") {
    SourceParams src;
    src.mean_pairs_per_frame = 0.0;
    DetectorParams det;
    det.dark_count_prob = 0.01;
    SensorGeometry geom;
    const std::uint64_t n = 500;
    const FrameSet fs = simulate_run(src, det, geom, ImagingMode::NearField, n, 23);
    double total = 0.0;
    for (std::uint64_t l = 0; l < n; ++l) total += lit_pixels(fs, l);
    // 2048 pixels at p = 0.01; OR-binarization of repeated picks loses a
    // negligible fraction at this rate.
    CHECK(total / double(n) == doctest::Approx(geom.n_pixels() * 0.01).epsilon(0.10));
}

TEST_CASE("near-field marginal width equals the magnified source size") {
    SourceParams src;
    DetectorParams det;
    SensorGeometry geom;
    const std::uint64_t n = 30000;
    const FrameSet fs = simulate_run(src, det, geom, ImagingMode::NearField, n, 4242);

    // Column histogram of all detections.
    std::vector<double> cols;
    for (std::uint64_t l = 0; l < n; ++l)
        for (int p = 0; p < geom.n_pixels(); ++p)
            if (fs.pixel(l, p)) cols.push_back(double(p % geom.width));

    const double photon_sd_um = std::hypot(src.sigma_pump_um / 2.0, 0.5 * src.delta_r_um);
    const double want_px = photon_sd_um * det.magnification_nf / geom.pixel_pitch_um;
    // Edge truncation at ~3.2 sigma and pixel quantization shift the measured
    // width by well under a percent each.
    CHECK(moments(cols).sd == doctest::Approx(want_px).epsilon(0.02));
}

TEST_CASE("ledger counts pairs and genuine coincidences") {
    SourceParams src;
    src.mean_pairs_per_frame = 50.0;
    DetectorParams det;
    SensorGeometry geom;
    const std::uint64_t n = 400;
    const SimLedger ledger = simulate_ledger(src, det, geom, ImagingMode::NearField, n, 77);
    CHECK(double(ledger.pairs_generated) ==
          doctest::Approx(src.mean_pairs_per_frame * double(n)).epsilon(0.05));
    CHECK(ledger.pairs_on_distinct_pixels <= ledger.pairs_generated);
    // Both-photon survival is (QE*fill)^2 = 0.0052; allow wide statistics.
    const double survive2 = std::pow(det.quantum_efficiency * det.fill_factor, 2.0);
    CHECK(double(ledger.pairs_on_distinct_pixels) <
          2.0 * survive2 * double(ledger.pairs_generated));
    CHECK(ledger.pairs_on_distinct_pixels > 0);
}

TEST_CASE("the run tag records the full configuration") {
    SourceParams src;
    DetectorParams det;
    SensorGeometry geom;
    const std::string tag = describe(src, det, geom, ImagingMode::FarField, 123, 9);
    CHECK(tag.find("mode=FF") != std::string::npos);
    CHECK(tag.find("n_frames=123") != std::string::npos);
    CHECK(tag.find("seed=9") != std::string::npos);
    CHECK(imaging_mode_from_string("nf") == ImagingMode::NearField);
    CHECK_THROWS_AS(imaging_mode_from_string("sideways"), ValidationError);
}
