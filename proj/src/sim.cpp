#include "spadcorr/sim.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <thread>

namespace spadcorr {

const char* to_string(ImagingMode mode) {
    return mode == ImagingMode::NearField ? "NF" : "FF";
}

ImagingMode imaging_mode_from_string(const std::string& s) {
    if (s == "NF" || s == "nf") return ImagingMode::NearField;
    if (s == "FF" || s == "ff") return ImagingMode::FarField;
    throw ValidationError("unknown imaging mode: " + s);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t frame_seed(std::uint64_t run_seed, std::uint64_t frame_index) {
    return splitmix64(run_seed ^ splitmix64(frame_index + 1));
}

void draw_pairs(const SourceParams& src, std::size_t n_pairs, std::mt19937_64& rng,
                std::vector<PairRecord>& out) {
    std::normal_distribution<double> unit(0.0, 1.0);
    const double centre_sd = src.sigma_pump_um / 2.0;
    const double offset_sd = src.delta_r_um;
    const double ksum_sd = src.delta_k_rad_um;
    const double kdiff_sd = 1.0 / (2.0 * src.delta_r_um);

    out.resize(n_pairs);
    auto one_photon = [&](double& x, double& y, double& kx, double& ky) {
        x = centre_sd * unit(rng) + 0.5 * offset_sd * unit(rng);
        y = centre_sd * unit(rng) + 0.5 * offset_sd * unit(rng);
        kx = 0.5 * (ksum_sd * unit(rng) + kdiff_sd * unit(rng));
        ky = 0.5 * (ksum_sd * unit(rng) + kdiff_sd * unit(rng));
    };
    for (auto& p : out) {
        if (src.correlated) {
            const double x0 = centre_sd * unit(rng), y0 = centre_sd * unit(rng);
            const double dx = offset_sd * unit(rng), dy = offset_sd * unit(rng);
            const double sx = ksum_sd * unit(rng), sy = ksum_sd * unit(rng);
            const double dkx = kdiff_sd * unit(rng), dky = kdiff_sd * unit(rng);
            p.x1 = x0 + 0.5 * dx;
            p.y1 = y0 + 0.5 * dy;
            p.x2 = x0 - 0.5 * dx;
            p.y2 = y0 - 0.5 * dy;
            p.k1x = 0.5 * (sx + dkx);
            p.k1y = 0.5 * (sy + dky);
            p.k2x = 0.5 * (sx - dkx);
            p.k2y = 0.5 * (sy - dky);
        } else {
            one_photon(p.x1, p.y1, p.k1x, p.k1y);
            one_photon(p.x2, p.y2, p.k2x, p.k2y);
        }
    }
}

// -1 when the photon misses the array.
int map_to_pixel(double u, double v, const DetectorParams& det, const SensorGeometry& geom,
                 ImagingMode mode) {
    double x, y;
    if (mode == ImagingMode::NearField) {
        x = u * det.magnification_nf;
        y = v * det.magnification_nf;
    } else {
        x = u / det.fourier_scale_ff;
        y = v / det.fourier_scale_ff;
    }
    const int col = int(std::floor(x / geom.pixel_pitch_um + geom.width / 2.0 + 0.5));
    const int row = int(std::floor(y / geom.pixel_pitch_um + geom.height / 2.0 + 0.5));
    if (col < 0 || col >= geom.width || row < 0 || row >= geom.height) return -1;
    return row * geom.width + col;
}

void detect_into(std::span<const PairRecord> pairs, const DetectorParams& det,
                 const SensorGeometry& geom, ImagingMode mode, std::mt19937_64& rng,
                 std::uint8_t* packed, SimLedger* ledger) {
    std::memset(packed, 0, frame_bytes(geom));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double survive = det.quantum_efficiency * det.fill_factor;

    auto set_bit = [&](int p) { packed[p >> 3] |= std::uint8_t(1u << (p & 7)); };

    for (const auto& pr : pairs) {
        int p1 = -1, p2 = -1;
        if (uniform(rng) < survive) {
            p1 = mode == ImagingMode::NearField
                     ? map_to_pixel(pr.x1, pr.y1, det, geom, mode)
                     : map_to_pixel(pr.k1x, pr.k1y, det, geom, mode);
        }
        if (uniform(rng) < survive) {
            p2 = mode == ImagingMode::NearField
                     ? map_to_pixel(pr.x2, pr.y2, det, geom, mode)
                     : map_to_pixel(pr.k2x, pr.k2y, det, geom, mode);
        }
        if (p1 >= 0) set_bit(p1);
        if (p2 >= 0) set_bit(p2);
        if (ledger && p1 >= 0 && p2 >= 0 && p1 != p2) ++ledger->pairs_on_distinct_pixels;
    }

    if (det.dark_count_prob > 0.0) {
        std::binomial_distribution<int> darks(geom.n_pixels(), det.dark_count_prob);
        std::uniform_int_distribution<int> pick(0, geom.n_pixels() - 1);
        const int n_dark = darks(rng);
        for (int i = 0; i < n_dark; ++i) set_bit(pick(rng));
    }
}

void generate_frame(const SourceParams& src, const DetectorParams& det,
                    const SensorGeometry& geom, ImagingMode mode, std::uint64_t seed,
                    std::vector<PairRecord>& scratch, std::uint8_t* packed,
                    SimLedger* ledger) {
    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> pair_count(src.mean_pairs_per_frame);
    const int n_pairs = src.mean_pairs_per_frame > 0.0 ? pair_count(rng) : 0;
    draw_pairs(src, std::size_t(n_pairs), rng, scratch);
    if (ledger) ledger->pairs_generated += std::uint64_t(n_pairs);
    detect_into(scratch, det, geom, mode, rng, packed, ledger);
}

}  // namespace

std::vector<PairRecord> sample_pairs(const SourceParams& src, std::size_t n_pairs,
                                     std::uint64_t rng_seed) {
    src.validate();
    std::mt19937_64 rng(rng_seed);
    std::vector<PairRecord> pairs;
    draw_pairs(src, n_pairs, rng, pairs);
    return pairs;
}

void detect_frame(std::span<const PairRecord> pairs, const DetectorParams& det,
                  const SensorGeometry& geom, ImagingMode mode, std::uint64_t rng_seed,
                  std::uint8_t* packed) {
    det.validate();
    geom.validate();
    std::mt19937_64 rng(rng_seed);
    detect_into(pairs, det, geom, mode, rng, packed, nullptr);
}

FrameSet simulate_run(const SourceParams& src, const DetectorParams& det,
                      const SensorGeometry& geom, ImagingMode mode, std::uint64_t n_frames,
                      std::uint64_t rng_seed, int n_threads) {
    src.validate();
    det.validate();
    geom.validate();

    FrameSet fs;
    fs.geometry = geom;
    fs.source_tag = describe(src, det, geom, mode, n_frames, rng_seed);
    fs.resize_frames(n_frames);

    const int threads = n_threads > 0
                            ? n_threads
                            : int(std::max(1u, std::thread::hardware_concurrency()));
    const std::size_t fb = fs.bytes_per_frame();

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<PairRecord> scratch;
        for (std::uint64_t l = begin; l < end; ++l)
            generate_frame(src, det, geom, mode, frame_seed(rng_seed, l), scratch,
                           fs.payload.data() + l * fb, nullptr);
    };

    if (threads <= 1 || n_frames < 256) {
        work(0, n_frames);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work, n_frames * std::uint64_t(t) / std::uint64_t(threads),
                              n_frames * std::uint64_t(t + 1) / std::uint64_t(threads));
        for (auto& t : pool) t.join();
    }
    return fs;
}

SimLedger simulate_ledger(const SourceParams& src, const DetectorParams& det,
                          const SensorGeometry& geom, ImagingMode mode,
                          std::uint64_t n_frames, std::uint64_t rng_seed) {
    src.validate();
    det.validate();
    geom.validate();
    SimLedger ledger;
    std::vector<PairRecord> scratch;
    std::vector<std::uint8_t> packed(frame_bytes(geom));
    for (std::uint64_t l = 0; l < n_frames; ++l)
        generate_frame(src, det, geom, mode, frame_seed(rng_seed, l), scratch, packed.data(),
                       &ledger);
    return ledger;
}

std::string describe(const SourceParams& src, const DetectorParams& det,
                     const SensorGeometry& geom, ImagingMode mode, std::uint64_t n_frames,
                     std::uint64_t seed) {
    std::ostringstream tag;
    tag.precision(12);
    tag << "sim mode=" << to_string(mode) << " sensor=" << geom.width << "x" << geom.height
        << " pitch_um=" << geom.pixel_pitch_um << " exposure_ns=" << geom.exposure_ns
        << " sigma_pump_um=" << src.sigma_pump_um << " delta_r_um=" << src.delta_r_um
        << " delta_k=" << src.delta_k_rad_um << " mu=" << src.mean_pairs_per_frame
        << " wavelength_nm=" << src.wavelength_nm
        << " correlated=" << (src.correlated ? 1 : 0) << " qe=" << det.quantum_efficiency
        << " fill=" << det.fill_factor << " dark=" << det.dark_count_prob
        << " mag_nf=" << det.magnification_nf << " fscale_ff=" << det.fourier_scale_ff
        << " n_frames=" << n_frames << " seed=" << seed;
    return tag.str();
}

}  // namespace spadcorr
