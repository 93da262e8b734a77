#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spadcorr/frames.hpp"

namespace spadcorr {

// Double-Gaussian photon-pair source. Lengths in um, transverse momenta in
// rad/um at the crystal plane.
struct SourceParams {
    double sigma_pump_um = 350.0;       // pump 1/e^2 radius at the crystal
    double delta_r_um = 4.3;            // position correlation width
    double delta_k_rad_um = 1.0666e-2;  // momentum sum-coordinate width
    double mean_pairs_per_frame = 234.0;
    double wavelength_nm = 694.0;
    bool correlated = true;  // false: photons drawn independently (separable)

    void validate() const {
        if (sigma_pump_um <= 0 || delta_r_um <= 0 || delta_k_rad_um <= 0)
            throw ValidationError("source widths must be strictly positive");
        if (mean_pairs_per_frame < 0)
            throw ValidationError("mean pairs per frame must be >= 0");
        if (wavelength_nm <= 0) throw ValidationError("wavelength must be positive");
        if (correlated && delta_r_um * delta_k_rad_um >= 0.5)
            throw ValidationError(
                "correlated source requires delta_r * delta_k < 1/2");
    }
};

struct DetectorParams {
    double quantum_efficiency = 0.09;
    double fill_factor = 0.80;
    double dark_count_prob = 1.4e-9;  // per pixel per frame
    double magnification_nf = 300.0 / 35.0;
    double fourier_scale_ff = 1.2933687334663618e-4;  // rad/um per um on the sensor

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(quantum_efficiency) || !prob(fill_factor) || !prob(dark_count_prob))
            throw ValidationError("detector probabilities must lie in [0,1]");
        if (magnification_nf <= 0 || fourier_scale_ff <= 0)
            throw ValidationError("detector scales must be strictly positive");
    }
};

enum class ImagingMode { NearField, FarField };

const char* to_string(ImagingMode mode);
ImagingMode imaging_mode_from_string(const std::string& s);

// One generated pair: transverse positions at the crystal and transverse momenta.
struct PairRecord {
    double x1, y1, x2, y2;      // um
    double k1x, k1y, k2x, k2y;  // rad/um
};

// Samples pair kinematics: pair centre ~ N(0, sigma_pump/2) per axis,
// position offset ~ N(0, delta_r) per axis (photons sit at centre +- offset/2),
// momentum sum ~ N(0, delta_k) per axis, momentum difference ~ N(0, 1/(2 delta_r))
// per axis. Deterministic in the seed.
std::vector<PairRecord> sample_pairs(const SourceParams& src, std::size_t n_pairs,
                                     std::uint64_t rng_seed);

// Projects photons onto the binary array: survival with probability
// QE * fill_factor, nearest-pixel quantization with the optical axis at the
// centre of pixel (height/2, width/2), OR-binarization, independent dark counts.
// Writes the bit-packed frame into `packed` (frame_bytes(geom) bytes, cleared first).
void detect_frame(std::span<const PairRecord> pairs, const DetectorParams& det,
                  const SensorGeometry& geom, ImagingMode mode, std::uint64_t rng_seed,
                  std::uint8_t* packed);

// Full run: per-frame pair count ~ Poisson(mean_pairs_per_frame). The per-frame
// seed is derived from (rng_seed, frame index), so output is byte-identical for
// equal seeds regardless of scheduling.
FrameSet simulate_run(const SourceParams& src, const DetectorParams& det,
                      const SensorGeometry& geom, ImagingMode mode, std::uint64_t n_frames,
                      std::uint64_t rng_seed, int n_threads = 0);

// Generated-pair ledger for a run (same seed derivation as simulate_run):
// total pairs drawn, and detected genuine coincidences landing on distinct pixels.
struct SimLedger {
    std::uint64_t pairs_generated = 0;
    std::uint64_t pairs_on_distinct_pixels = 0;  // both photons detected, different pixels
};
SimLedger simulate_ledger(const SourceParams& src, const DetectorParams& det,
                          const SensorGeometry& geom, ImagingMode mode,
                          std::uint64_t n_frames, std::uint64_t rng_seed);

std::string describe(const SourceParams& src, const DetectorParams& det,
                     const SensorGeometry& geom, ImagingMode mode, std::uint64_t n_frames,
                     std::uint64_t seed);

}  // namespace spadcorr
