#pragma once

#include <vector>

#include "spadcorr/gaussfit.hpp"

namespace spadcorr {

// Position-momentum correlation product and its confidence level:
// C = |1/2 - delta_r * delta_k| / sigma.
struct EprReport {
    double delta_r = 0.0;            // um
    double delta_r_uncertainty = 0.0;
    double delta_k = 0.0;            // rad/um
    double delta_k_uncertainty = 0.0;
    double product = 0.0;
    double sigma_product = 0.0;
    double confidence = 0.0;
    std::uint64_t n_frames = 0;
    bool raw_violation = false;        // product < 1/2
    bool confident_violation = false;  // product < 1/2 and C > 5
    bool reliable = true;              // both fits usable
};

EprReport epr_evaluate(const GaussianFitResult& fit_nf, const GaussianFitResult& fit_ff,
                       std::uint64_t n_frames);

struct ScalingPoint {
    std::uint64_t n_frames = 0;
    double confidence = 0.0;
    double product = 0.0;
    double sigma_product = 0.0;
    bool reliable = false;
};

// Fit of C(N) = c * sqrt(N) through the reliable checkpoints.
struct ScalingResult {
    std::vector<ScalingPoint> points;
    double coefficient = 0.0;  // c
    double r_squared = 0.0;
    int n_excluded = 0;
};

// Re-runs the projection + fit pipeline on the first N frames of each stream
// for every checkpoint. calibration_nf: um per minus-coordinate bin;
// calibration_ff: rad/um per sum-coordinate bin.
ScalingResult confidence_scaling(FrameSource& nf_frames, FrameSource& ff_frames,
                                 const std::vector<std::uint64_t>& checkpoints,
                                 double calibration_nf, double calibration_ff,
                                 int n_threads = 0);

// Shared helper: minus/sum projection -> width fit for one configuration.
GaussianFitResult fit_nf_width(const AccumStats& stats, double calibration_um_per_bin);
GaussianFitResult fit_ff_width(const AccumStats& stats, double calibration_radum_per_bin);

// Least-squares fit of y = c * sqrt(x); returns {c, r_squared}.
std::pair<double, double> fit_sqrt_law(const std::vector<std::pair<double, double>>& xy);

}  // namespace spadcorr
