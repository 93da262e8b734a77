#pragma once

#include <string>

#include "spadcorr/jpd.hpp"

namespace spadcorr {

// Isotropic Gaussian peak fit f(r) = a * exp(-r^2 / (2 delta^2)) centred on the
// projection's centre bin, over a 21x21 window. Noise sigma is the standard
// deviation over the surrounding 40x40 region with the fit window masked out.
struct GaussianFitResult {
    double amplitude = 0.0;          // a, in projection value units
    double delta_px = 0.0;           // fitted width in bins
    double delta = 0.0;              // width in physical units (delta_px * calibration)
    double sigma_noise = 0.0;        // background standard deviation
    double delta_uncertainty = 0.0;  // sigma * sqrt(e) * delta / a, physical units
    double r_squared = 0.0;
    std::string units;
    bool reliable = true;        // false when amplitude < 3 sigma
    bool pixel_limited = false;  // delta_px < 0.5: value upper-bounds the true width
    bool converged = true;
};

struct GaussianFitOptions {
    int window_half = 10;      // 21x21 fit window
    int noise_half = 20;       // 40x40 noise region
    double delta_min_px = 0.05;
    double delta_max_px = 20.0;
    int max_iterations = 200;
};

// calibration: physical units per projection bin (e.g. um of crystal-plane
// separation, or rad/um of momentum sum). exclude_center must be set for
// minus-coordinate projections, whose central bin is zero by construction.
GaussianFitResult fit_gaussian_peak(const Projection& proj, bool exclude_center,
                                    double calibration, const std::string& units,
                                    const GaussianFitOptions& opt = {});

// Renders the fitted model onto a projection-shaped grid (for residual maps
// and the fit-idempotence check).
Projection render_fit(const Projection& like, const GaussianFitResult& fit);

}  // namespace spadcorr
