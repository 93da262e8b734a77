#include <cmath>
#include <random>

#include "doctest.h"
#include "spadcorr/gaussfit.hpp"

using namespace spadcorr;

namespace {

Projection blank(int w, int h) {
    Projection p;
    p.width = w;
    p.height = h;
    p.center_col = w / 2;
    p.center_row = h / 2;
    p.values.assign(std::size_t(w) * h, 0.0);
    return p;
}

Projection gaussian(int w, int h, double a, double delta, double noise_sd = 0.0,
                    std::uint64_t seed = 0) {
    Projection p = blank(w, h);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double dx = c - p.center_col, dy = r - p.center_row;
            p.at(r, c) = a * std::exp(-(dx * dx + dy * dy) / (2.0 * delta * delta));
            if (noise_sd > 0.0) p.at(r, c) += noise(rng);
        }
    return p;
}

}  // namespace

TEST_CASE("noiseless peak is recovered exactly") {
    const Projection p = gaussian(64, 64, 3.5, 2.0);
    const GaussianFitResult fit = fit_gaussian_peak(p, false, 1.0, "px");
    CHECK(fit.delta_px == doctest::Approx(2.0).epsilon(5e-4));
    CHECK(fit.amplitude == doctest::Approx(3.5).epsilon(5e-4));
    CHECK(fit.r_squared > 0.9999);
    CHECK(fit.reliable);
    CHECK_FALSE(fit.pixel_limited);
}

TEST_CASE("centre-excluded fit recovers the same width") {
    const Projection p = gaussian(64, 64, 1.0, 3.0);
    const GaussianFitResult fit = fit_gaussian_peak(p, true, 1.0, "px");
    CHECK(fit.delta_px == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(fit.reliable);
}

TEST_CASE("a single lit bin is reported as pixel limited") {
    // A delta function has no resolvable width; the fit stalls at the
    // residual floor near 0.2 bins and must flag the value as an upper bound.
    Projection p = blank(64, 64);
    p.at(p.center_row, p.center_col) = 1.0;
    const GaussianFitResult fit = fit_gaussian_peak(p, false, 1.0, "px");
    CHECK(fit.delta_px == doctest::Approx(0.2).epsilon(0.25));
    CHECK(fit.pixel_limited);
}

TEST_CASE("width uncertainty follows the noise propagation rule") {
    const Projection p = gaussian(80, 80, 5.0, 2.5, 0.05, 3);
    const GaussianFitResult fit = fit_gaussian_peak(p, false, 1.0, "px");
    CHECK(fit.sigma_noise > 0.0);
    const double want = fit.sigma_noise * std::sqrt(std::exp(1.0)) * fit.delta / fit.amplitude;
    CHECK(fit.delta_uncertainty == doctest::Approx(want).epsilon(1e-12));
    CHECK(fit.delta_px == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("fitting its own rendering is idempotent") {
    const Projection p = gaussian(64, 64, 2.0, 1.7, 0.02, 9);
    const GaussianFitResult first = fit_gaussian_peak(p, false, 1.0, "px");
    const Projection model = render_fit(p, first);
    const GaussianFitResult second = fit_gaussian_peak(model, false, 1.0, "px");
    CHECK(second.delta_px == doctest::Approx(first.delta_px).epsilon(1e-4));
    CHECK(second.amplitude == doctest::Approx(first.amplitude).epsilon(1e-4));
}

TEST_CASE("noise-only data is flagged unreliable") {
    // With the centre excluded the amplitude is an extrapolation; pure noise
    // must not pass the peak-presence gate.
    Projection p = blank(64, 64);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& v : p.values) v = noise(rng);
    const GaussianFitResult fit = fit_gaussian_peak(p, true, 1.0, "px");
    CHECK_FALSE(fit.reliable);
}

TEST_CASE("calibration converts bins to physical units") {
    const Projection p = gaussian(64, 64, 1.0, 2.0);
    const GaussianFitResult px = fit_gaussian_peak(p, false, 1.0, "px");
    const GaussianFitResult um = fit_gaussian_peak(p, false, 17.5, "um");
    CHECK(um.delta_px == px.delta_px);
    CHECK(um.delta == doctest::Approx(17.5 * um.delta_px).epsilon(1e-12));
    CHECK(um.units == "um");
}

TEST_CASE("degenerate inputs are rejected") {
    const Projection p = gaussian(64, 64, 1.0, 2.0);
    CHECK_THROWS_AS(fit_gaussian_peak(p, false, 0.0, "px"), ValidationError);
    CHECK_THROWS_AS(fit_gaussian_peak(p, false, -1.0, "px"), ValidationError);

    Projection off = gaussian(64, 64, 1.0, 2.0);
    off.center_col = -40;  // window fully outside the grid
    CHECK_THROWS_AS(fit_gaussian_peak(off, false, 1.0, "px"), ValidationError);
}
