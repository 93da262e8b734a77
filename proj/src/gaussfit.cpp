#include "spadcorr/gaussfit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace spadcorr {

namespace {

struct Sample {
    double r2;  // squared distance from centre, bins
    double y;
};

// Damped Gauss-Newton on (a, delta) with analytic gradients. The model is
// well-conditioned for resolved peaks; for sub-bin peaks the residual floor
// stops the width descent at ~0.2 bins (rms threshold relative to the peak).
void levenberg_fit(const std::vector<Sample>& samples, double& a, double& delta,
                   const GaussianFitOptions& opt, double peak_scale, bool& converged) {
    auto residual_sum = [&](double av, double dv) {
        double s = 0.0;
        const double inv = 1.0 / (2.0 * dv * dv);
        for (const auto& smp : samples) {
            const double r = av * std::exp(-smp.r2 * inv) - smp.y;
            s += r * r;
        }
        return s;
    };

    double lambda = 1e-3;
    double s_cur = residual_sum(a, delta);
    const double rms_floor = 1e-6 * std::max(peak_scale, 1e-300);
    converged = false;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (std::sqrt(s_cur / double(samples.size())) < rms_floor) {
            converged = true;
            break;
        }
        // Normal equations.
        double haa = 0, had = 0, hdd = 0, ga = 0, gd = 0;
        const double inv = 1.0 / (2.0 * delta * delta);
        for (const auto& smp : samples) {
            const double e = std::exp(-smp.r2 * inv);
            const double m = a * e;
            const double r = m - smp.y;
            const double ja = e;
            const double jd = m * smp.r2 / (delta * delta * delta);
            haa += ja * ja;
            had += ja * jd;
            hdd += jd * jd;
            ga += ja * r;
            gd += jd * r;
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            const double daa = haa * (1.0 + lambda), ddd = hdd * (1.0 + lambda);
            const double det = daa * ddd - had * had;
            if (det == 0.0 || !std::isfinite(det)) break;
            const double step_a = (-ga * ddd + gd * had) / det;
            const double step_d = (-gd * daa + ga * had) / det;
            const double a_new = a + step_a;
            const double d_new = std::clamp(delta + step_d, opt.delta_min_px, opt.delta_max_px);
            const double s_new = residual_sum(a_new, d_new);
            if (std::isfinite(s_new) && s_new <= s_cur) {
                const bool small_step =
                    std::abs(a_new - a) <= 1e-10 * (std::abs(a) + 1e-300) &&
                    std::abs(d_new - delta) <= 1e-10 * delta;
                a = a_new;
                delta = d_new;
                s_cur = s_new;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (small_step) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped || converged) {
            converged = converged || !stepped;
            break;
        }
    }
}

}  // namespace

GaussianFitResult fit_gaussian_peak(const Projection& proj, bool exclude_center,
                                    double calibration, const std::string& units,
                                    const GaussianFitOptions& opt) {
    if (calibration <= 0.0) throw ValidationError("calibration must be positive");
    const int cx = proj.center_col, cy = proj.center_row;

    std::vector<Sample> samples;
    samples.reserve(std::size_t(2 * opt.window_half + 1) * (2 * opt.window_half + 1));
    double peak = 0.0;
    for (int dy = -opt.window_half; dy <= opt.window_half; ++dy)
        for (int dx = -opt.window_half; dx <= opt.window_half; ++dx) {
            const int row = cy + dy, col = cx + dx;
            if (row < 0 || row >= proj.height || col < 0 || col >= proj.width) continue;
            if (exclude_center && dx == 0 && dy == 0) continue;
            const double y = proj.at(row, col);
            samples.push_back({double(dx) * dx + double(dy) * dy, y});
            peak = std::max(peak, y);
        }
    if (samples.size() < 8) throw ValidationError("fit window does not overlap projection");

    // Background noise: 40x40 region around the peak, fit window masked out.
    double nsum = 0.0, nsum2 = 0.0;
    std::size_t ncount = 0;
    for (int dy = -opt.noise_half; dy < opt.noise_half; ++dy)
        for (int dx = -opt.noise_half; dx < opt.noise_half; ++dx) {
            if (std::abs(dx) <= opt.window_half && std::abs(dy) <= opt.window_half) continue;
            const int row = cy + dy, col = cx + dx;
            if (row < 0 || row >= proj.height || col < 0 || col >= proj.width) continue;
            const double v = proj.at(row, col);
            nsum += v;
            nsum2 += v * v;
            ++ncount;
        }
    double sigma = 0.0;
    if (ncount > 1) {
        const double mean = nsum / double(ncount);
        sigma = std::sqrt(std::max(0.0, nsum2 / double(ncount) - mean * mean));
    }

    GaussianFitResult fit;
    fit.units = units;
    fit.sigma_noise = sigma;

    double a = peak > 0.0 ? peak : 1e-300;
    double delta = 1.0;
    levenberg_fit(samples, a, delta, opt, peak, fit.converged);

    fit.amplitude = a;
    fit.delta_px = delta;
    fit.delta = delta * calibration;
    fit.delta_uncertainty =
        a > 0.0 ? sigma * std::sqrt(std::exp(1.0)) * fit.delta / a : 0.0;
    // Peak-absent test at the nearest sampled bin: with the centre excluded
    // the raw amplitude is an extrapolation and can grow without bound on
    // noise-only data while every sampled model value stays at zero.
    const double a_sampled =
        exclude_center ? a * std::exp(-1.0 / (2.0 * delta * delta)) : a;
    fit.reliable = fit.converged && a_sampled > 3.0 * sigma && a_sampled > 0.0;
    fit.pixel_limited = delta < 0.5;

    double ss_res = 0.0, ss_tot = 0.0, ymean = 0.0;
    for (const auto& s : samples) ymean += s.y;
    ymean /= double(samples.size());
    const double inv = 1.0 / (2.0 * delta * delta);
    for (const auto& s : samples) {
        const double r = a * std::exp(-s.r2 * inv) - s.y;
        ss_res += r * r;
        ss_tot += (s.y - ymean) * (s.y - ymean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

Projection render_fit(const Projection& like, const GaussianFitResult& fit) {
    Projection out = like;
    const double inv = 1.0 / (2.0 * fit.delta_px * fit.delta_px);
    for (int row = 0; row < out.height; ++row)
        for (int col = 0; col < out.width; ++col) {
            const double dx = col - out.center_col, dy = row - out.center_row;
            out.at(row, col) = fit.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
        }
    return out;
}

}  // namespace spadcorr
