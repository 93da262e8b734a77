#include "spadcorr/epr.hpp"

#include <cmath>

namespace spadcorr {

EprReport epr_evaluate(const GaussianFitResult& fit_nf, const GaussianFitResult& fit_ff,
                       std::uint64_t n_frames) {
    if (fit_nf.units != "um" || fit_ff.units != "rad/um")
        throw ValidationError("epr_evaluate expects fits in um and rad/um");

    EprReport rep;
    rep.n_frames = n_frames;
    rep.delta_r = fit_nf.delta;
    rep.delta_r_uncertainty = fit_nf.delta_uncertainty;
    rep.delta_k = fit_ff.delta;
    rep.delta_k_uncertainty = fit_ff.delta_uncertainty;
    rep.product = rep.delta_r * rep.delta_k;
    const double rel_r = rep.delta_r > 0 ? rep.delta_r_uncertainty / rep.delta_r : 0.0;
    const double rel_k = rep.delta_k > 0 ? rep.delta_k_uncertainty / rep.delta_k : 0.0;
    rep.sigma_product = rep.product * std::sqrt(rel_r * rel_r + rel_k * rel_k);
    rep.confidence = rep.sigma_product > 0.0
                         ? std::abs(0.5 - rep.product) / rep.sigma_product
                         : 0.0;
    rep.reliable = fit_nf.reliable && fit_ff.reliable;
    rep.raw_violation = rep.reliable && rep.product < 0.5;
    rep.confident_violation =
        rep.raw_violation && rep.product + 5.0 * rep.sigma_product < 0.5;
    return rep;
}

GaussianFitResult fit_nf_width(const AccumStats& stats, double calibration_um_per_bin) {
    return fit_gaussian_peak(minus_projection(stats), /*exclude_center=*/true,
                             calibration_um_per_bin, "um");
}

GaussianFitResult fit_ff_width(const AccumStats& stats, double calibration_radum_per_bin) {
    return fit_gaussian_peak(sum_projection(stats), /*exclude_center=*/false,
                             calibration_radum_per_bin, "rad/um");
}

std::pair<double, double> fit_sqrt_law(const std::vector<std::pair<double, double>>& xy) {
    double num = 0.0, den = 0.0;
    for (auto [x, y] : xy) {
        num += y * std::sqrt(x);
        den += x;
    }
    const double c = den > 0.0 ? num / den : 0.0;
    double ymean = 0.0;
    for (auto [x, y] : xy) ymean += y;
    if (!xy.empty()) ymean /= double(xy.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (auto [x, y] : xy) {
        ss_res += (y - c * std::sqrt(x)) * (y - c * std::sqrt(x));
        ss_tot += (y - ymean) * (y - ymean);
    }
    return {c, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

ScalingResult confidence_scaling(FrameSource& nf_frames, FrameSource& ff_frames,
                                 const std::vector<std::uint64_t>& checkpoints,
                                 double calibration_nf, double calibration_ff,
                                 int n_threads) {
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw ValidationError("checkpoints must be strictly ascending");

    // One accumulation pass per stream; fits happen at each checkpoint.
    std::vector<GaussianFitResult> nf_fits, ff_fits;
    AccumOptions opt;
    opt.n_threads = n_threads;
    opt.checkpoints = checkpoints;

    opt.checkpoint_observer = [&](const AccumStats& stats) {
        nf_fits.push_back(fit_nf_width(stats, calibration_nf));
    };
    nf_frames.rewind();
    accumulate(nf_frames, opt);

    opt.checkpoint_observer = [&](const AccumStats& stats) {
        ff_fits.push_back(fit_ff_width(stats, calibration_ff));
    };
    ff_frames.rewind();
    accumulate(ff_frames, opt);

    ScalingResult result;
    std::vector<std::pair<double, double>> xy;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const EprReport rep = epr_evaluate(nf_fits[i], ff_fits[i], checkpoints[i]);
        ScalingPoint pt;
        pt.n_frames = checkpoints[i];
        pt.confidence = rep.confidence;
        pt.product = rep.product;
        pt.sigma_product = rep.sigma_product;
        pt.reliable = rep.reliable && rep.sigma_product > 0.0;
        result.points.push_back(pt);
        if (pt.reliable)
            xy.emplace_back(double(pt.n_frames), pt.confidence);
        else
            ++result.n_excluded;
    }
    auto [c, r2] = fit_sqrt_law(xy);
    result.coefficient = c;
    result.r_squared = r2;
    return result;
}

}  // namespace spadcorr
