#include "spadcorr/jpd.hpp"

#include <cmath>
#include <cstring>

namespace spadcorr {

namespace {

void require_frames(const AccumStats& stats) {
    if (stats.n_frames == 0)
        throw ValidationError("JPD estimator undefined for an empty frame set");
}

double estimator(std::uint64_t pair_count, std::uint64_t si, std::uint64_t sj,
                 std::uint64_t n) {
    const double nd = double(n);
    return double(pair_count) / nd - double(si) * double(sj) / (nd * nd);
}

struct IntegerProjection {
    std::vector<std::uint64_t> genuine2;     // 2 * sum over unordered pairs
    std::vector<std::uint64_t> accidental;   // ordered sum of S_i * S_j
};

Projection finalize(const AccumStats& stats, ProjectionKind kind,
                    const IntegerProjection& direct, const IntegerProjection& fast) {
    const double n = double(stats.n_frames);
    Projection proj;
    proj.kind = kind;
    proj.width = stats.sum_grid_w();
    proj.height = stats.sum_grid_h();
    proj.n_frames_used = stats.n_frames;
    proj.values.resize(std::size_t(proj.width) * proj.height);

    double max_abs = 0.0;
    for (std::size_t s = 0; s < proj.values.size(); ++s) {
        const double d = double(direct.genuine2[s]) / n -
                         double(direct.accidental[s]) / (n * n);
        proj.values[s] = d;
        max_abs = std::max(max_abs, std::abs(d));
    }
    for (std::size_t s = 0; s < proj.values.size(); ++s) {
        const double f = double(fast.genuine2[s]) / n -
                         double(fast.accidental[s]) / (n * n);
        const double gross = double(direct.genuine2[s]) / n +
                             double(direct.accidental[s]) / (n * n);
        if (std::abs(f - proj.values[s]) > 1e-9 * (gross + 1e-12 * max_abs + 1e-300))
            throw std::logic_error("projection fast path disagrees with direct path");
    }
    return proj;
}

}  // namespace

double jpd_element(const AccumStats& stats, int i, int j) {
    require_frames(stats);
    const std::uint64_t c = (i == j) ? stats.marginal[std::size_t(i)] : stats.pair_count(i, j);
    return estimator(c, stats.marginal[std::size_t(i)], stats.marginal[std::size_t(j)],
                     stats.n_frames);
}

double jpd_element_corrected(const AccumStats& stats, int i, int j) {
    require_frames(stats);
    const double n = double(stats.n_frames);
    const double mi = double(stats.marginal[std::size_t(i)]) / n;
    const double mj = double(stats.marginal[std::size_t(j)]) / n;
    if (mi >= 1.0 || mj >= 1.0)
        throw ValidationError("saturated pixel: corrected estimator undefined");
    const double gamma = jpd_element(stats, i, j);
    return std::log(1.0 + gamma / ((1.0 - mi) * (1.0 - mj)));
}

JpdView::JpdView(const AccumStats& stats) : stats_(&stats) { require_frames(stats); }

Projection sum_projection(const AccumStats& stats) {
    require_frames(stats);
    const int w = stats.geometry.width, h = stats.geometry.height;
    const int n_px = w * h, gw = stats.sum_grid_w();
    const std::size_t bins = std::size_t(gw) * stats.sum_grid_h();

    IntegerProjection direct{std::vector<std::uint64_t>(bins, 0),
                             std::vector<std::uint64_t>(bins, 0)};
    // Direct route: everything from the pair-count matrix.
    for (int i = 0; i < n_px; ++i) {
        const std::uint32_t* row = stats.pair_counts.data() + std::size_t(i) * n_px;
        const int xi = i % w, yi = i / w;
        for (int j = i + 1; j < n_px; ++j) {
            const std::size_t s = std::size_t(yi + j / w) * gw + (xi + j % w);
            direct.genuine2[s] += 2ull * row[j];
            direct.accidental[s] +=
                2ull * stats.marginal[std::size_t(i)] * stats.marginal[std::size_t(j)];
        }
    }

    // Fast route: per-frame pairwise histogram plus the marginal
    // auto-convolution, which factorizes the accidental double sum.
    IntegerProjection fast{std::vector<std::uint64_t>(bins, 0),
                           std::vector<std::uint64_t>(bins, 0)};
    for (std::size_t s = 0; s < bins; ++s) fast.genuine2[s] = 2ull * stats.sum_hist[s];
    for (int i = 0; i < n_px; ++i) {
        const std::uint64_t si = stats.marginal[std::size_t(i)];
        if (!si) continue;
        const int xi = i % w, yi = i / w;
        for (int j = 0; j < n_px; ++j) {
            const std::size_t s = std::size_t(yi + j / w) * gw + (xi + j % w);
            fast.accidental[s] += si * stats.marginal[std::size_t(j)];
        }
        fast.accidental[std::size_t(2 * yi) * gw + 2 * xi] -= si * si;
    }

    Projection proj = finalize(stats, ProjectionKind::Sum, direct, fast);
    proj.center_col = w;  // bin of zero physical sum-coordinate
    proj.center_row = h;
    return proj;
}

Projection minus_projection(const AccumStats& stats) {
    require_frames(stats);
    const int w = stats.geometry.width, h = stats.geometry.height;
    const int n_px = w * h, gw = stats.sum_grid_w();
    const std::size_t bins = std::size_t(gw) * stats.sum_grid_h();
    const int cx = w - 1, cy = h - 1;

    IntegerProjection direct{std::vector<std::uint64_t>(bins, 0),
                             std::vector<std::uint64_t>(bins, 0)};
    for (int i = 0; i < n_px; ++i) {
        const std::uint32_t* row = stats.pair_counts.data() + std::size_t(i) * n_px;
        const int xi = i % w, yi = i / w;
        for (int j = i + 1; j < n_px; ++j) {
            const int dx = xi - j % w, dy = yi - j / w;
            const std::uint64_t acc =
                std::uint64_t(stats.marginal[std::size_t(i)]) * stats.marginal[std::size_t(j)];
            // ordered pairs populate both +d and -d
            direct.genuine2[std::size_t(cy + dy) * gw + (cx + dx)] += row[j];
            direct.genuine2[std::size_t(cy - dy) * gw + (cx - dx)] += row[j];
            direct.accidental[std::size_t(cy + dy) * gw + (cx + dx)] += acc;
            direct.accidental[std::size_t(cy - dy) * gw + (cx - dx)] += acc;
        }
    }

    IntegerProjection fast{std::vector<std::uint64_t>(bins, 0),
                           std::vector<std::uint64_t>(bins, 0)};
    for (int dy = -(h - 1); dy <= h - 1; ++dy)
        for (int dx = -(w - 1); dx <= w - 1; ++dx) {
            const std::size_t d = std::size_t(cy + dy) * gw + (cx + dx);
            const std::size_t dr = std::size_t(cy - dy) * gw + (cx - dx);
            fast.genuine2[d] = stats.minus_hist[d] + stats.minus_hist[dr];
        }
    for (int i = 0; i < n_px; ++i) {
        const std::uint64_t si = stats.marginal[std::size_t(i)];
        if (!si) continue;
        const int xi = i % w, yi = i / w;
        for (int j = 0; j < n_px; ++j) {
            const std::size_t d =
                std::size_t(cy + yi - j / w) * gw + (cx + xi - j % w);
            fast.accidental[d] += si * stats.marginal[std::size_t(j)];
        }
        fast.accidental[std::size_t(cy) * gw + cx] -= si * si;
    }

    Projection proj = finalize(stats, ProjectionKind::Minus, direct, fast);
    proj.center_col = cx;
    proj.center_row = cy;
    // Same-pixel coincidences are unobservable on a binary array.
    proj.at(cy, cx) = 0.0;
    return proj;
}

Projection conditional_projection(const AccumStats& stats, int anchor_row, int anchor_col) {
    require_frames(stats);
    const int w = stats.geometry.width, h = stats.geometry.height;
    if (anchor_row < 0 || anchor_row >= h || anchor_col < 0 || anchor_col >= w)
        throw ValidationError("conditional anchor outside the sensor");
    const int anchor = anchor_row * w + anchor_col;

    Projection proj;
    proj.kind = ProjectionKind::Conditional;
    proj.width = w;
    proj.height = h;
    proj.center_col = anchor_col;
    proj.center_row = anchor_row;
    proj.n_frames_used = stats.n_frames;
    proj.values.resize(std::size_t(w) * h);
    for (int j = 0; j < w * h; ++j) proj.values[std::size_t(j)] = jpd_element(stats, anchor, j);

    // Peak SNR against the background farther than 5 pixels from the peak.
    int peak = 0;
    for (int j = 1; j < w * h; ++j)
        if (proj.values[std::size_t(j)] > proj.values[std::size_t(peak)]) peak = j;
    const int py = peak / w, px = peak % w;
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (int j = 0; j < w * h; ++j) {
        if (std::max(std::abs(j / w - py), std::abs(j % w - px)) <= 5) continue;
        const double v = proj.values[std::size_t(j)];
        sum += v;
        sum2 += v * v;
        ++count;
    }
    if (count > 1) {
        const double mean = sum / double(count);
        const double var = std::max(0.0, sum2 / double(count) - mean * mean);
        proj.snr = var > 0.0 ? proj.values[std::size_t(peak)] / std::sqrt(var) : 0.0;
    }
    return proj;
}

std::vector<double> oracle_jpd(const FrameSet& frames) {
    frames.validate();
    const int n_px = frames.geometry.n_pixels();
    if (n_px > 32 * 32) throw ValidationError("oracle limited to 32x32 pixels");
    if (frames.n_frames > 10000) throw ValidationError("oracle limited to 1e4 frames");
    if (frames.n_frames == 0) throw ValidationError("oracle needs at least one frame");

    std::vector<std::uint64_t> s(std::size_t(n_px), 0);
    std::vector<std::uint64_t> c(std::size_t(n_px) * n_px, 0);
    std::vector<std::uint8_t> bits(std::size_t(n_px), 0);
    for (std::uint64_t l = 0; l < frames.n_frames; ++l) {
        for (int p = 0; p < n_px; ++p) bits[std::size_t(p)] = frames.pixel(l, p) ? 1 : 0;
        for (int i = 0; i < n_px; ++i) {
            if (!bits[std::size_t(i)]) continue;
            ++s[std::size_t(i)];
            for (int j = 0; j < n_px; ++j)
                c[std::size_t(i) * n_px + j] += bits[std::size_t(j)];
        }
    }
    std::vector<double> gamma(std::size_t(n_px) * n_px);
    for (int i = 0; i < n_px; ++i)
        for (int j = 0; j < n_px; ++j)
            gamma[std::size_t(i) * n_px + j] = estimator(
                c[std::size_t(i) * n_px + j], s[std::size_t(i)], s[std::size_t(j)],
                frames.n_frames);
    return gamma;
}

std::vector<double> intensity_image(const AccumStats& stats) {
    require_frames(stats);
    std::vector<double> img(stats.marginal.size());
    for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = double(stats.marginal[i]) / double(stats.n_frames);
    return img;
}

}  // namespace spadcorr
