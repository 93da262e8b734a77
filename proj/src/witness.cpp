#include "spadcorr/witness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <thread>

#include "spadcorr/errors.hpp"

namespace spadcorr {

void ModeGrid::validate() const {
    geometry.validate();
    if (side < 2) throw ValidationError("mode grid side must be at least 2");
    if (spacing < 0) throw ValidationError("mode grid spacing must be non-negative");
    if (origin_row < 0 || origin_col < 0 ||
        origin_row + span() > geometry.height || origin_col + span() > geometry.width)
        throw ValidationError("mode grid does not fit on the sensor");
}

ModeGrid select_grid(const SensorGeometry& geometry, int side, int spacing, int origin_row,
                     int origin_col) {
    ModeGrid grid{geometry, side, spacing, origin_row, origin_col};
    grid.validate();
    return grid;
}

ModeGrid select_grid_centered(const SensorGeometry& geometry, int side, int spacing) {
    ModeGrid grid{geometry, side, spacing, 0, 0};
    grid.origin_row = geometry.height / 2 - grid.span() / 2;
    grid.origin_col = geometry.width / 2 - grid.span() / 2;
    grid.validate();
    return grid;
}

int GridStats::slot_of(int pixel) const {
    const auto it = std::find(pixels.begin(), pixels.end(), pixel);
    if (it == pixels.end()) throw ValidationError("pixel not covered by grid statistics");
    return int(it - pixels.begin());
}

void GridStats::merge(const GridStats& other) {
    if (pixels != other.pixels)
        throw ValidationError("cannot merge grid statistics for different grids");
    n_frames += other.n_frames;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += other.s[i];
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += other.c[i];
}

GridStats extract_grid_stats(const AccumStats& stats, const ModeGrid& grid) {
    grid.validate();
    if (!(stats.geometry == grid.geometry))
        throw ValidationError("grid geometry does not match accumulated statistics");

    GridStats out;
    out.n_frames = stats.n_frames;
    const int d = grid.d();
    for (int m = 0; m < d; ++m) out.pixels.push_back(grid.pixel_of(m));
    for (int m = 0; m < d; ++m) {
        const int nb = grid.neighbor_pixel(grid.pixel_of(m));
        if (std::find(out.pixels.begin(), out.pixels.end(), nb) == out.pixels.end())
            out.pixels.push_back(nb);
    }
    const std::size_t n = out.pixels.size();
    out.s.resize(n);
    out.c.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.s[i] = stats.marginal[std::size_t(out.pixels[i])];
        for (std::size_t j = 0; j < n; ++j)
            out.c[i * n + j] = stats.pair_count(out.pixels[i], out.pixels[j]);
    }
    return out;
}

double CoincidenceMatrix::total() const {
    double t = 0.0;
    for (double v : counts) t += v;
    return t;
}

std::vector<double> CoincidenceMatrix::normalized() const {
    const double t = total();
    if (!(t > 0.0)) throw ValidationError("coincidence matrix has no counts");
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / t;
    return out;
}

namespace {

// Same expression as the full-sensor estimator, over the restricted pixel set.
double grid_gamma(const GridStats& g, int slot_i, int slot_j) {
    const double n = double(g.n_frames);
    const std::size_t p = g.s.size();
    return double(g.c[std::size_t(slot_i) * p + slot_j]) / n -
           double(g.s[std::size_t(slot_i)]) * double(g.s[std::size_t(slot_j)]) / (n * n);
}

}  // namespace

CoincidenceMatrix coincidence_matrix(const GridStats& stats, const ModeGrid& grid,
                                     MubBasis basis) {
    if (stats.n_frames == 0) throw ValidationError("no frames accumulated");
    const int d = grid.d();
    CoincidenceMatrix mat;
    mat.basis = basis;
    mat.d = d;
    mat.counts.resize(std::size_t(d) * d);

    std::vector<int> slot(std::size_t(grid.geometry.width) * grid.geometry.height, -1);
    for (std::size_t i = 0; i < stats.pixels.size(); ++i)
        slot[std::size_t(stats.pixels[i])] = int(i);

    const double n = double(stats.n_frames);
    for (int m = 0; m < d; ++m) {
        const int pix_m = grid.pixel_of(m);
        for (int v = 0; v < d; ++v) {
            int pix_v = basis == MubBasis::Position ? grid.pixel_of(v)
                                                    : grid.pixel_of(grid.reflected_mode(v));
            // The estimator is blind on its diagonal; substitute the
            // horizontal-neighbour pixel, which samples the same correlation
            // peak one pixel away.
            if (pix_v == pix_m) pix_v = grid.neighbor_pixel(pix_m);
            if (slot[std::size_t(pix_m)] < 0 || slot[std::size_t(pix_v)] < 0)
                throw ValidationError("pixel not covered by grid statistics");
            const double g = grid_gamma(stats, slot[std::size_t(pix_m)], slot[std::size_t(pix_v)]);
            mat.counts[std::size_t(m) * d + v] = n * std::max(g, 0.0);
        }
    }
    return mat;
}

CoincidenceMatrix coincidence_matrix(const AccumStats& stats, const ModeGrid& grid,
                                     MubBasis basis) {
    return coincidence_matrix(extract_grid_stats(stats, grid), grid, basis);
}

double compute_F1(const CoincidenceMatrix& pos) {
    if (pos.basis != MubBasis::Position)
        throw ValidationError("F1 takes the position-basis matrix");
    const auto rho = pos.normalized();
    double f1 = 0.0;
    for (int m = 0; m < pos.d; ++m) f1 += rho[std::size_t(m) * pos.d + m];
    return f1 / double(pos.d);
}

double compute_F2_lower(const CoincidenceMatrix& pos, const CoincidenceMatrix& mom) {
    if (pos.basis != MubBasis::Position || mom.basis != MubBasis::Momentum)
        throw ValidationError("F2 takes position then momentum matrices");
    if (pos.d != mom.d) throw ValidationError("basis dimensions disagree");
    const int d = pos.d;
    const auto rho = pos.normalized();
    const auto rho_t = mom.normalized();

    double diag = 0.0;
    for (int p = 0; p < d; ++p) diag += rho_t[std::size_t(p) * d + p];

    // Cross term: quadruples (m,n),(m',n') with m+n = m'+n' (mod d); the
    // admissibility constraints are m != n, m != n', n != n', n' != m'.
    // Partitioned over m into a fixed number of chunks with partial sums
    // combined in ascending order, so the value is thread-count independent.
    const auto cross_range = [&](int m_begin, int m_end) {
        double partial = 0.0;
        for (int m = m_begin; m < m_end; ++m)
            for (int n = 0; n < d; ++n) {
                if (m == n) continue;
                const double rho_mn = rho[std::size_t(m) * d + n];
                if (rho_mn == 0.0) continue;
                for (int mp = 0; mp < d; ++mp) {
                    const int np = ((mp + n - m) % d + d) % d;
                    if (m == np || n == np || np == mp) continue;
                    partial += std::sqrt(rho_mn * rho[std::size_t(mp) * d + np]);
                }
            }
        return partial;
    };

    constexpr int kChunks = 8;
    std::array<double, kChunks> partials{};
    if (d >= 64) {
        std::vector<std::thread> workers;
        for (int ch = 0; ch < kChunks; ++ch)
            workers.emplace_back([&, ch] {
                partials[std::size_t(ch)] =
                    cross_range(ch * d / kChunks, (ch + 1) * d / kChunks);
            });
        for (auto& w : workers) w.join();
    } else {
        for (int ch = 0; ch < kChunks; ++ch)
            partials[std::size_t(ch)] = cross_range(ch * d / kChunks, (ch + 1) * d / kChunks);
    }
    double cross = 0.0;
    for (double p : partials) cross += p;
    return diag - 1.0 / double(d) - cross / double(d);
}

WitnessReport certify(double f1, double f2_lower, double uncertainty, int d) {
    if (d < 2) throw ValidationError("dimension must be at least 2");
    WitnessReport rep;
    rep.d = d;
    rep.f1 = f1;
    rep.f2_lower = f2_lower;
    rep.f_tilde = f1 + f2_lower;
    rep.uncertainty = uncertainty;
    rep.bounds.resize(std::size_t(d));
    for (int r = 1; r <= d; ++r) rep.bounds[std::size_t(r) - 1] = double(r) / double(d);
    const double conservative = rep.f_tilde - uncertainty;
    int r = 0;
    while (r + 1 < d && double(r + 1) / double(d) < conservative) ++r;
    rep.d_ent = std::max(1, r + 1);
    return rep;
}

WitnessReport witness_pipeline(std::span<const GridStats> nf_blocks,
                               std::span<const GridStats> ff_blocks, const ModeGrid& grid) {
    if (nf_blocks.empty() || ff_blocks.empty())
        throw ValidationError("witness pipeline needs at least one block per basis");
    const auto t0 = std::chrono::steady_clock::now();

    GridStats nf_total = nf_blocks[0];
    for (std::size_t b = 1; b < nf_blocks.size(); ++b) nf_total.merge(nf_blocks[b]);
    GridStats ff_total = ff_blocks[0];
    for (std::size_t b = 1; b < ff_blocks.size(); ++b) ff_total.merge(ff_blocks[b]);

    const auto f_value = [&](const GridStats& nf, const GridStats& ff) {
        const auto pos = coincidence_matrix(nf, grid, MubBasis::Position);
        const auto mom = coincidence_matrix(ff, grid, MubBasis::Momentum);
        return compute_F1(pos) + compute_F2_lower(pos, mom);
    };

    const auto without = [](const GridStats& total, const GridStats& block) {
        GridStats out = total;
        out.n_frames -= block.n_frames;
        for (std::size_t i = 0; i < out.s.size(); ++i) out.s[i] -= block.s[i];
        for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] -= block.c[i];
        return out;
    };

    double uncertainty = 0.0;
    const std::size_t nb = std::min(nf_blocks.size(), ff_blocks.size());
    if (nb >= 2) {
        std::vector<double> loo(nb);
        double mean = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            loo[b] = f_value(without(nf_total, nf_blocks[b]), without(ff_total, ff_blocks[b]));
            mean += loo[b];
        }
        mean /= double(nb);
        double ss = 0.0;
        for (double v : loo) ss += (v - mean) * (v - mean);
        uncertainty = std::sqrt(ss * double(nb - 1) / double(nb));
    }

    const auto pos = coincidence_matrix(nf_total, grid, MubBasis::Position);
    const auto mom = coincidence_matrix(ff_total, grid, MubBasis::Momentum);
    WitnessReport rep = certify(compute_F1(pos), compute_F2_lower(pos, mom), uncertainty,
                                grid.d());
    rep.position = pos;
    rep.momentum = mom;
    rep.n_frames = nf_total.n_frames;
    rep.witness_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace spadcorr
