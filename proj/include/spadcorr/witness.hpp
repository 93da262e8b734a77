#pragma once

#include <span>
#include <vector>

#include "spadcorr/accum.hpp"

namespace spadcorr {

// Square pixel grid defining the discrete position / momentum modes.
// spacing is the pixel gap between adjacent grid sites; mode labels run
// row-major over the grid.
struct ModeGrid {
    SensorGeometry geometry;
    int side = 14;
    int spacing = 1;
    int origin_row = 0;
    int origin_col = 0;

    [[nodiscard]] int d() const { return side * side; }
    [[nodiscard]] int stride() const { return spacing + 1; }
    [[nodiscard]] int span() const { return (side - 1) * stride() + 1; }

    [[nodiscard]] int pixel_of(int mode) const {
        const int gy = mode / side, gx = mode % side;
        return (origin_row + gy * stride()) * geometry.width + (origin_col + gx * stride());
    }
    // Point reflection through the grid centre, as a mode label.
    [[nodiscard]] int reflected_mode(int mode) const {
        const int gy = mode / side, gx = mode % side;
        return (side - 1 - gy) * side + (side - 1 - gx);
    }
    // Horizontal sensor neighbour used to infer same-pixel rates
    // (right neighbour; left at the sensor edge, no wrapping).
    [[nodiscard]] int neighbor_pixel(int pixel) const {
        const int col = pixel % geometry.width;
        return col + 1 < geometry.width ? pixel + 1 : pixel - 1;
    }

    void validate() const;
};

// Grid with the paper's placement: geometric centre at pixel
// (height/2, width/2), which is also where the simulator puts the optical axis.
ModeGrid select_grid_centered(const SensorGeometry& geometry, int side, int spacing);
ModeGrid select_grid(const SensorGeometry& geometry, int side, int spacing, int origin_row,
                     int origin_col);

// Integer statistics restricted to the pixels a witness evaluation needs
// (grid sites and their inference neighbours). Merging is component-wise
// addition, so contiguous frame blocks can be jackknifed.
struct GridStats {
    std::uint64_t n_frames = 0;
    std::vector<int> pixels;         // slot -> sensor pixel
    std::vector<std::uint64_t> s;    // per-slot marginal counts
    std::vector<std::uint64_t> c;    // slot x slot pair counts
    [[nodiscard]] int slot_of(int pixel) const;
    void merge(const GridStats& other);
};

GridStats extract_grid_stats(const AccumStats& stats, const ModeGrid& grid);

enum class MubBasis { Position, Momentum };

// d x d coincidence counts. Momentum modes are relabelled by point reflection
// through the grid centre so that ideal anti-correlations appear diagonal
// (the conjugate-basis convention). Same-pixel entries are inferred from the
// horizontal-neighbour rate; negative estimator values clamp to zero.
struct CoincidenceMatrix {
    MubBasis basis = MubBasis::Position;
    int d = 0;
    std::vector<double> counts;  // row-major d x d

    [[nodiscard]] double at(int m, int n) const { return counts[std::size_t(m) * d + n]; }
    [[nodiscard]] double total() const;
    // <mn|rho|mn> = N_mn / sum_kl N_kl
    [[nodiscard]] std::vector<double> normalized() const;
};

CoincidenceMatrix coincidence_matrix(const GridStats& stats, const ModeGrid& grid,
                                     MubBasis basis);
CoincidenceMatrix coincidence_matrix(const AccumStats& stats, const ModeGrid& grid,
                                     MubBasis basis);

// F1 = (1/d) sum_m <mm|rho|mm> (convention fixed so that the ideal maximally
// correlated data gives F1 + F2_lower = 1).
double compute_F1(const CoincidenceMatrix& pos);

// Lower bound on the coherence term: sum_p <pp|rho|pp> - 1/d - cross term with
// prefactor gamma = 1/d on quadruples with (m - m' - n + n') mod d == 0.
// Enumerates O(d^3) admissible quadruples (n' is determined modulo d).
double compute_F2_lower(const CoincidenceMatrix& pos, const CoincidenceMatrix& mom);

struct WitnessReport {
    int d = 0;
    double f1 = 0.0;
    double f2_lower = 0.0;
    double f_tilde = 0.0;      // f1 + f2_lower
    double uncertainty = 0.0;  // jackknife std error over frame blocks
    std::vector<double> bounds;  // B_r = r/d for r = 1..d
    int d_ent = 1;
    CoincidenceMatrix position;
    CoincidenceMatrix momentum;
    double witness_seconds = 0.0;
    std::uint64_t n_frames = 0;
};

// d_ent = 1 + max r >= 0 with r/d < f_tilde - uncertainty (floor 1).
WitnessReport certify(double f1, double f2_lower, double uncertainty, int d);

// Full chain: merge blocks, evaluate both bases, jackknife the block
// partition for the uncertainty, certify.
WitnessReport witness_pipeline(std::span<const GridStats> nf_blocks,
                               std::span<const GridStats> ff_blocks, const ModeGrid& grid);

}  // namespace spadcorr
