#pragma once

#include <string>
#include <vector>

#include "spadcorr/accum.hpp"

namespace spadcorr {

// Finite-N estimator of the joint probability distribution element:
// gamma(i,j) = C_ij/N - S_i*S_j/N^2. The second term removes accidental
// coincidences, leaving the genuine-pair rate.
double jpd_element(const AccumStats& stats, int i, int j);

// Optional saturation correction: ln(1 + gamma / ((1-<I_i>)(1-<I_j>))) with
// unit overall scale. Reduces to the linear estimator when occupancy is low.
double jpd_element_corrected(const AccumStats& stats, int i, int j);

// Lightweight accessor over an AccumStats.
class JpdView {
public:
    explicit JpdView(const AccumStats& stats);
    [[nodiscard]] double gamma(int i, int j) const { return jpd_element(*stats_, i, j); }
    [[nodiscard]] const AccumStats& stats() const { return *stats_; }

private:
    const AccumStats* stats_;
};

enum class ProjectionKind { Sum, Minus, Conditional };

// 2D map over sum- or minus-coordinates of the JPD, or a conditional slice.
struct Projection {
    ProjectionKind kind = ProjectionKind::Sum;
    int width = 0;
    int height = 0;
    std::vector<double> values;  // row-major
    int center_col = 0;  // bin holding the zero coordinate (anchor for slices)
    int center_row = 0;
    std::uint64_t n_frames_used = 0;
    double snr = 0.0;  // conditional slices only

    [[nodiscard]] double at(int row, int col) const {
        return values[std::size_t(row) * width + col];
    }
    [[nodiscard]] double& at(int row, int col) { return values[std::size_t(row) * width + col]; }
};

// P+(s) = sum over ordered pixel pairs i != j with coordinate sum s.
// Computed twice (directly from pair counts, and from the per-frame sum
// histogram minus the marginal auto-convolution); the paths must agree to
// 1e-9 relative and the direct result is returned.
Projection sum_projection(const AccumStats& stats);

// P-(d) over ordered pairs, central bin forced to zero.
Projection minus_projection(const AccumStats& stats);

// Slice gamma(anchor, .) over the full sensor, with peak SNR against the
// background more than 5 pixels away from the peak.
Projection conditional_projection(const AccumStats& stats, int anchor_row, int anchor_col);

// Brute-force reference: evaluates the estimator by direct double loops over
// decoded frames. Small inputs only.
std::vector<double> oracle_jpd(const FrameSet& frames);

// Marginal detection probability per pixel, S_i/N.
std::vector<double> intensity_image(const AccumStats& stats);

}  // namespace spadcorr
