#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spadcorr/frame_source.hpp"
#include "spadcorr/frames.hpp"

namespace spadcorr {

// Exact integer sufficient statistics for the joint probability distribution.
// pair_counts keeps the upper triangle (i <= j) of C_ij = sum_l I_l(i) I_l(j);
// the diagonal equals the marginal by construction. sum_hist / minus_hist bin
// the same-frame pixel pairs (i < j) by coordinate sum and difference and feed
// the fast projection path.
struct AccumStats {
    SensorGeometry geometry;
    std::uint64_t n_frames = 0;
    std::vector<std::uint32_t> marginal;     // P entries
    std::vector<std::uint32_t> pair_counts;  // P*P entries, i <= j maintained
    std::vector<std::uint64_t> sum_hist;     // (2W-1)*(2H-1)
    std::vector<std::uint64_t> minus_hist;   // (2W-1)*(2H-1), canonical i < j

    AccumStats() = default;
    explicit AccumStats(const SensorGeometry& g);

    [[nodiscard]] int sum_grid_w() const { return 2 * geometry.width - 1; }
    [[nodiscard]] int sum_grid_h() const { return 2 * geometry.height - 1; }

    [[nodiscard]] std::uint32_t pair_count(int i, int j) const {
        if (i > j) std::swap(i, j);
        return pair_counts[std::size_t(i) * geometry.width * geometry.height + j];
    }

    // Processes one bit-packed frame.
    void add_frame(const std::uint8_t* packed);

    // Component-wise addition; associative and commutative.
    void merge(const AccumStats& other);
    void clear_counts();
};

struct AccumOptions {
    int n_threads = 0;          // 0 -> hardware concurrency
    int n_blocks = 1;           // contiguous blocks reported to block_observer
    std::size_t chunk_frames = 4096;
    // Called once per finished block with that block's own statistics.
    std::function<void(int block, const AccumStats&)> block_observer;
    // Ascending frame counts at which checkpoint_observer sees the running total.
    std::vector<std::uint64_t> checkpoints;
    std::function<void(const AccumStats&)> checkpoint_observer;
};

// Streams all frames of the source into one AccumStats. Partitions the stream
// across workers with per-worker integer statistics merged by addition, so the
// result is identical for any thread count or chunking.
AccumStats accumulate(FrameSource& source, const AccumOptions& opt = {});

}  // namespace spadcorr
