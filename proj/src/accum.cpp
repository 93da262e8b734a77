#include "spadcorr/accum.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <mutex>
#include <thread>

#if defined(__linux__)
#include <sys/mman.h>
#endif

namespace spadcorr {

AccumStats::AccumStats(const SensorGeometry& g) : geometry(g) {
    g.validate();
    const std::size_t p = std::size_t(g.n_pixels());
    marginal.assign(p, 0);
    pair_counts.assign(p * p, 0);
#if defined(__linux__)
    // The pair matrix is the one large randomly-accessed array; huge pages
    // take TLB walks off the accumulation hot path.
    madvise(pair_counts.data(), pair_counts.size() * sizeof(pair_counts[0]), MADV_HUGEPAGE);
#endif
    const std::size_t grid = std::size_t(sum_grid_w()) * sum_grid_h();
    sum_hist.assign(grid, 0);
    minus_hist.assign(grid, 0);
}

void AccumStats::add_frame(const std::uint8_t* packed) {
    const int n_px = geometry.n_pixels();
    const int w = geometry.width;
    const int gw = sum_grid_w();

    // Enumerate lit pixels.
    std::uint16_t lit[4096];
    int k = 0;
    const int n_words = (n_px + 63) / 64;
    for (int word = 0; word < n_words; ++word) {
        std::uint64_t bits = 0;
        const int base_byte = word * 8;
        const int avail = std::min(8, (n_px + 7) / 8 - base_byte);
        std::memcpy(&bits, packed + base_byte, std::size_t(avail));
        while (bits) {
            const int b = std::countr_zero(bits);
            bits &= bits - 1;
            const int p = word * 64 + b;
            if (p < n_px && k < 4096) lit[k++] = std::uint16_t(p);
        }
    }

    ++n_frames;

    // Flat histogram index of pixel p on the (2W-1)-wide grid; both the sum
    // bin (s_a + s_b) and the canonical minus bin (s_a - s_b + centre) are
    // linear in it, which keeps the pair loop free of multiplies.
    int flat[4096];
    for (int a = 0; a < k; ++a) {
        const int p = lit[a];
        flat[a] = (p / w) * gw + (p % w);
        ++marginal[std::size_t(p)];
    }
    const int minus_centre = (geometry.height - 1) * gw + (geometry.width - 1);

    for (int a = 0; a < k; ++a) {
        const int sa = flat[a];
        std::uint32_t* row = pair_counts.data() + std::size_t(lit[a]) * n_px;
        ++row[lit[a]];  // keeps C_ii == S_i
        for (int b = a + 1; b < k; ++b) {
            ++row[lit[b]];
            ++sum_hist[std::size_t(sa + flat[b])];
            ++minus_hist[std::size_t(sa - flat[b] + minus_centre)];
        }
    }
}

void AccumStats::merge(const AccumStats& other) {
    if (!(geometry == other.geometry))
        throw ValidationError("cannot merge statistics with different geometries");
    n_frames += other.n_frames;
    for (std::size_t i = 0; i < marginal.size(); ++i) marginal[i] += other.marginal[i];
    for (std::size_t i = 0; i < pair_counts.size(); ++i) pair_counts[i] += other.pair_counts[i];
    for (std::size_t i = 0; i < sum_hist.size(); ++i) sum_hist[i] += other.sum_hist[i];
    for (std::size_t i = 0; i < minus_hist.size(); ++i) minus_hist[i] += other.minus_hist[i];
}

void AccumStats::clear_counts() {
    n_frames = 0;
    std::fill(marginal.begin(), marginal.end(), 0u);
    std::fill(pair_counts.begin(), pair_counts.end(), 0u);
    std::fill(sum_hist.begin(), sum_hist.end(), std::uint64_t(0));
    std::fill(minus_hist.begin(), minus_hist.end(), std::uint64_t(0));
}

namespace {

// Accumulates frames [begin, end) of the source into `into`, using workers
// that pull chunks under a lock. Segment boundaries are already aligned by
// the caller, so the source cursor sits at `begin`.
void accumulate_segment(FrameSource& source, std::uint64_t segment_frames, int n_threads,
                        std::size_t chunk_frames, AccumStats& into,
                        std::vector<AccumStats>& scratch) {
    if (segment_frames == 0) return;

    std::mutex source_mutex;
    std::uint64_t remaining = segment_frames;

    auto worker = [&](AccumStats& local) {
        for (;;) {
            std::optional<FrameChunk> chunk;
            {
                std::lock_guard lock(source_mutex);
                if (remaining == 0) return;
                const std::size_t want =
                    std::size_t(std::min<std::uint64_t>(chunk_frames, remaining));
                chunk = source.next(want);
                if (!chunk) {
                    remaining = 0;
                    return;
                }
                remaining -= chunk->n_frames;
            }
            const std::size_t fb = frame_bytes(chunk->geometry);
            for (std::size_t i = 0; i < chunk->n_frames; ++i)
                local.add_frame(chunk->payload.data() + i * fb);
        }
    };

    if (n_threads <= 1) {
        worker(into);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(std::size_t(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker, std::ref(scratch[t]));
    for (auto& t : threads) t.join();
    // Fixed merge order keeps the result schedule-independent (integer sums).
    for (int t = 0; t < n_threads; ++t) {
        into.merge(scratch[t]);
        scratch[t].clear_counts();
    }
}

}  // namespace

AccumStats accumulate(FrameSource& source, const AccumOptions& opt) {
    const SensorGeometry geom = source.geometry();
    geom.validate();
    int n_threads = opt.n_threads > 0 ? opt.n_threads
                                      : int(std::max(1u, std::thread::hardware_concurrency()));
    const std::uint64_t total = source.n_frames();
    if (opt.n_blocks < 1) throw ValidationError("n_blocks must be >= 1");

    // Boundaries: block edges plus requested checkpoints, ascending.
    std::vector<std::pair<std::uint64_t, int>> boundaries;  // frame count, block index or -1
    for (int b = 1; b <= opt.n_blocks; ++b)
        boundaries.emplace_back(total * std::uint64_t(b) / std::uint64_t(opt.n_blocks), b - 1);
    for (std::uint64_t c : opt.checkpoints) {
        if (c > total) throw ValidationError("checkpoint beyond available frames");
        boundaries.emplace_back(c, -1);
    }
    std::sort(boundaries.begin(), boundaries.end());

    AccumStats result(geom);
    AccumStats block(geom);
    std::vector<AccumStats> scratch;
    if (n_threads > 1) scratch.assign(std::size_t(n_threads), AccumStats(geom));

    std::uint64_t done = 0;
    const bool track_blocks = bool(opt.block_observer) || opt.n_blocks > 1;
    for (auto [edge, block_idx] : boundaries) {
        accumulate_segment(source, edge - done, n_threads, opt.chunk_frames,
                           track_blocks ? block : result, scratch);
        done = edge;
        if (block_idx >= 0 && track_blocks) {
            if (opt.block_observer) opt.block_observer(block_idx, block);
            result.merge(block);
            block.clear_counts();
        }
        if (block_idx < 0 && opt.checkpoint_observer) {
            if (track_blocks) {
                // Expose the running total including the open block.
                AccumStats snapshot = result;
                snapshot.merge(block);
                opt.checkpoint_observer(snapshot);
            } else {
                opt.checkpoint_observer(result);
            }
        }
    }
    return result;
}

}  // namespace spadcorr
