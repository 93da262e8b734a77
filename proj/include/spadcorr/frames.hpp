#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spadcorr/geometry.hpp"

namespace spadcorr {

// Bytes per bit-packed frame: LSB-first within each byte, row-major pixel
// order, padded to a whole byte.
inline std::size_t frame_bytes(const SensorGeometry& g) {
    return (std::size_t(g.n_pixels()) + 7) / 8;
}

// A stream of binary detection frames plus sensor metadata.
struct FrameSet {
    SensorGeometry geometry;
    std::uint64_t n_frames = 0;
    std::vector<std::uint8_t> payload;  // n_frames * frame_bytes(geometry)
    std::string source_tag;

    [[nodiscard]] std::size_t bytes_per_frame() const { return frame_bytes(geometry); }

    [[nodiscard]] const std::uint8_t* frame(std::uint64_t l) const {
        return payload.data() + l * bytes_per_frame();
    }
    [[nodiscard]] std::uint8_t* frame(std::uint64_t l) {
        return payload.data() + l * bytes_per_frame();
    }

    [[nodiscard]] bool pixel(std::uint64_t l, int p) const {
        const std::uint8_t* f = frame(l);
        return (f[p >> 3] >> (p & 7)) & 1u;
    }
    void set_pixel(std::uint64_t l, int p) { frame(l)[p >> 3] |= std::uint8_t(1u << (p & 7)); }

    void resize_frames(std::uint64_t n) {
        n_frames = n;
        payload.assign(std::size_t(n) * bytes_per_frame(), 0);
    }

    void validate() const {
        geometry.validate();
        if (payload.size() != std::size_t(n_frames) * bytes_per_frame())
            throw ValidationError("payload size does not match frame count");
    }
};

// A run of decoded-but-still-packed frames handed out by a frame source.
struct FrameChunk {
    SensorGeometry geometry;
    std::uint64_t first_frame = 0;
    std::size_t n_frames = 0;
    std::vector<std::uint8_t> payload;

    [[nodiscard]] const std::uint8_t* frame(std::size_t i) const {
        return payload.data() + i * frame_bytes(geometry);
    }
};

}  // namespace spadcorr
