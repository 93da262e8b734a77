#pragma once

#include <cstdint>

#include "spadcorr/errors.hpp"

namespace spadcorr {

// Binary SPAD array geometry. Pixel indices are row-major; the optical axis
// maps to the centre of pixel (height/2, width/2).
struct SensorGeometry {
    std::uint16_t width = 64;
    std::uint16_t height = 32;
    double pixel_pitch_um = 150.0;
    double exposure_ns = 10.0;

    [[nodiscard]] int n_pixels() const { return int(width) * int(height); }
    [[nodiscard]] int pixel_index(int row, int col) const { return row * int(width) + col; }
    [[nodiscard]] int col_of(int pixel) const { return pixel % int(width); }
    [[nodiscard]] int row_of(int pixel) const { return pixel / int(width); }

    void validate() const {
        if (width < 2 || height < 2)
            throw ValidationError("sensor must be at least 2x2 pixels");
        if (pixel_pitch_um <= 0.0)
            throw ValidationError("pixel pitch must be positive");
        if (exposure_ns <= 0.0)
            throw ValidationError("exposure must be positive");
    }

    bool operator==(const SensorGeometry&) const = default;
};

}  // namespace spadcorr
