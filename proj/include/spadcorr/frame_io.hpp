#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "spadcorr/frames.hpp"

namespace spadcorr {

// SPF1 container: magic "SPF1", little-endian u16 height, u16 width,
// u64 n_frames, then bit-packed frames. Pitch/exposure/source_tag live in a
// "<path>.meta" key=value sidecar.
void write_frames(const std::filesystem::path& path, const FrameSet& frames);

FrameSet read_frames(const std::filesystem::path& path);

// Sequential chunked reader over an SPF1 file.
class FrameStreamReader {
public:
    explicit FrameStreamReader(const std::filesystem::path& path);
    ~FrameStreamReader();
    FrameStreamReader(FrameStreamReader&&) noexcept;
    FrameStreamReader& operator=(FrameStreamReader&&) noexcept;

    [[nodiscard]] const SensorGeometry& geometry() const { return geometry_; }
    [[nodiscard]] std::uint64_t n_frames() const { return n_frames_; }
    [[nodiscard]] const std::string& source_tag() const { return source_tag_; }

    // Next chunk of at most max_frames frames, or nullopt at end of stream.
    std::optional<FrameChunk> next(std::size_t max_frames);

    void rewind();

private:
    std::FILE* file_ = nullptr;
    std::filesystem::path path_;
    SensorGeometry geometry_;
    std::uint64_t n_frames_ = 0;
    std::uint64_t cursor_ = 0;
    std::string source_tag_;
};

// Sidecar helpers shared with the config parser.
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

}  // namespace spadcorr
