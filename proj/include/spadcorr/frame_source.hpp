#pragma once

#include <algorithm>
#include <cstring>
#include <memory>
#include <optional>

#include "spadcorr/frame_io.hpp"
#include "spadcorr/frames.hpp"

namespace spadcorr {

// Sequential producer of frame chunks. Single consumer; rewindable so the
// same data can feed several analysis passes.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    [[nodiscard]] virtual const SensorGeometry& geometry() const = 0;
    [[nodiscard]] virtual std::uint64_t n_frames() const = 0;
    virtual std::optional<FrameChunk> next(std::size_t max_frames) = 0;
    virtual void rewind() = 0;
};

class FileFrameSource final : public FrameSource {
public:
    explicit FileFrameSource(const std::filesystem::path& path) : reader_(path) {}
    [[nodiscard]] const SensorGeometry& geometry() const override { return reader_.geometry(); }
    [[nodiscard]] std::uint64_t n_frames() const override { return reader_.n_frames(); }
    std::optional<FrameChunk> next(std::size_t max_frames) override {
        return reader_.next(max_frames);
    }
    void rewind() override { reader_.rewind(); }

private:
    FrameStreamReader reader_;
};

class MemoryFrameSource final : public FrameSource {
public:
    explicit MemoryFrameSource(const FrameSet& frames) : frames_(&frames) {}
    [[nodiscard]] const SensorGeometry& geometry() const override { return frames_->geometry; }
    [[nodiscard]] std::uint64_t n_frames() const override { return frames_->n_frames; }
    std::optional<FrameChunk> next(std::size_t max_frames) override {
        if (cursor_ >= frames_->n_frames) return std::nullopt;
        const std::size_t n =
            std::size_t(std::min<std::uint64_t>(max_frames, frames_->n_frames - cursor_));
        FrameChunk chunk;
        chunk.geometry = frames_->geometry;
        chunk.first_frame = cursor_;
        chunk.n_frames = n;
        const std::size_t fb = frames_->bytes_per_frame();
        chunk.payload.resize(n * fb);
        std::memcpy(chunk.payload.data(), frames_->payload.data() + cursor_ * fb, n * fb);
        cursor_ += n;
        return chunk;
    }
    void rewind() override { cursor_ = 0; }

private:
    const FrameSet* frames_;
    std::uint64_t cursor_ = 0;
};

// Caps an underlying source at the first n frames.
class LimitFrameSource final : public FrameSource {
public:
    LimitFrameSource(FrameSource& inner, std::uint64_t limit)
        : inner_(&inner), limit_(std::min(limit, inner.n_frames())) {}
    [[nodiscard]] const SensorGeometry& geometry() const override { return inner_->geometry(); }
    [[nodiscard]] std::uint64_t n_frames() const override { return limit_; }
    std::optional<FrameChunk> next(std::size_t max_frames) override {
        if (served_ >= limit_) return std::nullopt;
        auto chunk = inner_->next(
            std::size_t(std::min<std::uint64_t>(max_frames, limit_ - served_)));
        if (!chunk) return std::nullopt;
        served_ += chunk->n_frames;
        return chunk;
    }
    void rewind() override {
        inner_->rewind();
        served_ = 0;
    }

private:
    FrameSource* inner_;
    std::uint64_t limit_;
    std::uint64_t served_ = 0;
};

}  // namespace spadcorr
