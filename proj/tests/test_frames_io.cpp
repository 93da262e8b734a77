#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <type_traits>

#include "doctest.h"
#include "spadcorr/frame_io.hpp"
#include "spadcorr/frame_source.hpp"

using namespace spadcorr;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

FrameSet random_frames(const SensorGeometry& geom, std::uint64_t n, std::uint64_t seed,
                       double p = 0.3) {
    FrameSet fs;
    fs.geometry = geom;
    fs.resize_frames(n);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(p);
    for (std::uint64_t l = 0; l < n; ++l)
        for (int px = 0; px < geom.n_pixels(); ++px)
            if (bit(rng)) fs.set_pixel(l, px);
    return fs;
}

}  // namespace

TEST_CASE("geometry invariants") {
    SensorGeometry g;
    CHECK(g.width == 64);
    CHECK(g.height == 32);
    CHECK_NOTHROW(g.validate());
    g.width = 1;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    g.width = 64;
    g.pixel_pitch_um = 0.0;
    CHECK_THROWS_AS(g.validate(), ValidationError);
}

TEST_CASE("bit packing is LSB-first row-major") {
    SensorGeometry g{2, 2, 150.0, 10.0};
    FrameSet fs;
    fs.geometry = g;
    fs.resize_frames(1);
    fs.set_pixel(0, 0);
    fs.set_pixel(0, 3);
    REQUIRE(fs.payload.size() == 1);
    CHECK(fs.payload[0] == 0x09);
}

TEST_CASE("header layout and empty file") {
    const auto path = temp_path("spf1_empty.spf1");
    SensorGeometry g{64, 32, 150.0, 10.0};
    FrameSet fs;
    fs.geometry = g;
    fs.source_tag = "empty";
    write_frames(path, fs);

    CHECK(std::filesystem::file_size(path) == 16);
    std::ifstream in(path, std::ios::binary);
    unsigned char header[16];
    in.read(reinterpret_cast<char*>(header), 16);
    CHECK(header[0] == 0x53);
    CHECK(header[1] == 0x50);
    CHECK(header[2] == 0x46);
    CHECK(header[3] == 0x31);
    CHECK(header[4] == 32);  // height u16 LE
    CHECK(header[5] == 0);
    CHECK(header[6] == 64);  // width u16 LE
    CHECK(header[7] == 0);
    for (int i = 8; i < 16; ++i) CHECK(header[i] == 0);

    const FrameSet back = read_frames(path);
    CHECK(back.n_frames == 0);
    CHECK(back.geometry == g);
}

TEST_CASE("file size follows the packing rule") {
    // One 32x64 frame occupies 256 payload bytes, so 1e7 frames give
    // 16 + 1e7 * 256 = 2,560,000,016 bytes. Verified at 1000 frames.
    SensorGeometry g{64, 32, 150.0, 10.0};
    CHECK(frame_bytes(g) == 256);
    CHECK(16 + 10000000ull * frame_bytes(g) == 2560000016ull);

    const auto path = temp_path("spf1_size.spf1");
    write_frames(path, random_frames(g, 1000, 7));
    CHECK(std::filesystem::file_size(path) == 16 + 1000 * 256);
}

TEST_CASE("round trip preserves every bit") {
    SensorGeometry g{16, 8, 150.0, 10.0};
    const FrameSet fs = random_frames(g, 1000, 99);
    const auto path = temp_path("spf1_roundtrip.spf1");
    write_frames(path, fs);
    const FrameSet back = read_frames(path);
    CHECK(back.n_frames == fs.n_frames);
    CHECK(back.payload == fs.payload);
    CHECK(back.source_tag == fs.source_tag);
}

TEST_CASE("meta sidecar records pitch, exposure and tag") {
    SensorGeometry g{4, 4, 123.5, 42.0};
    FrameSet fs = random_frames(g, 3, 5);
    fs.source_tag = "tagged run";
    const auto path = temp_path("spf1_meta.spf1");
    write_frames(path, fs);
    const auto meta = read_key_value_file(path.string() + ".meta");
    CHECK(meta.at("pixel_pitch_um") == "123.5");
    CHECK(meta.at("exposure_ns") == "42");
    CHECK(meta.at("source_tag") == "tagged run");
}

TEST_CASE("stream chunking partitions exactly") {
    SensorGeometry g{8, 4, 150.0, 10.0};
    const FrameSet fs = random_frames(g, 10, 11);
    const auto path = temp_path("spf1_chunks.spf1");
    write_frames(path, fs);

    FrameStreamReader reader(path);
    std::vector<std::size_t> sizes;
    while (auto chunk = reader.next(4)) sizes.push_back(chunk->n_frames);
    CHECK(sizes == std::vector<std::size_t>{4, 4, 2});

    reader.rewind();
    auto whole = reader.next(100);
    REQUIRE(whole);
    CHECK(whole->n_frames == 10);
    CHECK_FALSE(reader.next(1));

    // Concatenated chunks equal the whole-file payload for any chunk size.
    for (std::size_t chunk_size : {1, 3, 7, 10}) {
        reader.rewind();
        std::vector<std::uint8_t> collected;
        while (auto chunk = reader.next(chunk_size))
            collected.insert(collected.end(), chunk->payload.begin(), chunk->payload.end());
        CHECK(collected == fs.payload);
    }
}

TEST_CASE("format errors are reported") {
    const auto bogus = temp_path("spf1_bogus.spf1");
    {
        std::ofstream out(bogus, std::ios::binary);
        out << "not a frame file at all";
    }
    CHECK_THROWS_AS(FrameStreamReader{bogus}, IoError);

    // Truncated payload: header promises more frames than the file holds.
    SensorGeometry g{8, 4, 150.0, 10.0};
    const auto path = temp_path("spf1_trunc.spf1");
    write_frames(path, random_frames(g, 10, 1));
    std::filesystem::resize_file(path, 16 + 3 * frame_bytes(g) + 1);
    try {
        FrameStreamReader reader(path);
        FAIL("expected an error for the truncated payload");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("56") != std::string::npos);   // expected total bytes
        CHECK(msg.find("29") != std::string::npos);   // actual total bytes
    }
}

TEST_CASE("sensor dimensions are bounded by the 16-bit header fields") {
    static_assert(std::is_same_v<decltype(SensorGeometry::width), std::uint16_t>);
    static_assert(std::is_same_v<decltype(SensorGeometry::height), std::uint16_t>);
}

TEST_CASE("limit source caps the stream") {
    SensorGeometry g{8, 4, 150.0, 10.0};
    const FrameSet fs = random_frames(g, 20, 2);
    MemoryFrameSource inner(fs);
    LimitFrameSource limited(inner, 5);
    CHECK(limited.n_frames() == 5);
    std::size_t total = 0;
    while (auto chunk = limited.next(3)) total += chunk->n_frames;
    CHECK(total == 5);
}
