#include "spadcorr/frame_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spadcorr {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {0x53, 0x50, 0x46, 0x31};  // "SPF1"
constexpr std::size_t kHeaderBytes = 16;

void put_u16le(std::uint8_t* p, std::uint16_t v) {
    p[0] = std::uint8_t(v & 0xff);
    p[1] = std::uint8_t(v >> 8);
}

void put_u64le(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = std::uint8_t((v >> (8 * i)) & 0xff);
}

std::uint16_t get_u16le(const std::uint8_t* p) {
    return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8));
}

std::uint64_t get_u64le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

}  // namespace

void write_frames(const std::filesystem::path& path, const FrameSet& frames) {
    frames.validate();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());

    std::array<std::uint8_t, kHeaderBytes> header{};
    std::memcpy(header.data(), kMagic.data(), 4);
    put_u16le(header.data() + 4, frames.geometry.height);
    put_u16le(header.data() + 6, frames.geometry.width);
    put_u64le(header.data() + 8, frames.n_frames);
    out.write(reinterpret_cast<const char*>(header.data()), kHeaderBytes);
    if (!frames.payload.empty())
        out.write(reinterpret_cast<const char*>(frames.payload.data()),
                  std::streamsize(frames.payload.size()));
    if (!out) throw IoError("write failed: " + path.string());
    out.close();

    std::ofstream meta(path.string() + ".meta", std::ios::trunc);
    if (!meta) throw IoError("cannot write sidecar: " + path.string() + ".meta");
    meta.precision(17);
    meta << "pixel_pitch_um=" << frames.geometry.pixel_pitch_um << "\n"
         << "exposure_ns=" << frames.geometry.exposure_ns << "\n"
         << "source_tag=" << frames.source_tag << "\n";
    if (!meta) throw IoError("sidecar write failed: " + path.string() + ".meta");
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("malformed key=value line in " + path.string() + ": " + line);
        std::string key = line.substr(0, eq);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string val = line.substr(eq + 1);
        std::size_t start = val.find_first_not_of(" \t");
        kv[key] = (start == std::string::npos) ? std::string() : val.substr(start);
    }
    return kv;
}

FrameStreamReader::FrameStreamReader(const std::filesystem::path& path) : path_(path) {
    file_ = std::fopen(path.string().c_str(), "rb");
    if (!file_) throw IoError("cannot open: " + path.string());

    std::array<std::uint8_t, kHeaderBytes> header{};
    if (std::fread(header.data(), 1, kHeaderBytes, file_) != kHeaderBytes) {
        std::fclose(file_);
        file_ = nullptr;
        throw IoError("truncated header in " + path.string());
    }
    if (std::memcmp(header.data(), kMagic.data(), 4) != 0) {
        std::fclose(file_);
        file_ = nullptr;
        throw IoError("bad magic in " + path.string() + " (expected SPF1)");
    }
    geometry_.height = get_u16le(header.data() + 4);
    geometry_.width = get_u16le(header.data() + 6);
    n_frames_ = get_u64le(header.data() + 8);
    geometry_.validate();

    std::error_code ec;
    auto meta_path = path.string() + ".meta";
    if (std::filesystem::exists(meta_path, ec)) {
        auto kv = read_key_value_file(meta_path);
        if (auto it = kv.find("pixel_pitch_um"); it != kv.end())
            geometry_.pixel_pitch_um = std::stod(it->second);
        if (auto it = kv.find("exposure_ns"); it != kv.end())
            geometry_.exposure_ns = std::stod(it->second);
        if (auto it = kv.find("source_tag"); it != kv.end()) source_tag_ = it->second;
    }

    const std::uint64_t expected = kHeaderBytes + n_frames_ * frame_bytes(geometry_);
    const std::uint64_t actual = std::filesystem::file_size(path);
    if (actual != expected) {
        std::fclose(file_);
        file_ = nullptr;
        std::ostringstream msg;
        msg << "payload size mismatch in " << path.string() << ": expected " << expected
            << " bytes, found " << actual;
        throw IoError(msg.str());
    }
}

FrameStreamReader::~FrameStreamReader() {
    if (file_) std::fclose(file_);
}

FrameStreamReader::FrameStreamReader(FrameStreamReader&& other) noexcept
    : file_(other.file_),
      path_(std::move(other.path_)),
      geometry_(other.geometry_),
      n_frames_(other.n_frames_),
      cursor_(other.cursor_),
      source_tag_(std::move(other.source_tag_)) {
    other.file_ = nullptr;
}

FrameStreamReader& FrameStreamReader::operator=(FrameStreamReader&& other) noexcept {
    if (this != &other) {
        if (file_) std::fclose(file_);
        file_ = other.file_;
        other.file_ = nullptr;
        path_ = std::move(other.path_);
        geometry_ = other.geometry_;
        n_frames_ = other.n_frames_;
        cursor_ = other.cursor_;
        source_tag_ = std::move(other.source_tag_);
    }
    return *this;
}

std::optional<FrameChunk> FrameStreamReader::next(std::size_t max_frames) {
    if (max_frames == 0) throw ValidationError("chunk size must be positive");
    if (cursor_ >= n_frames_) return std::nullopt;
    const std::size_t n = std::size_t(std::min<std::uint64_t>(max_frames, n_frames_ - cursor_));
    FrameChunk chunk;
    chunk.geometry = geometry_;
    chunk.first_frame = cursor_;
    chunk.n_frames = n;
    chunk.payload.resize(n * frame_bytes(geometry_));
    if (std::fread(chunk.payload.data(), 1, chunk.payload.size(), file_) != chunk.payload.size())
        throw IoError("short read in " + path_.string());
    cursor_ += n;
    return chunk;
}

void FrameStreamReader::rewind() {
    if (std::fseek(file_, long(kHeaderBytes), SEEK_SET) != 0)
        throw IoError("seek failed in " + path_.string());
    cursor_ = 0;
}

FrameSet read_frames(const std::filesystem::path& path) {
    FrameStreamReader reader(path);
    FrameSet fs;
    fs.geometry = reader.geometry();
    fs.source_tag = reader.source_tag();
    fs.resize_frames(reader.n_frames());
    std::size_t off = 0;
    while (auto chunk = reader.next(1 << 16)) {
        std::memcpy(fs.payload.data() + off, chunk->payload.data(), chunk->payload.size());
        off += chunk->payload.size();
    }
    return fs;
}

}  // namespace spadcorr
