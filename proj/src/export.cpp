#include "spadcorr/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spadcorr/errors.hpp"
#include "spadcorr/frame_io.hpp"

namespace spadcorr {

namespace {

// Shortest decimal that round-trips the double, locale-independent.
std::string fmt(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("number formatting failed");
    return std::string(buf, end);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_values_csv(const std::filesystem::path& path, int width, int height,
                      const std::vector<double>& values) {
    if (values.size() != std::size_t(width) * height)
        throw ValidationError("value grid size mismatch");
    auto out = open_out(path, std::ios::out | std::ios::trunc);
    out << "row,col,value\n";
    for (int row = 0; row < height; ++row)
        for (int col = 0; col < width; ++col)
            out << row << ',' << col << ','
                << fmt(values[std::size_t(row) * width + col]) << '\n';
    finish(out, path);
}

void write_projection_csv(const std::filesystem::path& path, const Projection& proj) {
    write_values_csv(path, proj.width, proj.height, proj.values);
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<double>& values) {
    if (values.size() != std::size_t(width) * height)
        throw ValidationError("value grid size mismatch");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = values.empty() ? 0.0 : *lo_it;
    const double hi = values.empty() ? 0.0 : *hi_it;
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;

    auto out = open_out(path, std::ios::out | std::ios::trunc | std::ios::binary);
    out << "P5\n" << width << ' ' << height << "\n65535\n";
    for (double v : values) {
        const auto q = std::uint16_t(std::lround((v - lo) * scale));
        const unsigned char bytes[2] = {(unsigned char)(q >> 8), (unsigned char)(q & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
    finish(out, path);

    auto meta = open_out(path.string() + ".meta", std::ios::out | std::ios::trunc);
    meta << "min=" << fmt(lo) << "\nmax=" << fmt(hi) << "\nmaxval=65535\n";
    finish(meta, path);
}

void write_coincidence_csv(const std::filesystem::path& path, const CoincidenceMatrix& mat,
                           const ModeGrid& grid) {
    auto out = open_out(path, std::ios::out | std::ios::trunc);
    out << "# basis=" << (mat.basis == MubBasis::Position ? "position" : "momentum")
        << " d=" << mat.d << " origin_row=" << grid.origin_row
        << " origin_col=" << grid.origin_col << " side=" << grid.side
        << " spacing=" << grid.spacing << '\n';
    out << "row,col,value\n";
    for (int m = 0; m < mat.d; ++m)
        for (int n = 0; n < mat.d; ++n)
            out << m << ',' << n << ',' << fmt(mat.at(m, n)) << '\n';
    finish(out, path);
}

CoincidenceMatrix read_coincidence_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string header;
    std::getline(in, header);
    if (header.rfind("# basis=", 0) != 0)
        throw IoError("missing coincidence matrix header: " + path.string());

    CoincidenceMatrix mat;
    std::istringstream hdr(header.substr(2));
    std::string token;
    while (hdr >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "basis") {
            if (value == "position")
                mat.basis = MubBasis::Position;
            else if (value == "momentum")
                mat.basis = MubBasis::Momentum;
            else
                throw IoError("unknown basis: " + value);
        } else if (key == "d") {
            mat.d = std::stoi(value);
        }
    }
    if (mat.d <= 0) throw IoError("coincidence matrix header lacks d: " + path.string());
    mat.counts.assign(std::size_t(mat.d) * mat.d, 0.0);

    std::string line;
    std::getline(in, line);  // column names
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int row = 0, col = 0;
        double value = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf", &row, &col, &value) != 3)
            throw IoError("bad coincidence matrix row: " + line);
        if (row < 0 || row >= mat.d || col < 0 || col >= mat.d)
            throw IoError("coincidence matrix index out of range: " + line);
        mat.counts[std::size_t(row) * mat.d + col] = value;
    }
    return mat;
}

void write_bounds_csv(const std::filesystem::path& path, const WitnessReport& report) {
    auto out = open_out(path, std::ios::out | std::ios::trunc);
    out << "r,bound\n";
    for (std::size_t i = 0; i < report.bounds.size(); ++i)
        out << (i + 1) << ',' << fmt(report.bounds[i]) << '\n';
    finish(out, path);
}

std::string format_witness_report(const WitnessReport& report) {
    std::ostringstream out;
    out << "dimension d: " << report.d << '\n'
        << "frames: " << report.n_frames << '\n'
        << "F1: " << fmt(report.f1) << '\n'
        << "F2 lower bound: " << fmt(report.f2_lower) << '\n'
        << "F tilde: " << fmt(report.f_tilde) << '\n'
        << "uncertainty (jackknife, 1 sigma): " << fmt(report.uncertainty) << '\n'
        << "certified value (F tilde - 1 sigma): "
        << fmt(report.f_tilde - report.uncertainty) << '\n'
        << "certified dimensionality: " << report.d_ent << '\n'
        << "convention: F1 carries the 1/d target-state weight; ideal data gives "
           "F1 + F2 = 1\n"
        << "momentum modes: relabelled by point reflection through the grid centre\n";
    return out.str();
}

void write_scaling_csv(const std::filesystem::path& path, const ScalingResult& scaling) {
    auto out = open_out(path, std::ios::out | std::ios::trunc);
    out << "n_frames,confidence,product,sigma_product,reliable\n";
    for (const auto& pt : scaling.points)
        out << pt.n_frames << ',' << fmt(pt.confidence) << ',' << fmt(pt.product) << ','
            << fmt(pt.sigma_product) << ',' << (pt.reliable ? 1 : 0) << '\n';
    finish(out, path);
}

std::string format_epr_report(const EprReport& report) {
    std::ostringstream out;
    out << "frames: " << report.n_frames << '\n'
        << "delta_r: " << fmt(report.delta_r) << " um (+- "
        << fmt(report.delta_r_uncertainty) << ")\n"
        << "delta_k: " << fmt(report.delta_k) << " rad/um (+- "
        << fmt(report.delta_k_uncertainty) << ")\n"
        << "product delta_r * delta_k: " << fmt(report.product) << " (+- "
        << fmt(report.sigma_product) << ")\n"
        << "separability bound: 0.5\n"
        << "confidence C: " << fmt(report.confidence) << '\n'
        << "violation: " << (report.raw_violation ? "yes" : "no") << '\n'
        << "confident violation (C > 5): " << (report.confident_violation ? "yes" : "no")
        << '\n'
        << "fits reliable: " << (report.reliable ? "yes" : "no") << '\n';
    return out.str();
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path.string());
    std::uint64_t hash = 14695981039346656037ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= std::uint8_t(buf[i]);
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

std::string manifest_line(const std::filesystem::path& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat: " + path.string());
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)fnv1a_file(path));
    std::ostringstream out;
    out << path.filename().string() << ' ' << size << ' ' << hex;
    return out.str();
}

}  // namespace spadcorr
