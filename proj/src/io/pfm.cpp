#include "sheetlight/io/pfm.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sheetlight/core/error.hpp"

namespace sheetlight::io {

namespace {

std::string next_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
    }
    if (!in) return tok;
    tok.push_back(c);
    while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
    // exactly one whitespace byte separates the header from the raster
    return tok;
}

float byteswap_float(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
    std::memcpy(&v, &u, 4);
    return v;
}

}  // namespace

Grid<float> read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open");
    const std::string magic = next_token(in);
    if (magic == "PF") throw IoError(path, "colour PFM not supported; expected single-channel Pf");
    if (magic != "Pf") throw IoError(path, "not a PFM file");
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        throw IoError(path, "malformed PFM header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) throw IoError(path, "malformed PFM header");

    const bool file_little = scale < 0.0;
    const bool swap = file_little != (std::endian::native == std::endian::little);
    std::vector<float> raster(std::size_t(width) * std::size_t(height));
    in.read(reinterpret_cast<char*>(raster.data()), std::streamsize(raster.size() * sizeof(float)));
    if (in.gcount() != std::streamsize(raster.size() * sizeof(float))) throw IoError(path, "truncated PFM raster");

    Grid<float> out(width, height);
    for (int y = 0; y < height; ++y) {
        const int src_row = height - 1 - y;
        for (int x = 0; x < width; ++x) {
            float v = raster[std::size_t(src_row) * std::size_t(width) + std::size_t(x)];
            out(x, y) = swap ? byteswap_float(v) : v;
        }
    }
    return out;
}

void write_pfm(const std::string& path, const Grid<float>& values) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError(path, "cannot open for writing");
        out << "Pf\n" << values.width() << ' ' << values.height() << "\n-1.0\n";
        for (int y = values.height() - 1; y >= 0; --y) {
            for (float v : values.row(y)) {
                if constexpr (std::endian::native != std::endian::little) v = byteswap_float(v);
                out.write(reinterpret_cast<const char*>(&v), sizeof(float));
            }
        }
        if (!out) throw IoError(path, "write failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace sheetlight::io
