#pragma once

#include <zlib.h>

#include <cstdint>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/raster.hpp"

namespace eda {

namespace png_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    out += char(v >> 24);
    out += char((v >> 16) & 0xff);
    out += char((v >> 8) & 0xff);
    out += char(v & 0xff);
}

inline void chunk(std::string& out, const char type[5], const std::string& payload) {
    put_u32(out, std::uint32_t(payload.size()));
    std::string body = std::string(type, 4) + payload;
    out += body;
    std::uint32_t crc = std::uint32_t(
        crc32(0, reinterpret_cast<const Bytef*>(body.data()), uInt(body.size())));
    put_u32(out, crc);
}

}  // namespace png_detail

// 8-bit grayscale PNG of a pixel buffer whose row 0 is the bottom row.
inline std::string png_encode_gray(const std::vector<std::uint8_t>& pixels, int width,
                                   int height) {
    if (int64_t(pixels.size()) != int64_t(width) * height)
        throw std::invalid_argument("pixel buffer does not match the dimensions");
    std::string raw;
    raw.reserve(size_t(height) * (size_t(width) + 1));
    for (int y = height - 1; y >= 0; --y) {
        raw += '\0';  // filter: none
        raw.append(reinterpret_cast<const char*>(pixels.data()) + size_t(y) * width,
                   size_t(width));
    }
    uLongf bound = compressBound(uLong(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()),
                  9) != Z_OK)
        throw std::runtime_error("deflate failed");
    compressed.resize(bound);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    png_detail::put_u32(ihdr, std::uint32_t(width));
    png_detail::put_u32(ihdr, std::uint32_t(height));
    ihdr += char(8);  // bit depth
    ihdr += char(0);  // grayscale
    ihdr += char(0);  // compression
    ihdr += char(0);  // filter
    ihdr += char(0);  // no interlace
    png_detail::chunk(out, "IHDR", ihdr);
    png_detail::chunk(out, "IDAT", compressed);
    png_detail::chunk(out, "IEND", "");
    return out;
}

inline std::string png_of_map(const SpatialMap& map) {
    std::vector<std::uint8_t> pixels(map.bits.size());
    for (size_t i = 0; i < map.bits.size(); ++i) pixels[i] = map.bits[i] ? 255 : 0;
    return png_encode_gray(pixels, map.grid.resolution_x, map.grid.resolution_y);
}

inline std::string png_of_map(const ScalarMap& map) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (size_t i = 0; i < map.values.size(); ++i) {
        if (!map.occupied.empty() && !map.occupied[i]) continue;
        double v = map.values[i];
        if (first) {
            lo = hi = v;
            first = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    std::vector<std::uint8_t> pixels(map.values.size(), 0);
    double span = hi - lo;
    for (size_t i = 0; i < map.values.size(); ++i) {
        if (!map.occupied.empty() && !map.occupied[i]) continue;
        double t = span > 0 ? (map.values[i] - lo) / span : 1.0;
        pixels[i] = std::uint8_t(std::lround(t * 255.0));
    }
    return png_encode_gray(pixels, map.grid.resolution_x, map.grid.resolution_y);
}

}  // namespace eda
