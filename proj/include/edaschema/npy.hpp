#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"

namespace eda {

// NPY version 1.0, little-endian float64, C order. Shape is (rows,
// cols); callers map rows to y with row 0 at the bottom.
inline std::string npy_encode_f8(std::span<const double> values, size_t rows,
                                 size_t cols) {
    if (values.size() != rows * cols)
        throw std::invalid_argument("npy payload does not match the shape");
    std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                         std::to_string(rows) + ", " + std::to_string(cols) + "), }";
    size_t unpadded = 10 + header.size() + 1;
    size_t padded = (unpadded + 63) / 64 * 64;
    header.append(padded - unpadded, ' ');
    header += '\n';

    std::string out;
    out.reserve(padded + values.size() * 8);
    out += "\x93NUMPY";
    out += '\x01';
    out += '\x00';
    std::uint16_t hlen = std::uint16_t(header.size());
    out += char(hlen & 0xff);
    out += char(hlen >> 8);
    out += header;
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int i = 0; i < 8; ++i) out += char((bits >> (8 * i)) & 0xff);
    }
    return out;
}

struct NpyArray {
    size_t rows = 0, cols = 0;
    std::vector<double> values;
};

inline NpyArray npy_decode_f8(std::span<const std::uint8_t> data) {
    if (data.size() < 11 || std::memcmp(data.data(), "\x93NUMPY", 6) != 0)
        throw ParseError("not an NPY file");
    if (data[6] != 1) throw ParseError("unsupported NPY version");
    std::uint16_t hlen = std::uint16_t(data[8]) | (std::uint16_t(data[9]) << 8);
    if (data.size() < size_t(10) + hlen) throw ParseError("truncated NPY header");
    std::string header(reinterpret_cast<const char*>(data.data()) + 10, hlen);
    if (header.find("'<f8'") == std::string::npos)
        throw ParseError("expected little-endian float64 NPY data");
    if (header.find("'fortran_order': False") == std::string::npos)
        throw ParseError("expected C-order NPY data");
    auto lp = header.find('(');
    auto rp = header.find(')', lp);
    if (lp == std::string::npos || rp == std::string::npos)
        throw ParseError("NPY header without a shape");
    std::string shape = header.substr(lp + 1, rp - lp - 1);
    NpyArray out;
    size_t comma = shape.find(',');
    out.rows = std::stoull(shape.substr(0, comma));
    std::string rest = comma == std::string::npos ? "" : shape.substr(comma + 1);
    // (n,) one-dimensional arrays read as a single row
    bool one_dim = true;
    for (char c : rest)
        if (c >= '0' && c <= '9') one_dim = false;
    if (one_dim) {
        out.cols = out.rows;
        out.rows = 1;
    } else {
        out.cols = std::stoull(rest);
    }

    size_t n = out.rows * out.cols;
    size_t offset = 10 + hlen;
    if (data.size() != offset + n * 8) throw ParseError("NPY payload size mismatch");
    out.values.resize(n);
    for (size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= std::uint64_t(data[offset + i * 8 + b]) << (8 * b);
        std::memcpy(&out.values[i], &bits, 8);
    }
    return out;
}

// Bit-packed binary map payload: bits run row-major from the bottom-left
// corner, LSB first inside each byte, no per-row padding.
inline std::string bits_encode(std::span<const std::uint8_t> bits, std::int64_t res_x,
                               std::int64_t res_y) {
    if (bits.size() != size_t(res_x) * size_t(res_y))
        throw std::invalid_argument("bit payload does not match the resolution");
    std::string out = "EDBM";
    auto put_i64 = [&](std::int64_t v) {
        for (int i = 0; i < 8; ++i) out += char((std::uint64_t(v) >> (8 * i)) & 0xff);
    };
    out += char(1);  // version
    put_i64(res_x);
    put_i64(res_y);
    std::uint8_t acc = 0;
    int nbits = 0;
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) acc |= std::uint8_t(1u << nbits);
        if (++nbits == 8) {
            out += char(acc);
            acc = 0;
            nbits = 0;
        }
    }
    if (nbits) out += char(acc);
    return out;
}

struct BitsArray {
    std::int64_t res_x = 0, res_y = 0;
    std::vector<std::uint8_t> bits;
};

inline BitsArray bits_decode(std::span<const std::uint8_t> data) {
    if (data.size() < 21 || std::memcmp(data.data(), "EDBM", 4) != 0)
        throw ParseError("not a bit-packed map file");
    if (data[4] != 1) throw ParseError("unsupported bit-map version");
    auto get_i64 = [&](size_t at) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(data[at + i]) << (8 * i);
        return std::int64_t(v);
    };
    BitsArray out;
    out.res_x = get_i64(5);
    out.res_y = get_i64(13);
    size_t n = size_t(out.res_x) * size_t(out.res_y);
    size_t payload = (n + 7) / 8;
    if (data.size() != 21 + payload) throw ParseError("bit-map payload size mismatch");
    out.bits.resize(n);
    for (size_t i = 0; i < n; ++i)
        out.bits[i] = (data[21 + i / 8] >> (i % 8)) & 1u;
    return out;
}

}  // namespace eda
