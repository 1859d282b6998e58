#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "emrc/errors.hpp"
#include "emrc/tensor.hpp"

namespace emrc {

namespace detail {

inline int pgm_next_token(std::istream& f, std::string& tok) {
    tok.clear();
    int c = f.get();
    while (c != EOF) {
        if (c == '#') { // comment to end of line
            while (c != EOF && c != '\n') c = f.get();
        } else if (std::isspace(c)) {
            c = f.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = f.get();
    }
    return tok.empty() ? EOF : 0;
}

} // namespace detail

/// Read a binary PGM (P5). 8-bit for maxval <= 255, otherwise 16-bit
/// big-endian samples per the PGM convention. Values are returned as-is.
inline Image read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string tok;
    if (detail::pgm_next_token(f, tok) == EOF || tok != "P5")
        throw ParseError("not a binary PGM (expected magic P5): " + path);
    long vals[3];
    for (long& v : vals) {
        if (detail::pgm_next_token(f, tok) == EOF)
            throw ParseError("truncated PGM header: " + path);
        try {
            v = std::stol(tok);
        } catch (const std::exception&) {
            throw ParseError("bad PGM header token '" + tok + "': " + path);
        }
    }
    const long width = vals[0], height = vals[1], maxval = vals[2];
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw ParseError("bad PGM dimensions/maxval: " + path);
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<uint8_t> raw(static_cast<size_t>(width) * height * bytes);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(f.gcount()) != raw.size())
        throw ParseError("truncated PGM pixel data: " + path);
    Image img(static_cast<int>(height), static_cast<int>(width));
    if (bytes == 1) {
        for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = raw[i];
    } else {
        for (size_t i = 0; i < img.data.size(); ++i)
            img.data[i] = static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
    return img;
}

/// Write a 16-bit PGM, min-max rescaled to 0..65535. The scaling is recorded
/// in a sidecar text file at path + ".meta" so the original range can be
/// recovered.
inline void write_pgm16(const std::string& path, const Image& img) {
    double mn = img.data[0], mx = img.data[0];
    for (double v : img.data) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double scale = mx > mn ? 65535.0 / (mx - mn) : 0.0;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
    std::vector<uint8_t> raw(img.data.size() * 2);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const long q = std::lround((img.data[i] - mn) * scale);
        const uint16_t s = static_cast<uint16_t>(std::min(65535L, std::max(0L, q)));
        raw[2 * i] = static_cast<uint8_t>(s >> 8);
        raw[2 * i + 1] = static_cast<uint8_t>(s & 0xff);
    }
    f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!f) throw IoError("write failed: " + path);
    std::ofstream meta(path + ".meta");
    if (!meta) throw IoError("cannot open for writing: " + path + ".meta");
    meta.precision(17);
    meta << "min " << mn << "\nmax " << mx << "\n";
}

/// Headerless little-endian f32 raster.
inline Image read_raw_f32(const std::string& path, int width, int height) {
    if (width < 1 || height < 1)
        throw ValidationError("read_raw_f32: --width/--height must be positive");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::vector<float> raw(static_cast<size_t>(width) * height);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (static_cast<size_t>(f.gcount()) != raw.size() * sizeof(float))
        throw ParseError("raw f32 file shorter than width*height*4 bytes: " + path);
    Image img(height, width);
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = raw[i];
    return img;
}

inline void write_raw_f32(const std::string& path, const Image& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    std::vector<float> raw(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) raw[i] = static_cast<float>(img.data[i]);
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!f) throw IoError("write failed: " + path);
}

} // namespace emrc
