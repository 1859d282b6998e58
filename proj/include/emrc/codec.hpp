#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "emrc/errors.hpp"
#include "emrc/models.hpp"
#include "emrc/preprocess.hpp"
#include "emrc/tensor.hpp"

namespace emrc {

/// One encoded tile plus the statistics needed for faithful decoding.
struct LatentBlock {
    Tensor3 latent; // latent_size x latent_size x latent_depth
    NormStats stats;
    uint32_t tile_row = 0;
    uint32_t tile_col = 0;
};

struct LatentContainer {
    Modality modality = Modality::TEM_STEM;
    int latent_depth = 16;
    int crop_size = 160;
    int grid_rows = 0;
    int grid_cols = 0;
    int orig_height = 0;
    int orig_width = 0;
    std::vector<LatentBlock> blocks; // row-major grid order
};

namespace detail {

// Round a double through f32 storage precision. The volatile store keeps the
// narrowing from being folded away at high optimization levels.
inline double quantize_f32(double v) {
    volatile float f = static_cast<float>(v);
    return static_cast<double>(f);
}

// Extract a crop_size tile at (top, left); rows/cols past the image edge are
// filled by reflecting in-bounds pixels (valid while the image is at least
// crop_size on each side).
inline Image extract_tile(const Image& img, int top, int left, int size) {
    Image out(size, size);
    for (int y = 0; y < size; ++y) {
        int iy = top + y;
        if (iy >= img.height) iy = 2 * img.height - 2 - iy;
        for (int x = 0; x < size; ++x) {
            int ix = left + x;
            if (ix >= img.width) ix = 2 * img.width - 2 - ix;
            out.at(y, x) = img.at(iy, ix);
        }
    }
    return out;
}

} // namespace detail

/// Tile the image into non-overlapping crop_size tiles (remainder tiles
/// reflect-padded), normalize each, and encode in infer mode.
inline LatentContainer compress(const AutoencoderParams& params, const Image& img) {
    const int s = params.input_size;
    if (img.height < s || img.width < s)
        throw SizeError("compress: image " + std::to_string(img.height) + "x" +
                        std::to_string(img.width) + " smaller than one " +
                        std::to_string(s) + "x" + std::to_string(s) + " tile");
    LatentContainer c;
    c.modality = params.modality;
    c.latent_depth = params.latent_depth;
    c.crop_size = s;
    c.grid_rows = (img.height + s - 1) / s;
    c.grid_cols = (img.width + s - 1) / s;
    c.orig_height = img.height;
    c.orig_width = img.width;
    for (int r = 0; r < c.grid_rows; ++r) {
        for (int col = 0; col < c.grid_cols; ++col) {
            const Image tile = detail::extract_tile(img, r * s, col * s, s);
            auto [norm, stats] = normalize(tile, /*substitute_degenerate=*/true);
            LatentBlock b;
            b.latent = autoencoder_encode(params, norm);
            // Quantize to the f32 storage type now, so an in-memory container
            // and its serialized round-trip decode identically.
            for (double& v : b.latent.data) v = detail::quantize_f32(v);
            b.stats.min = detail::quantize_f32(stats.min);
            b.stats.mean = detail::quantize_f32(stats.mean);
            b.tile_row = static_cast<uint32_t>(r);
            b.tile_col = static_cast<uint32_t>(col);
            c.blocks.push_back(std::move(b));
        }
    }
    return c;
}

/// Decode every block in infer mode, denormalize, reassemble and trim the
/// reflect padding back to the original dimensions.
inline Image decompress(const AutoencoderParams& params, const LatentContainer& c) {
    if (params.latent_depth != c.latent_depth)
        throw ValidationError("decompress: model latent depth " +
                              std::to_string(params.latent_depth) +
                              " != container depth " + std::to_string(c.latent_depth));
    if (params.input_size != c.crop_size)
        throw ValidationError("decompress: model input size != container crop size");
    Image out(c.orig_height, c.orig_width);
    const int s = c.crop_size;
    for (const auto& b : c.blocks) {
        const Image tile = denormalize(autoencoder_decode(params, b.latent), b.stats);
        const int top = static_cast<int>(b.tile_row) * s;
        const int left = static_cast<int>(b.tile_col) * s;
        const int ylim = std::min(s, c.orig_height - top);
        const int xlim = std::min(s, c.orig_width - left);
        for (int y = 0; y < ylim; ++y)
            for (int x = 0; x < xlim; ++x)
                out.at(top + y, left + x) = tile.at(y, x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Byte format: magic "EMLC" | version u16 | modality u8 | latent_depth u8 |
// crop_size u32 | grid_rows u32 | grid_cols u32 | orig_height u32 |
// orig_width u32 | per block: min f32 | mean f32 | tile_row u32 |
// tile_col u32 | latent f32 values. Everything little-endian.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v & 0xff));
    b.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::vector<uint8_t>& b, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(b, bits);
}

struct ByteReader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size())
            throw ParseError("latent container truncated at byte " + std::to_string(pos));
    }
    uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(buf[pos] | (buf[pos + 1] << 8));
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

} // namespace detail

inline std::vector<uint8_t> serialize(const LatentContainer& c) {
    using namespace detail;
    std::vector<uint8_t> b;
    const int latent_side = c.crop_size / 8;
    b.insert(b.end(), {'E', 'M', 'L', 'C'});
    put_u16(b, 1); // version
    b.push_back(static_cast<uint8_t>(c.modality));
    b.push_back(static_cast<uint8_t>(c.latent_depth));
    put_u32(b, static_cast<uint32_t>(c.crop_size));
    put_u32(b, static_cast<uint32_t>(c.grid_rows));
    put_u32(b, static_cast<uint32_t>(c.grid_cols));
    put_u32(b, static_cast<uint32_t>(c.orig_height));
    put_u32(b, static_cast<uint32_t>(c.orig_width));
    if (c.blocks.size() != static_cast<size_t>(c.grid_rows) * c.grid_cols)
        throw ValidationError("serialize: block count does not match the grid");
    for (const auto& blk : c.blocks) {
        if (blk.latent.height != latent_side || blk.latent.width != latent_side ||
            blk.latent.depth != c.latent_depth)
            throw ValidationError("serialize: latent shape inconsistent with container");
        put_f32(b, static_cast<float>(blk.stats.min));
        put_f32(b, static_cast<float>(blk.stats.mean));
        put_u32(b, blk.tile_row);
        put_u32(b, blk.tile_col);
        for (double v : blk.latent.data) put_f32(b, static_cast<float>(v));
    }
    return b;
}

inline LatentContainer deserialize(const std::vector<uint8_t>& bytes) {
    detail::ByteReader r{bytes};
    r.need(4);
    if (!(bytes[0] == 'E' && bytes[1] == 'M' && bytes[2] == 'L' && bytes[3] == 'C'))
        throw ParseError("bad magic: expected \"EMLC\"");
    r.pos = 4;
    const uint16_t version = r.u16();
    if (version != 1)
        throw ParseError("unsupported latent container version " + std::to_string(version));
    LatentContainer c;
    const uint8_t modality = r.u8();
    if (modality > 2) throw ParseError("bad modality byte " + std::to_string(modality));
    c.modality = static_cast<Modality>(modality);
    c.latent_depth = r.u8();
    c.crop_size = static_cast<int>(r.u32());
    c.grid_rows = static_cast<int>(r.u32());
    c.grid_cols = static_cast<int>(r.u32());
    c.orig_height = static_cast<int>(r.u32());
    c.orig_width = static_cast<int>(r.u32());
    if (c.latent_depth < 1 || c.crop_size < 8 || c.crop_size % 8 != 0 ||
        c.grid_rows < 1 || c.grid_cols < 1 || c.orig_height < c.crop_size ||
        c.orig_width < c.crop_size)
        throw ParseError("inconsistent latent container header");
    const int latent_side = c.crop_size / 8;
    const size_t n_blocks = static_cast<size_t>(c.grid_rows) * c.grid_cols;
    for (size_t i = 0; i < n_blocks; ++i) {
        LatentBlock blk;
        blk.stats.min = r.f32();
        blk.stats.mean = r.f32();
        blk.tile_row = r.u32();
        blk.tile_col = r.u32();
        if (blk.tile_row >= static_cast<uint32_t>(c.grid_rows) ||
            blk.tile_col >= static_cast<uint32_t>(c.grid_cols))
            throw ParseError("block tile coordinates outside the declared grid");
        blk.latent = Tensor3(latent_side, latent_side, c.latent_depth);
        for (double& v : blk.latent.data) v = r.f32();
        c.blocks.push_back(std::move(blk));
    }
    if (r.pos != bytes.size())
        throw ParseError("trailing bytes after the last block");
    return c;
}

inline void write_container(const std::string& path, const LatentContainer& c) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const auto bytes = serialize(c);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline LatentContainer read_container(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace emrc
