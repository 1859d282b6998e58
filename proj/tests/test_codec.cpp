#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "emrc/codec.hpp"
#include "emrc/rng.hpp"

using namespace emrc;

namespace {

AutoencoderParams tiny_model(int latent_depth, uint64_t seed) {
    Rng rng(seed);
    AutoencoderParams p = make_autoencoder(latent_depth, rng, 16, {3, 4, 5});
    for (auto& L : p.encoder_layers) L.bn_initialized = true;
    for (auto& L : p.decoder_layers) L.bn_initialized = true;
    return p;
}

Image random_image(int h, int w, Rng& rng) {
    Image img(h, w);
    for (double& v : img.data) v = rng.uniform(0.0, 255.0);
    return img;
}

} // namespace

TEST_CASE("compress tiles the image into a non-overlapping grid") {
    const AutoencoderParams p = tiny_model(2, 1);
    Rng rng(2);
    const Image img = random_image(32, 32, rng);
    const LatentContainer c = compress(p, img);
    CHECK(c.grid_rows == 2);
    CHECK(c.grid_cols == 2);
    CHECK(c.blocks.size() == 4);
    CHECK(c.orig_height == 32);
    CHECK(c.orig_width == 32);
    CHECK(c.blocks[1].tile_row == 0);
    CHECK(c.blocks[1].tile_col == 1);
    for (const auto& b : c.blocks) {
        CHECK(b.latent.height == 2);
        CHECK(b.latent.width == 2);
        CHECK(b.latent.depth == 2);
    }
}

TEST_CASE("remainder tiles still cover the full image") {
    const AutoencoderParams p = tiny_model(2, 1);
    Rng rng(3);
    const Image img = random_image(20, 37, rng);
    const LatentContainer c = compress(p, img);
    CHECK(c.grid_rows == 2);
    CHECK(c.grid_cols == 3);
    const Image out = decompress(p, c);
    CHECK(out.height == 20);
    CHECK(out.width == 37);
}

TEST_CASE("decompress restores the original dimensions") {
    const AutoencoderParams p = tiny_model(4, 5);
    Rng rng(6);
    for (auto [h, w] : {std::pair{16, 16}, std::pair{16, 48}, std::pair{33, 17}}) {
        const Image img = random_image(h, w, rng);
        const Image out = decompress(p, compress(p, img));
        REQUIRE(out.height == h);
        REQUIRE(out.width == w);
        for (double v : out.data) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("serialization round-trips byte-identically") {
    const AutoencoderParams p = tiny_model(2, 7);
    Rng rng(8);
    const LatentContainer c = compress(p, random_image(32, 16, rng));
    const auto bytes = serialize(c);
    const LatentContainer back = deserialize(bytes);
    CHECK(serialize(back) == bytes);
    // And the decoded images agree bit for bit, because latents are stored as
    // f32 from the moment of compression.
    const Image a = decompress(p, c);
    const Image b = decompress(p, back);
    CHECK(a.data == b.data);
}

TEST_CASE("the payload size follows the documented layout") {
    const int depth = 2;
    const AutoencoderParams p = tiny_model(depth, 9);
    Rng rng(10);
    const LatentContainer c = compress(p, random_image(16, 32, rng));
    const auto bytes = serialize(c);
    const size_t latent_side = 16 / 8;
    const size_t per_block = 16 + 4 * latent_side * latent_side * depth;
    CHECK(bytes.size() == 28 + c.blocks.size() * per_block);
}

TEST_CASE("compression ratio against 32-bit pixels is 64 over the latent depth") {
    // Per full tile: input_size^2 pixels vs (input_size/8)^2 * depth latent
    // values at the same 4-byte width, ignoring the fixed header.
    const AutoencoderParams p = tiny_model(2, 11);
    Rng rng(12);
    const LatentContainer c = compress(p, random_image(16, 16, rng));
    const size_t latent_values = c.blocks[0].latent.data.size();
    CHECK(16 * 16 * p.latent_depth == latent_values * 64);
}

TEST_CASE("deserialize rejects malformed byte streams") {
    const AutoencoderParams p = tiny_model(2, 13);
    Rng rng(14);
    auto bytes = serialize(compress(p, random_image(16, 16, rng)));

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(deserialize(bad_magic), ParseError);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 5);
    CHECK_THROWS_AS(deserialize(truncated), ParseError);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(deserialize(trailing), ParseError);

    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(deserialize(bad_version), ParseError);

    CHECK_THROWS_AS(deserialize(std::vector<uint8_t>{'E', 'M'}), ParseError);
}

TEST_CASE("decompress rejects a mismatched model") {
    const AutoencoderParams p2 = tiny_model(2, 15);
    const AutoencoderParams p4 = tiny_model(4, 16);
    Rng rng(17);
    const LatentContainer c = compress(p2, random_image(16, 16, rng));
    CHECK_THROWS_AS(decompress(p4, c), ValidationError);
}

TEST_CASE("compress rejects images smaller than one tile") {
    const AutoencoderParams p = tiny_model(2, 18);
    CHECK_THROWS_AS(compress(p, Image(8, 40, 1.0)), SizeError);
}

TEST_CASE("container files round-trip through disk") {
    const AutoencoderParams p = tiny_model(2, 19);
    Rng rng(20);
    const LatentContainer c = compress(p, random_image(16, 16, rng));
    const std::string path = "codec_roundtrip_test.emlc";
    write_container(path, c);
    const LatentContainer back = read_container(path);
    CHECK(serialize(back) == serialize(c));
    std::remove(path.c_str());
}
