#include <catch2/catch_amalgamated.hpp>

#include "emrc/preprocess.hpp"
#include "emrc/rng.hpp"

using namespace emrc;

TEST_CASE("normalize subtracts the minimum then divides by the mean") {
    Image img(1, 3);
    img.data = {2, 4, 6};
    const auto [out, stats] = normalize(img);
    CHECK(out.data[0] == 0.0);
    CHECK(out.data[1] == 1.0);
    CHECK(out.data[2] == 2.0);
    CHECK(stats.min == 2.0);
    CHECK(stats.mean == 2.0);
}

TEST_CASE("an already-normalized image is a fixed point") {
    Image img(1, 3);
    img.data = {0, 1, 2};
    const auto [out, stats] = normalize(img);
    CHECK(out.data == img.data);
    CHECK(stats.min == 0.0);
    CHECK(stats.mean == 1.0);
}

TEST_CASE("constant images are rejected unless substitution is requested") {
    const Image img(2, 2, 5.0);
    CHECK_THROWS_AS(normalize(img), DegenerateInputError);
    const auto [out, stats] = normalize(img, true);
    for (double v : out.data) CHECK(v == 0.0);
    CHECK(stats.min == 5.0);
    CHECK(stats.mean == 1.0);
    const Image back = denormalize(out, stats);
    for (double v : back.data) CHECK(v == 5.0);
}

TEST_CASE("denormalize inverts normalize") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Image img(6, 7);
        for (double& v : img.data) v = rng.uniform(-50.0, 150.0);
        const auto [norm, stats] = normalize(img);
        const Image back = denormalize(norm, stats);
        double range = 200.0;
        for (size_t i = 0; i < img.data.size(); ++i)
            REQUIRE(std::abs(back.data[i] - img.data[i]) < 1e-5 * range);
    }
}

TEST_CASE("normalize is invariant to positive affine rescaling of the input") {
    // Integer-valued inputs with a power-of-two scale keep the arithmetic exact.
    Image img(1, 4);
    img.data = {1, 3, 5, 9};
    Image scaled(1, 4);
    for (int i = 0; i < 4; ++i) scaled.data[i] = 2.0 * img.data[i] + 1.0;
    const auto [a, sa] = normalize(img);
    const auto [b, sb] = normalize(scaled);
    CHECK(a.data == b.data);
    CHECK(sb.min == 2.0 * sa.min + 1.0);
    CHECK(sb.mean == 2.0 * sa.mean);
}

TEST_CASE("affine invariance holds to rounding for random inputs") {
    Rng rng(9);
    Image img(5, 5);
    for (double& v : img.data) v = rng.uniform();
    Image scaled(5, 5);
    for (size_t i = 0; i < img.data.size(); ++i) scaled.data[i] = 3.7 * img.data[i] - 2.2;
    const auto a = normalize(img).first;
    const auto b = normalize(scaled).first;
    for (size_t i = 0; i < a.data.size(); ++i)
        REQUIRE(std::abs(a.data[i] - b.data[i]) < 1e-12);
}

TEST_CASE("normalized output has min 0 and mean 1") {
    Rng rng(17);
    Image img(8, 8);
    for (double& v : img.data) v = rng.uniform(10.0, 20.0);
    const auto out = normalize(img).first;
    double mn = out.data[0], sum = 0.0;
    for (double v : out.data) {
        mn = std::min(mn, v);
        sum += v;
    }
    CHECK(mn == 0.0);
    CHECK(std::abs(sum / out.data.size() - 1.0) < 1e-12);
}
