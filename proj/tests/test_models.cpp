#include <catch2/catch_amalgamated.hpp>

#include "emrc/models.hpp"
#include "emrc/published.hpp"
#include "emrc/rng.hpp"

using namespace emrc;

namespace {

// Direct nested-loop reference for a valid (crop-border) convolution.
Image naive_valid_conv(const Image& img, const std::vector<double>& w, int k) {
    Image out(img.height - k + 1, img.width - k + 1);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx)
                    acc += w[ky * k + kx] * img.at(y + ky, x + kx);
            out.at(y, x) = acc;
        }
    return out;
}

Image random_image(int h, int w, Rng& rng) {
    Image img(h, w);
    for (double& v : img.data) v = rng.uniform(-1.0, 2.0);
    return img;
}

void mark_bn_initialized(AutoencoderParams& p) {
    for (auto& L : p.encoder_layers) L.bn_initialized = true;
    for (auto& L : p.decoder_layers) L.bn_initialized = true;
}

} // namespace

TEST_CASE("a constant image through a kernel yields the kernel weight sum") {
    const auto k = kernel_from_published(get_kernel(Modality::TEM, 3));
    const Image img(8, 8, 1.0);
    const Image out = kernel_apply(k, img, Border::Crop);
    CHECK(out.height == 6);
    CHECK(out.width == 6);
    for (double v : out.data) CHECK(std::abs(v - 1.014) < 1e-12);
}

TEST_CASE("a delta kernel with reflect borders is the identity") {
    KernelModel k;
    k.w = 3;
    k.weights = {0, 0, 0, 0, 1, 0, 0, 0, 0};
    Rng rng(2);
    const Image img = random_image(9, 11, rng);
    const Image out = kernel_apply(k, img, Border::Reflect);
    CHECK(out.height == img.height);
    CHECK(out.width == img.width);
    CHECK(out.data == img.data);
}

TEST_CASE("kernel_apply matches the nested-loop reference for all shipped kernels") {
    Rng rng(13);
    const Image img = random_image(32, 32, rng);
    for (Modality m : {Modality::TEM, Modality::STEM, Modality::TEM_STEM}) {
        for (int w : {3, 5, 7, 11}) {
            const auto k = kernel_from_published(get_kernel(m, w));
            const Image fast = kernel_apply(k, img, Border::Crop);
            const Image ref = naive_valid_conv(img, k.weights, w);
            REQUIRE(fast.height == ref.height);
            for (size_t i = 0; i < fast.data.size(); ++i)
                REQUIRE(std::abs(fast.data[i] - ref.data[i]) < 1e-6);
        }
    }
}

TEST_CASE("kernel_apply is linear in its input") {
    Rng rng(4);
    const auto k = kernel_from_published(get_kernel(Modality::STEM, 5));
    const Image a = random_image(16, 16, rng);
    const Image b = random_image(16, 16, rng);
    Image sum(16, 16);
    for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] = 2.0 * a.data[i] + b.data[i];
    const Image oa = kernel_apply(k, a, Border::Crop);
    const Image ob = kernel_apply(k, b, Border::Crop);
    const Image os = kernel_apply(k, sum, Border::Crop);
    for (size_t i = 0; i < os.data.size(); ++i)
        REQUIRE(std::abs(os.data[i] - (2.0 * oa.data[i] + ob.data[i])) < 1e-9);
}

TEST_CASE("kernel_apply rejects images smaller than the kernel") {
    const auto k = kernel_from_published(get_kernel(Modality::TEM, 7));
    CHECK_THROWS_AS(kernel_apply(k, Image(5, 20), Border::Crop), SizeError);
}

TEST_CASE("an all-zero MLP emits zero through saturated hidden units") {
    Rng rng(1);
    MlpModel m = make_mlp(3, 1, rng);
    for (auto& L : m.hidden) {
        std::fill(L.gain.begin(), L.gain.end(), 0.0);
        std::fill(L.bias.begin(), L.bias.end(), 0.0);
        std::fill(L.dense.begin(), L.dense.end(), 0.0);
    }
    std::fill(m.output_weights.begin(), m.output_weights.end(), 0.0);
    // z = 0 everywhere so each hidden unit sits at sigmoid(0) = 0.5, and the
    // zero output weights collapse that to 0.
    const std::vector<double> patch(9, 3.0);
    CHECK(mlp_forward(m, patch) == 0.0);
}

TEST_CASE("unit gains and weights give w^2 times sigmoid responses") {
    Rng rng(1);
    MlpModel m = make_mlp(3, 1, rng);
    auto& L = m.hidden[0];
    std::fill(L.gain.begin(), L.gain.end(), 1.0);
    std::fill(L.bias.begin(), L.bias.end(), 0.0);
    std::fill(L.dense.begin(), L.dense.end(), 0.0);
    std::fill(m.output_weights.begin(), m.output_weights.end(), 1.0);
    const std::vector<double> patch(9, 0.0);
    // Dense layer zero -> all nine hidden units at 0.5 -> output 4.5.
    CHECK(std::abs(mlp_forward(m, patch) - 4.5) < 1e-12);
}

TEST_CASE("mlp_forward matches a scalar reference implementation") {
    Rng rng(21);
    const int w = 5, n = w * w;
    MlpModel m = make_mlp(w, 2, rng);
    std::vector<double> patch(n);
    for (double& v : patch) v = rng.uniform(-1.0, 1.0);

    std::vector<double> h = patch;
    for (const auto& L : m.hidden) {
        std::vector<double> u(n), z(n, 0.0);
        for (int i = 0; i < n; ++i) u[i] = L.gain[i] * h[i] + L.bias[i];
        for (int o = 0; o < n; ++o)
            for (int i = 0; i < n; ++i) z[o] += L.dense[o * n + i] * u[i];
        for (int i = 0; i < n; ++i) h[i] = 1.0 / (1.0 + std::exp(-z[i]));
    }
    double ref = 0.0;
    for (int i = 0; i < n; ++i) ref += m.output_weights[i] * h[i];

    CHECK(std::abs(mlp_forward(m, patch) - ref) < 1e-7);
}

TEST_CASE("mlp_denoise on an exactly window-sized image is one forward pass") {
    Rng rng(6);
    MlpModel m = make_mlp(3, 1, rng);
    const Image img = random_image(3, 3, rng);
    const Image out = mlp_denoise(m, img, Border::Crop);
    REQUIRE(out.height == 1);
    REQUIRE(out.width == 1);
    CHECK(out.at(0, 0) == mlp_forward(m, img.data));
}

TEST_CASE("autoencoder shapes: bottleneck is one eighth of the input side") {
    Rng rng(5);
    for (int depth : {1, 4, 16}) {
        AutoencoderParams p = make_autoencoder(depth, rng, 32, {4, 6, 8});
        Image in = random_image(32, 32, rng);
        Tensor3 latent = autoencoder_encode(p, in, RunMode::Train);
        CHECK(latent.height == 4);
        CHECK(latent.width == 4);
        CHECK(latent.depth == depth);
        Image out = autoencoder_decode(p, latent, RunMode::Train);
        CHECK(out.height == 32);
        CHECK(out.width == 32);
    }
}

TEST_CASE("full-size autoencoder maps 160x160 to a 20x20 bottleneck") {
    Rng rng(5);
    AutoencoderParams p = make_autoencoder(16, rng, 160, {8, 8, 8});
    Image in = random_image(160, 160, rng);
    Tensor3 latent = autoencoder_encode(p, in, RunMode::Train);
    CHECK(latent.height == 20);
    CHECK(latent.width == 20);
    CHECK(latent.depth == 16);
}

TEST_CASE("compression ratio is the pixel count over latent size") {
    // input_size^2 pixels vs (input_size/8)^2 * depth latent values: ratio 64/depth.
    for (int depth : {1, 4, 16, 64}) {
        const long pixels = 160L * 160L;
        const long latent = 20L * 20L * depth;
        CHECK(pixels * depth == latent * 64L);
    }
}

TEST_CASE("autoencoder inference is deterministic") {
    Rng rng(30);
    AutoencoderParams p = make_autoencoder(4, rng, 16, {3, 4, 5});
    mark_bn_initialized(p);
    const Image in = random_image(16, 16, rng);
    const Tensor3 a = autoencoder_encode(p, in);
    const Tensor3 b = autoencoder_encode(p, in);
    CHECK(a.data == b.data);
    const Image da = autoencoder_decode(p, a);
    const Image db = autoencoder_decode(p, b);
    CHECK(da.data == db.data);
}

TEST_CASE("inference before any batch statistics update is a state error") {
    Rng rng(31);
    const AutoencoderParams p = make_autoencoder(4, rng, 16, {3, 4, 5});
    const Image in = random_image(16, 16, rng);
    CHECK_THROWS_AS(autoencoder_encode(p, in), StateError);
}

TEST_CASE("encode rejects inputs of the wrong size") {
    Rng rng(32);
    AutoencoderParams p = make_autoencoder(4, rng, 16, {3, 4, 5});
    CHECK_THROWS_AS(autoencoder_encode(p, Image(24, 24), RunMode::Train), SizeError);
    CHECK_THROWS_AS(autoencoder_decode(p, Tensor3(3, 3, 4), RunMode::Train), SizeError);
}

TEST_CASE("make_autoencoder validates its configuration") {
    Rng rng(33);
    CHECK_THROWS_AS(make_autoencoder(4, rng, 20), ValidationError); // not a multiple of 8
    CHECK_THROWS_AS(make_autoencoder(0, rng, 16), ValidationError);
}

TEST_CASE("freshly initialized biases are zero and batch-norm scales one") {
    Rng rng(34);
    const AutoencoderParams p = make_autoencoder(2, rng, 16, {3, 4, 5});
    for (const auto& L : p.encoder_layers) {
        for (double b : L.bias) REQUIRE(b == 0.0);
        for (double s : L.bn_scale) REQUIRE(s == 1.0);
        for (double o : L.bn_offset) REQUIRE(o == 0.0);
    }
}

TEST_CASE("upsample2 is nearest-neighbour and its backward sums the 2x2 cells") {
    Batch b(1, 2, 2, 1);
    b.data = {1, 2, 3, 4};
    const Batch up = nn::upsample2(b);
    REQUIRE(up.h == 4);
    REQUIRE(up.w == 4);
    CHECK(up.data[0] == 1);
    CHECK(up.data[1] == 1);
    CHECK(up.data[4] == 1);
    CHECK(up.data[5] == 1);
    CHECK(up.data[15] == 4);
    Batch d(1, 4, 4, 1, 1.0);
    const Batch back = nn::upsample2_backward(d, 2, 2);
    for (double v : back.data) CHECK(v == 4.0);
}
