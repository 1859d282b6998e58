#include <catch2/catch_amalgamated.hpp>

#include "emrc/rng.hpp"
#include "emrc/training.hpp"

using namespace emrc;

TEST_CASE("loss is the MSE below one and its square root above") {
    Image a(1, 2), b(1, 2);
    a.data = {0.5, 0.5};
    b.data = {0.0, 0.0};
    auto lv = huber_mse_loss(a, b); // mse = 0.25
    CHECK(lv.mse == 0.25);
    CHECK(lv.loss == 0.25);
    a.data = {3.0, 3.0}; // mse = 9
    lv = huber_mse_loss(a, b);
    CHECK(lv.mse == 9.0);
    CHECK(lv.loss == 3.0);
}

TEST_CASE("the two loss branches meet at one") {
    CHECK(huberize(1.0) == 1.0);
    CHECK(std::abs(huberize(1.0 - 1e-9) - huberize(1.0 + 1e-9)) < 1e-8);
    CHECK(huber_weight(0.5) == 1.0);
    CHECK(std::abs(huber_weight(4.0) - 0.25) < 1e-15);
}

TEST_CASE("huberize never exceeds the raw MSE and is monotone") {
    double prev = 0.0;
    for (double mse = 0.0; mse < 20.0; mse += 0.37) {
        const double h = huberize(mse);
        REQUIRE(h <= mse + 1e-15);
        REQUIRE(h >= prev);
        prev = h;
    }
}

TEST_CASE("learning rate decays quadratically in stairsteps") {
    const Schedule s{0.01, 60000, 5000};
    CHECK(learning_rate(s, 0) == 0.01);
    CHECK(learning_rate(s, 4999) == 0.01);             // still on the first step
    CHECK(learning_rate(s, 30000) == Catch::Approx(0.0025).epsilon(1e-12));
    const Schedule fine{0.01, 12000, 1000};
    // iter 11999 rounds down to k = 11000, so the factor is (1/12)^2.
    const double expect = (1.0 / 12.0) * (1.0 / 12.0) * 0.01;
    CHECK(std::abs(learning_rate(fine, 11999) - expect) < 1e-15);
}

TEST_CASE("per-iteration schedules change every step") {
    const Schedule s{0.01, 10, 1};
    double prev = 1.0;
    for (int i = 0; i < 10; ++i) {
        const double lr = learning_rate(s, i);
        REQUIRE(lr < prev);
        REQUIRE(lr > 0.0);
        prev = lr;
    }
}

TEST_CASE("learning_rate validates iteration and schedule") {
    const Schedule s{0.01, 100, 10};
    CHECK_THROWS_AS(learning_rate(s, -1), RangeError);
    CHECK_THROWS_AS(learning_rate(s, 100), RangeError);
    CHECK_THROWS_AS(learning_rate(Schedule{0.01, 10, 20}, 0), ValidationError);
}

TEST_CASE("xavier bound and sampling statistics") {
    CHECK(xavier_bound(3, 3) == 1.0);
    CHECK(std::abs(xavier_bound(9, 1) - std::sqrt(0.6)) < 1e-15);
    Rng rng(42);
    const auto xs = xavier_init(3, 3, 100000, rng);
    double mean = 0.0, var = 0.0;
    for (double v : xs) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
        mean += v;
    }
    mean /= xs.size();
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= xs.size();
    // Uniform on [-1, 1] has variance 1/3.
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0 / 3.0) < 0.03);
    Rng r1(7), r2(7);
    CHECK(xavier_init(5, 5, 64, r1) == xavier_init(5, 5, 64, r2));
}

TEST_CASE("a first ADAM step moves each parameter by about the learning rate") {
    std::vector<double> p = {1.0};
    const std::vector<double> g = {0.5};
    AdamState s;
    adam_step(p, g, s, 0.01);
    // mhat/ (sqrt(vhat) + eps) = g / (|g| + eps) for the first step.
    CHECK(std::abs(p[0] - (1.0 - 0.01)) < 1e-8);
    CHECK(s.t == 1);
}

TEST_CASE("a zero gradient leaves parameters untouched but advances time") {
    std::vector<double> p = {2.5};
    AdamState s;
    adam_step(p, std::vector<double>{0.0}, s, 0.1);
    CHECK(p[0] == 2.5);
    CHECK(s.t == 1);
}

TEST_CASE("three ADAM steps match a hand-rolled scalar trace") {
    std::vector<double> p = {0.3};
    AdamState s;
    const double lr = 0.05;
    const std::vector<double> grads = {1.2, -0.7, 0.4};

    double rp = 0.3, m = 0.0, v = 0.0;
    for (int t = 1; t <= 3; ++t) {
        const double g = grads[t - 1];
        adam_step(p, std::vector<double>{g}, s, lr);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.999, t));
        rp -= lr * mhat / (std::sqrt(vhat) + 1e-8);
        REQUIRE(std::abs(p[0] - rp) < 1e-12);
    }
}

TEST_CASE("adam_step validates shapes") {
    std::vector<double> p = {1.0, 2.0};
    AdamState s;
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, s, 0.1), SizeError);
}

TEST_CASE("train-mode batch norm standardizes the batch") {
    BnChannel st;
    const auto out = batchnorm_forward({1.0, 2.0, 3.0}, st, RunMode::Train, 0.9);
    double mean = (out[0] + out[1] + out[2]) / 3.0;
    double var = 0.0;
    for (double v : out) var += (v - mean) * (v - mean);
    var /= 3.0;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - 1.0) < 1e-4); // epsilon slightly shrinks the variance
    CHECK(st.updates == 1);
    CHECK(std::abs(st.running_mean - 0.1 * 2.0) < 1e-12);
}

TEST_CASE("zero scale collapses batch norm output to the offset") {
    BnChannel st;
    st.scale = 0.0;
    st.offset = -1.5;
    for (double v : batchnorm_forward({4.0, 8.0}, st, RunMode::Train, 0.9))
        CHECK(v == -1.5);
}

TEST_CASE("batch norm inference requires at least one prior update") {
    BnChannel st;
    CHECK_THROWS_AS(batchnorm_forward({1.0}, st, RunMode::Infer, 0.9), StateError);
    batchnorm_forward({1.0, 3.0}, st, RunMode::Train, 0.9);
    CHECK_NOTHROW(batchnorm_forward({1.0}, st, RunMode::Infer, 0.9));
}

TEST_CASE("running statistics converge geometrically to a repeated batch") {
    BnChannel st;
    const double decay = 0.9;
    const int n = 50;
    for (int i = 0; i < n; ++i) batchnorm_forward({5.0, 7.0}, st, RunMode::Train, decay);
    // Batch mean is 6; running mean approaches it as 6 (1 - decay^n).
    const double expect = 6.0 * (1.0 - std::pow(decay, n));
    CHECK(std::abs(st.running_mean - expect) < 1e-10);
}

TEST_CASE("train_autoencoder records one curve entry per iteration") {
    std::vector<Image> dataset;
    Rng rng(1);
    Image img(24, 24);
    for (double& v : img.data) v = rng.uniform();
    dataset.push_back(img);
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.max_iter = 3;
    cfg.seed = 5;
    const Schedule sched{0.01, 3, 1};
    const TrainResult r = train_autoencoder(cfg, sched, dataset, 2, 16, {3, 4, 5});
    CHECK(r.mse_curve.size() == 3);
    for (double v : r.mse_curve) CHECK(v >= 0.0);
    for (const auto& L : r.params.encoder_layers) CHECK(L.bn_initialized);
}

TEST_CASE("training is bit-for-bit deterministic for a fixed seed") {
    std::vector<Image> dataset;
    Rng rng(2);
    Image img(24, 24);
    for (double& v : img.data) v = rng.uniform();
    dataset.push_back(img);
    TrainConfig cfg;
    cfg.batch_size = 1;
    cfg.max_iter = 2;
    cfg.seed = 11;
    const Schedule sched{0.01, 2, 1};
    const TrainResult a = train_autoencoder(cfg, sched, dataset, 2, 16, {3, 4, 5});
    const TrainResult b = train_autoencoder(cfg, sched, dataset, 2, 16, {3, 4, 5});
    CHECK(a.mse_curve == b.mse_curve);
    for (size_t i = 0; i < a.params.encoder_layers.size(); ++i)
        REQUIRE(a.params.encoder_layers[i].weights == b.params.encoder_layers[i].weights);
    for (size_t i = 0; i < a.params.decoder_layers.size(); ++i)
        REQUIRE(a.params.decoder_layers[i].weights == b.params.decoder_layers[i].weights);
}

TEST_CASE("train_autoencoder validates dataset and config") {
    CHECK_THROWS_AS(train_autoencoder(TrainConfig{}, Schedule{}, {}, 4), ValidationError);
    std::vector<Image> small = {Image(8, 8, 1.0)};
    CHECK_THROWS_AS(train_autoencoder(TrainConfig{}, Schedule{}, small, 4, 16), SizeError);
}
