#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "emrc/metrics.hpp"
#include "emrc/rng.hpp"

using namespace emrc;

TEST_CASE("moving_average warms up then slides") {
    const std::vector<double> s = {1, 2, 3, 4};
    const auto out = moving_average(s, 2);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 1.5);
    CHECK(out[2] == 2.5);
    CHECK(out[3] == 3.5);
}

TEST_CASE("moving_average with window 1 is the identity") {
    const std::vector<double> s = {3.5, -1.0, 0.25};
    CHECK(moving_average(s, 1) == s);
}

TEST_CASE("moving_average matches a direct per-window mean") {
    Rng rng(5);
    std::vector<double> s(200);
    for (double& v : s) v = rng.uniform(-10.0, 10.0);
    for (int window : {1, 3, 17, 200, 500}) {
        const auto fast = moving_average(s, window);
        for (size_t i = 0; i < s.size(); ++i) {
            const size_t lo = i + 1 >= static_cast<size_t>(window) ? i + 1 - window : 0;
            double m = 0.0;
            for (size_t j = lo; j <= i; ++j) m += s[j];
            m /= static_cast<double>(i - lo + 1);
            REQUIRE(std::abs(fast[i] - m) < 1e-9);
        }
    }
}

TEST_CASE("moving_average validates its arguments") {
    CHECK_THROWS_AS(moving_average({}, 3), ValidationError);
    CHECK_THROWS_AS(moving_average({1.0}, 0), ValidationError);
}

TEST_CASE("tail_stats returns mean and population standard deviation") {
    const std::vector<double> s = {99.0, 1.0, 3.0};
    const auto [mean, sd] = tail_stats(s, 2);
    CHECK(mean == 2.0);
    CHECK(sd == 1.0);
}

TEST_CASE("tail_stats matches a two-pass reference") {
    Rng rng(8);
    std::vector<double> s(64);
    for (double& v : s) v = rng.normal();
    const int n = 20;
    const auto [mean, sd] = tail_stats(s, n);
    double m = 0.0;
    for (size_t i = s.size() - n; i < s.size(); ++i) m += s[i];
    m /= n;
    double var = 0.0;
    for (size_t i = s.size() - n; i < s.size(); ++i) var += (s[i] - m) * (s[i] - m);
    var /= n;
    CHECK(std::abs(mean - m) < 1e-12);
    CHECK(std::abs(sd - std::sqrt(var)) < 1e-12);
}

TEST_CASE("tail_stats validates its arguments") {
    CHECK_THROWS_AS(tail_stats({1.0, 2.0}, 3), SizeError);
    CHECK_THROWS_AS(tail_stats({1.0}, 0), ValidationError);
}

TEST_CASE("learning curves round-trip through their CSV file") {
    const std::string path = "curve_roundtrip_test.csv";
    const std::vector<double> mse = {1.25, 0.5, 0.03125};
    write_curve(path, mse);
    CHECK(read_curve(path) == mse);
    std::remove(path.c_str());
}

TEST_CASE("read_curve rejects a file without the expected header") {
    const std::string path = "curve_badheader_test.csv";
    {
        std::ofstream f(path);
        f << "iter,loss\n0,1.0\n";
    }
    CHECK_THROWS_AS(read_curve(path), ParseError);
    std::remove(path.c_str());
}
