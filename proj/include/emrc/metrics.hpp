#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "emrc/errors.hpp"

namespace emrc {

/// Trailing moving average with a growing warm-up window:
/// out[i] = mean(series[max(0, i-window+1) ..= i]).
inline std::vector<double> moving_average(const std::vector<double>& series,
                                          int window) {
    if (series.empty())
        throw ValidationError("moving_average: empty series");
    if (window < 1)
        throw ValidationError("moving_average: window must be >= 1");
    std::vector<double> out(series.size());
    double sum = 0.0;
    for (size_t i = 0; i < series.size(); ++i) {
        sum += series[i];
        if (i >= static_cast<size_t>(window)) sum -= series[i - window];
        const size_t n = std::min(i + 1, static_cast<size_t>(window));
        out[i] = sum / static_cast<double>(n);
    }
    return out;
}

/// Mean and population standard deviation of the final n entries.
inline std::pair<double, double> tail_stats(const std::vector<double>& series,
                                            int n) {
    if (n < 1)
        throw ValidationError("tail_stats: n must be >= 1");
    if (series.size() < static_cast<size_t>(n))
        throw SizeError("tail_stats: series length " +
                        std::to_string(series.size()) + " < n=" + std::to_string(n));
    const size_t start = series.size() - n;
    double mean = 0.0;
    for (size_t i = start; i < series.size(); ++i) mean += series[i];
    mean /= n;
    double var = 0.0;
    for (size_t i = start; i < series.size(); ++i) {
        const double d = series[i] - mean;
        var += d * d;
    }
    var /= n;
    return {mean, std::sqrt(var)};
}

/// Learning-curve file: header "iteration,mse", then one CSV row per iteration.
inline void write_curve(const std::string& path, const std::vector<double>& mse) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open curve file for writing: " + path);
    f << "iteration,mse\n";
    f.precision(17);
    for (size_t i = 0; i < mse.size(); ++i) f << i << ',' << mse[i] << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline std::vector<double> read_curve(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open curve file: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "iteration,mse")
        throw ParseError("curve file missing 'iteration,mse' header: " + path);
    std::vector<double> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("malformed curve row: " + line);
        out.push_back(std::stod(line.substr(comma + 1)));
    }
    return out;
}

} // namespace emrc
