#pragma once

#include <cmath>
#include <numeric>
#include <utility>

#include "emrc/errors.hpp"
#include "emrc/tensor.hpp"

namespace emrc {

/// Statistics recorded by normalize() so the transform can be inverted.
/// `mean` is measured after the minimum has been subtracted.
struct NormStats {
    double min = 0.0;
    double mean = 1.0;
};

/// Subtract the minimum, then divide by the mean of the shifted image.
/// The output has min 0 and mean 1.
///
/// A constant input has zero mean after min subtraction and cannot be
/// scaled; by default this raises DegenerateInputError. With
/// substitute_degenerate, the result is the all-zeros image with stats
/// {min, mean=1}, which denormalize() inverts back to the constant.
inline std::pair<Image, NormStats> normalize(const Image& img,
                                             bool substitute_degenerate = false) {
    if (img.data.empty())
        throw ValidationError("normalize: empty image");
    double mn = img.data[0];
    for (double v : img.data) {
        if (!std::isfinite(v))
            throw ValidationError("normalize: non-finite input value");
        mn = std::min(mn, v);
    }
    double sum = 0.0;
    for (double v : img.data) sum += v - mn;
    const double mean = sum / static_cast<double>(img.data.size());
    if (mean == 0.0) {
        if (!substitute_degenerate)
            throw DegenerateInputError(
                "normalize: constant image (zero mean after min subtraction)");
        Image zeros(img.height, img.width, 0.0);
        return {std::move(zeros), NormStats{mn, 1.0}};
    }
    Image out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = (img.data[i] - mn) / mean;
    return {std::move(out), NormStats{mn, mean}};
}

/// Inverse of normalize: x * mean + min.
inline Image denormalize(const Image& img, const NormStats& stats) {
    if (!std::isfinite(stats.min) || !std::isfinite(stats.mean))
        throw ValidationError("denormalize: non-finite stats");
    Image out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = img.data[i] * stats.mean + stats.min;
    return out;
}

} // namespace emrc
