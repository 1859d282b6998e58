#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "emrc/errors.hpp"

namespace emrc {

/// 2-D grid of real intensities, row-major.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data; // height * width

    Image() = default;
    Image(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {
        if (h <= 0 || w <= 0)
            throw SizeError("Image dimensions must be positive, got " +
                            std::to_string(h) + "x" + std::to_string(w));
    }

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

/// 3-D tensor, row-major with depth fastest: index = (y*width + x)*depth + c.
struct Tensor3 {
    int height = 0;
    int width = 0;
    int depth = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int h, int w, int d, double fill = 0.0)
        : height(h), width(w), depth(d),
          data(static_cast<size_t>(h) * w * d, fill) {
        if (h <= 0 || w <= 0 || d <= 0)
            throw SizeError("Tensor3 dimensions must be positive");
    }

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * depth + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * depth + c];
    }
    size_t size() const { return data.size(); }
};

/// Copy a size x size region with top-left corner (top, left).
inline Image crop(const Image& img, int top, int left, int size) {
    if (size <= 0)
        throw RangeError("crop: size must be positive, got " + std::to_string(size));
    if (top < 0 || left < 0)
        throw RangeError("crop: top/left must be non-negative, got top=" +
                         std::to_string(top) + " left=" + std::to_string(left));
    if (top + size > img.height)
        throw RangeError("crop: top+size=" + std::to_string(top + size) +
                         " exceeds height=" + std::to_string(img.height));
    if (left + size > img.width)
        throw RangeError("crop: left+size=" + std::to_string(left + size) +
                         " exceeds width=" + std::to_string(img.width));
    Image out(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            out.at(y, x) = img.at(top + y, left + x);
    return out;
}

namespace detail {
// Mirror index into [0, n) without repeating the edge sample. Valid for
// p in (-n, 2n-1), which a single reflection covers when margin < n.
// A singleton axis can only replicate.
inline int reflect_index(int p, int n) {
    if (n == 1) return 0;
    if (p < 0) return -p;
    if (p >= n) return 2 * n - 2 - p;
    return p;
}
} // namespace detail

/// Enlarge by `margin` on every side using mirror reflection (edge pixel not
/// repeated). margin 0 returns a copy.
inline Image pad_reflect(const Image& img, int margin) {
    if (margin < 0)
        throw RangeError("pad_reflect: margin must be non-negative");
    const auto fits = [margin](int n) { return n == 1 || margin < n; };
    if (!fits(img.height) || !fits(img.width))
        throw RangeError("pad_reflect: margin " + std::to_string(margin) +
                         " must be smaller than min dimension " +
                         std::to_string(std::min(img.height, img.width)));
    Image out(img.height + 2 * margin, img.width + 2 * margin);
    for (int y = 0; y < out.height; ++y) {
        const int sy = detail::reflect_index(y - margin, img.height);
        for (int x = 0; x < out.width; ++x) {
            const int sx = detail::reflect_index(x - margin, img.width);
            out.at(y, x) = img.at(sy, sx);
        }
    }
    return out;
}

} // namespace emrc
