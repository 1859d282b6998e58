#pragma once

#include <cmath>

#include "emrc/rng.hpp"
#include "emrc/tensor.hpp"

namespace emrc {

// Synthetic-data helpers for desk-scale experiments. These are an extension:
// the training pipeline itself never injects noise, it reconstructs its
// (already noisy) inputs.

/// Poisson shot noise at `peak` expected counts for a unit-intensity pixel,
/// plus additive Gaussian read noise. Negative inputs are clamped to zero
/// before the Poisson draw.
inline Image add_poisson_gaussian(const Image& img, double peak, double gauss_sigma,
                                  Rng& rng) {
    Image out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = img.data[i] > 0.0 ? img.data[i] : 0.0;
        const double shot = static_cast<double>(rng.poisson(v * peak)) / peak;
        out.data[i] = shot + gauss_sigma * rng.normal();
    }
    return out;
}

/// Sum of random Gaussian bumps on a dark background; intensities roughly
/// in [0, 1.5].
inline Image synthetic_blobs(int height, int width, int n_blobs, Rng& rng) {
    Image img(height, width, 0.05);
    for (int b = 0; b < n_blobs; ++b) {
        const double cy = rng.uniform(0.0, height);
        const double cx = rng.uniform(0.0, width);
        const double sigma = rng.uniform(4.0, 20.0);
        const double amp = rng.uniform(0.3, 1.0);
        const int r = static_cast<int>(3.0 * sigma) + 1;
        const int y0 = std::max(0, static_cast<int>(cy) - r);
        const int y1 = std::min(height - 1, static_cast<int>(cy) + r);
        const int x0 = std::max(0, static_cast<int>(cx) - r);
        const int x1 = std::min(width - 1, static_cast<int>(cx) + r);
        const double inv = 1.0 / (2.0 * sigma * sigma);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double dy = y - cy, dx = x - cx;
                img.at(y, x) += amp * std::exp(-(dy * dy + dx * dx) * inv);
            }
    }
    return img;
}

} // namespace emrc
