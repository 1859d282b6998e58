#pragma once

#include <array>
#include <string>
#include <vector>

#include "emrc/errors.hpp"

namespace emrc {

enum class Modality : int { TEM = 0, STEM = 1, TEM_STEM = 2 };

inline std::string to_string(Modality m) {
    switch (m) {
        case Modality::TEM: return "TEM";
        case Modality::STEM: return "STEM";
        case Modality::TEM_STEM: return "TEM+STEM";
    }
    throw ValidationError("bad modality value");
}

struct PublishedKernel {
    Modality modality;
    int size;                    // odd, one of 3/5/7/11
    std::vector<double> weights; // size*size, row-major
};

enum class ModelKind : int { Kernel = 0, Mlp = 1, Autoencoder = 2 };

/// One configuration row of the trained-model inventory.
struct InventoryEntry {
    ModelKind kind;
    Modality modality;
    int size_or_depth; // input size w for kernels/MLPs, latent depth x for autoencoders
    int hidden_layers; // 0 for kernels and autoencoders
};

namespace detail {

// Fixed denoising filters, stored to the 3-decimal precision of the source.
// They are intentionally not renormalized (the TEM 3x3 sums to 1.014).
//
// The TEM+STEM 11x11 source prints "1" at (row 1, col 10) where four-fold
// symmetry demands -0.003; we ship the corrected value. A unit weight there
// would dominate the filter and contradicts the symmetry of every other
// published matrix.

inline const std::array<double, 9> kTem3 = {
    0.064, 0.135, 0.064,
    0.135, 0.218, 0.135,
    0.064, 0.135, 0.064};

inline const std::array<double, 25> kTem5 = {
    -0.084, -0.001,  0.030, -0.001, -0.084,
    -0.001,  0.107,  0.157,  0.107, -0.001,
     0.030,  0.157,  0.220,  0.157,  0.030,
    -0.001,  0.107,  0.157,  0.107, -0.001,
    -0.084, -0.001,  0.030, -0.001, -0.084};

inline const std::array<double, 49> kTem7 = {
    -0.039, -0.038, -0.025, -0.018, -0.025, -0.038, -0.039,
    -0.038, -0.009,  0.035,  0.058,  0.035, -0.009, -0.038,
    -0.025,  0.035,  0.114,  0.153,  0.114,  0.035, -0.025,
    -0.018,  0.058,  0.153,  0.204,  0.153,  0.058, -0.018,
    -0.025,  0.035,  0.114,  0.153,  0.114,  0.035, -0.025,
    -0.038, -0.009,  0.035,  0.058,  0.035, -0.009, -0.038,
    -0.039, -0.038, -0.025, -0.018, -0.025, -0.038, -0.039};

inline const std::array<double, 121> kTem11 = {
    -0.017,  0.000,  0.001, -0.005, -0.006, -0.006, -0.006, -0.005,  0.001,  0.000, -0.017,
     0.000,  0.009, -0.001, -0.013, -0.015, -0.014, -0.015, -0.013, -0.001,  0.009,  0.000,
     0.001, -0.001, -0.015, -0.022, -0.010, -0.001, -0.010, -0.022, -0.015, -0.001,  0.001,
    -0.005, -0.013, -0.022, -0.007,  0.035,  0.059,  0.035, -0.007, -0.022, -0.013, -0.005,
    -0.006, -0.015, -0.010,  0.035,  0.111,  0.152,  0.111,  0.035, -0.010, -0.015, -0.006,
    -0.006, -0.014, -0.001,  0.059,  0.152,  0.202,  0.152,  0.059, -0.001, -0.014, -0.006,
    -0.006, -0.015, -0.010,  0.035,  0.111,  0.152,  0.111,  0.035, -0.010, -0.015, -0.006,
    -0.005, -0.013, -0.022, -0.007,  0.035,  0.059,  0.035, -0.007, -0.022, -0.013, -0.005,
     0.001, -0.001, -0.015, -0.022, -0.010, -0.001, -0.010, -0.022, -0.015, -0.001,  0.001,
     0.000,  0.009, -0.001, -0.013, -0.015, -0.014, -0.015, -0.013, -0.001,  0.009,  0.000,
    -0.017,  0.000,  0.001, -0.005, -0.006, -0.006, -0.006, -0.005,  0.001,  0.000, -0.017};

inline const std::array<double, 9> kStem3 = {
    0.108, 0.111, 0.108,
    0.111, 0.109, 0.111,
    0.108, 0.111, 0.108};

inline const std::array<double, 25> kStem5 = {
    0.004, 0.026, 0.040, 0.026, 0.004,
    0.026, 0.057, 0.089, 0.057, 0.026,
    0.040, 0.089, 0.089, 0.089, 0.040,
    0.026, 0.057, 0.089, 0.057, 0.026,
    0.004, 0.026, 0.040, 0.026, 0.004};

inline const std::array<double, 49> kStem7 = {
    -0.016, -0.004,  0.007,  0.012,  0.007, -0.004, -0.016,
    -0.004,  0.007,  0.026,  0.035,  0.026,  0.007, -0.004,
     0.007,  0.026,  0.057,  0.071,  0.057,  0.026,  0.007,
     0.012,  0.035,  0.071,  0.089,  0.071,  0.035,  0.012,
     0.007,  0.026,  0.057,  0.071,  0.057,  0.026,  0.007,
    -0.004,  0.007,  0.026,  0.035,  0.026,  0.007, -0.004,
    -0.016, -0.004,  0.007,  0.012,  0.007, -0.004, -0.016};

inline const std::array<double, 121> kStem11 = {
     0.012,  0.003, -0.001, -0.002,  0.000,  0.002,  0.000, -0.002, -0.001,  0.003,  0.012,
     0.003, -0.006, -0.009, -0.007, -0.001,  0.005, -0.001, -0.007, -0.009, -0.006,  0.003,
    -0.001, -0.009, -0.010, -0.001,  0.007,  0.013,  0.007, -0.001, -0.010, -0.009, -0.001,
    -0.002, -0.007, -0.001,  0.012,  0.029,  0.038,  0.029,  0.012, -0.001, -0.007, -0.002,
     0.000, -0.001,  0.007,  0.029,  0.055,  0.070,  0.055,  0.029,  0.007, -0.001,  0.000,
     0.002,  0.005,  0.013,  0.038,  0.070,  0.089,  0.070,  0.038,  0.013,  0.005,  0.002,
     0.000, -0.001,  0.007,  0.029,  0.055,  0.070,  0.055,  0.029,  0.007, -0.001,  0.000,
    -0.002, -0.007, -0.001,  0.012,  0.029,  0.038,  0.029,  0.012, -0.001, -0.007, -0.002,
    -0.001, -0.009, -0.010, -0.001,  0.007,  0.013,  0.007, -0.001, -0.010, -0.009, -0.001,
     0.003, -0.006, -0.009, -0.007, -0.001,  0.005, -0.001, -0.007, -0.009, -0.006,  0.003,
     0.012,  0.003, -0.001, -0.002,  0.000,  0.002,  0.000, -0.002, -0.001,  0.003,  0.012};

inline const std::array<double, 9> kTemStem3 = {
    0.093, 0.124, 0.093,
    0.124, 0.149, 0.124,
    0.093, 0.124, 0.093};

inline const std::array<double, 25> kTemStem5 = {
    -0.061,  0.016,  0.042,  0.016, -0.061,
     0.016,  0.091,  0.116,  0.091,  0.016,
     0.042,  0.116,  0.142,  0.116,  0.042,
     0.016,  0.091,  0.116,  0.091,  0.016,
    -0.061,  0.016,  0.042,  0.016, -0.061};

inline const std::array<double, 49> kTemStem7 = {
    -0.077, -0.037, -0.008,  0.001, -0.008, -0.037, -0.077,
    -0.037,  0.016,  0.052,  0.063,  0.052,  0.016, -0.037,
    -0.008,  0.052,  0.095,  0.110,  0.095,  0.052, -0.008,
     0.001,  0.063,  0.110,  0.127,  0.110,  0.063,  0.001,
    -0.008,  0.052,  0.095,  0.110,  0.095,  0.052, -0.008,
    -0.037,  0.016,  0.052,  0.063,  0.052,  0.016, -0.037,
    -0.077, -0.037, -0.008,  0.001, -0.008, -0.037, -0.077};

// (row 1, col 10) corrected from the source's "1" to -0.003.
inline const std::array<double, 121> kTemStem11 = {
     0.005, -0.003, -0.015, -0.022, -0.019,  0.017, -0.019, -0.022, -0.015, -0.003,  0.005,
    -0.003, -0.008, -0.013, -0.013, -0.004,  0.001, -0.004, -0.013, -0.013, -0.008, -0.003,
    -0.015, -0.013, -0.011, -0.001,  0.017,  0.025,  0.017, -0.001, -0.011, -0.013, -0.015,
    -0.022, -0.013, -0.001,  0.021,  0.050,  0.062,  0.050,  0.021, -0.001, -0.013, -0.022,
    -0.019, -0.004,  0.017,  0.050,  0.088,  0.105,  0.088,  0.050,  0.017, -0.004, -0.019,
     0.017,  0.001,  0.025,  0.062,  0.105,  0.123,  0.105,  0.062,  0.025,  0.001,  0.017,
    -0.019, -0.004,  0.017,  0.050,  0.088,  0.105,  0.088,  0.050,  0.017, -0.004, -0.019,
    -0.022, -0.013, -0.001,  0.021,  0.050,  0.062,  0.050,  0.021, -0.001, -0.013, -0.022,
    -0.015, -0.013, -0.011, -0.001,  0.017,  0.025,  0.017, -0.001, -0.011, -0.013, -0.015,
    -0.003, -0.008, -0.013, -0.013, -0.004,  0.001, -0.004, -0.013, -0.013, -0.008, -0.003,
     0.005, -0.003, -0.015, -0.022, -0.019,  0.017, -0.019, -0.022, -0.015, -0.003,  0.005};

template <size_t N>
PublishedKernel make_kernel(Modality m, int size, const std::array<double, N>& w) {
    return PublishedKernel{m, size, std::vector<double>(w.begin(), w.end())};
}

} // namespace detail

/// Look up a fixed denoising kernel by modality and input size.
/// Sizes 3, 5, 7 and 11 are shipped; the trained 15x15 filters were never
/// published numerically and are reported as unavailable.
inline PublishedKernel get_kernel(Modality modality, int size) {
    using namespace detail;
    switch (modality) {
        case Modality::TEM:
            if (size == 3) return make_kernel(modality, 3, kTem3);
            if (size == 5) return make_kernel(modality, 5, kTem5);
            if (size == 7) return make_kernel(modality, 7, kTem7);
            if (size == 11) return make_kernel(modality, 11, kTem11);
            break;
        case Modality::STEM:
            if (size == 3) return make_kernel(modality, 3, kStem3);
            if (size == 5) return make_kernel(modality, 5, kStem5);
            if (size == 7) return make_kernel(modality, 7, kStem7);
            if (size == 11) return make_kernel(modality, 11, kStem11);
            break;
        case Modality::TEM_STEM:
            if (size == 3) return make_kernel(modality, 3, kTemStem3);
            if (size == 5) return make_kernel(modality, 5, kTemStem5);
            if (size == 7) return make_kernel(modality, 7, kTemStem7);
            if (size == 11) return make_kernel(modality, 11, kTemStem11);
            break;
    }
    throw NotFoundError("no published kernel for " + to_string(modality) +
                        " size " + std::to_string(size) +
                        "; available: sizes 3, 5, 7, 11 for TEM, STEM, TEM+STEM");
}

/// The full inventory of trained configurations: 14 autoencoders,
/// 15 kernels and 14 MLPs.
inline std::vector<InventoryEntry> inventory() {
    std::vector<InventoryEntry> v;
    auto add_ae = [&](Modality m, std::initializer_list<int> depths) {
        for (int x : depths) v.push_back({ModelKind::Autoencoder, m, x, 0});
    };
    add_ae(Modality::TEM, {1, 4, 16, 64});
    add_ae(Modality::STEM, {4, 16, 64});
    add_ae(Modality::TEM_STEM, {1, 2, 4, 8, 16, 32, 64});

    for (Modality m : {Modality::TEM, Modality::STEM, Modality::TEM_STEM})
        for (int w : {3, 5, 7, 11, 15})
            v.push_back({ModelKind::Kernel, m, w, 0});

    auto add_mlp = [&](Modality m, int hidden, std::initializer_list<int> sizes) {
        for (int w : sizes) v.push_back({ModelKind::Mlp, m, w, hidden});
    };
    add_mlp(Modality::TEM, 1, {3, 5, 7});
    add_mlp(Modality::TEM, 2, {5, 7});
    add_mlp(Modality::STEM, 1, {3, 5, 7});
    add_mlp(Modality::TEM_STEM, 1, {3, 5, 7, 11});
    add_mlp(Modality::TEM_STEM, 2, {3, 7});
    return v;
}

} // namespace emrc
