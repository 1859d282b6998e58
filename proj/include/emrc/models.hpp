#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "emrc/errors.hpp"
#include "emrc/published.hpp"
#include "emrc/rng.hpp"
#include "emrc/tensor.hpp"

namespace emrc {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

enum class Border { Reflect, Crop };
enum class RunMode { Train, Infer };

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// ---------------------------------------------------------------------------
// Fixed kernels
// ---------------------------------------------------------------------------

/// A single w x w linear filter (a zero-hidden-layer MLP: the elementwise
/// weighting and the fully connected output collapse into one matrix).
struct KernelModel {
    int w = 3;
    std::vector<double> weights; // w*w, row-major
};

inline KernelModel kernel_from_published(const PublishedKernel& k) {
    return KernelModel{k.size, k.weights};
}

/// Slide the kernel over the image. Border::Reflect pads by (w-1)/2 and
/// returns a same-size image; Border::Crop returns the valid interior,
/// (H-w+1) x (W-w+1).
inline Image kernel_apply(const KernelModel& model, const Image& img, Border border) {
    const int w = model.w;
    if (img.height < w || img.width < w)
        throw SizeError("kernel_apply: image " + std::to_string(img.height) + "x" +
                        std::to_string(img.width) + " smaller than kernel size " +
                        std::to_string(w));
    const int m = (w - 1) / 2;
    const Image padded = border == Border::Reflect ? pad_reflect(img, m) : Image();
    const Image* in = border == Border::Reflect ? &padded : &img;
    const int oh = in->height - w + 1;
    const int ow = in->width - w + 1;
    Image out(oh, ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < w; ++ky)
                for (int kx = 0; kx < w; ++kx)
                    acc += model.weights[ky * w + kx] * in->at(y + ky, x + kx);
            out.at(y, x) = acc;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// MLPs
// ---------------------------------------------------------------------------

/// One hidden layer: h = sigmoid(dense * (gain .* h_prev + bias)).
struct MlpHiddenLayer {
    std::vector<double> gain;  // w*w elementwise weights
    std::vector<double> bias;  // w*w
    std::vector<double> dense; // (w*w) x (w*w), row-major (out, in)
};

struct MlpModel {
    int w = 3;
    std::vector<MlpHiddenLayer> hidden; // 1 or 2 layers
    std::vector<double> output_weights; // w*w, to a single node
    // The output node is linear by default; normalized targets have mean 1
    // and routinely exceed 1, which a sigmoid cannot emit.
    bool sigmoid_output = false;
};

inline MlpModel make_mlp(int w, int hidden_layers, Rng& rng);

/// Forward pass over one flattened w x w patch; returns the single output node.
inline double mlp_forward(const MlpModel& model, const std::vector<double>& patch) {
    const size_t n = static_cast<size_t>(model.w) * model.w;
    if (patch.size() != n)
        throw SizeError("mlp_forward: patch length " + std::to_string(patch.size()) +
                        " != w^2 = " + std::to_string(n));
    Vec h = Eigen::Map<const Vec>(patch.data(), n);
    for (const auto& L : model.hidden) {
        if (L.gain.size() != n || L.bias.size() != n || L.dense.size() != n * n)
            throw SizeError("mlp_forward: layer parameter shapes do not match w^2");
        Vec u = Eigen::Map<const Vec>(L.gain.data(), n).cwiseProduct(h) +
                Eigen::Map<const Vec>(L.bias.data(), n);
        Vec z = Eigen::Map<const RowMat>(L.dense.data(), n, n) * u;
        h = z.unaryExpr([](double v) { return sigmoid(v); });
    }
    if (model.output_weights.size() != n)
        throw SizeError("mlp_forward: output weight length != w^2");
    double out = Eigen::Map<const Vec>(model.output_weights.data(), n).dot(h);
    if (model.sigmoid_output) out = sigmoid(out);
    return out;
}

/// Sliding-window restoration with mlp_forward per window; border handling
/// as in kernel_apply.
inline Image mlp_denoise(const MlpModel& model, const Image& img, Border border) {
    const int w = model.w;
    if (img.height < w || img.width < w)
        throw SizeError("mlp_denoise: image smaller than input size " + std::to_string(w));
    const int m = (w - 1) / 2;
    const Image padded = border == Border::Reflect ? pad_reflect(img, m) : Image();
    const Image* in = border == Border::Reflect ? &padded : &img;
    const int oh = in->height - w + 1;
    const int ow = in->width - w + 1;
    Image out(oh, ow);
    std::vector<double> patch(static_cast<size_t>(w) * w);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int ky = 0; ky < w; ++ky)
                for (int kx = 0; kx < w; ++kx)
                    patch[ky * w + kx] = in->at(y + ky, x + kx);
            out.at(y, x) = mlp_forward(model, patch);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Autoencoder
// ---------------------------------------------------------------------------

/// Mini-batch of feature maps: index (((i*h + y)*w + x)*c + cc).
struct Batch {
    int n = 0, h = 0, w = 0, c = 0;
    std::vector<double> data;

    Batch() = default;
    Batch(int n_, int h_, int w_, int c_, double fill = 0.0)
        : n(n_), h(h_), w(w_), c(c_),
          data(static_cast<size_t>(n_) * h_ * w_ * c_, fill) {}

    size_t sample_size() const { return static_cast<size_t>(h) * w * c; }
    double* sample(int i) { return data.data() + i * sample_size(); }
    const double* sample(int i) const { return data.data() + i * sample_size(); }
};

/// One convolution stage of the autoencoder. Flags mirror the network
/// contract: the second-to-last stage has no batch norm, the final stage is
/// a parameter-free identity.
struct ConvLayerParams {
    int in_ch = 1, out_ch = 1;
    int kernel = 3, stride = 1;
    bool upsample_before = false; // nearest-neighbour 2x resize before conv
    bool has_parameters = true;
    bool has_batchnorm = true;
    bool has_activation = true;

    // weights index: ((ky*kernel + kx)*in_ch + ci)*out_ch + co
    std::vector<double> weights;
    std::vector<double> bias; // out_ch

    std::vector<double> bn_scale, bn_offset;     // out_ch
    std::vector<double> bn_run_mean, bn_run_var; // out_ch
    bool bn_initialized = false;
};

struct AutoencoderParams {
    Modality modality = Modality::TEM_STEM;
    int input_size = 160;
    int latent_size = 20;
    int latent_depth = 16;
    std::vector<ConvLayerParams> encoder_layers;
    std::vector<ConvLayerParams> decoder_layers;
};

namespace nn {

constexpr double kBnEpsilon = 1e-5;

inline void im2col(const double* in, int h, int w, int c, int k, int stride,
                   int pad, int oh, int ow, RowMat& col) {
    col.setZero(static_cast<Eigen::Index>(oh) * ow, static_cast<Eigen::Index>(k) * k * c);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* row = col.data() + (static_cast<size_t>(oy) * ow + ox) * col.cols();
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride - pad + kx;
                    if (ix < 0 || ix >= w) continue;
                    const double* src = in + (static_cast<size_t>(iy) * w + ix) * c;
                    double* dst = row + (static_cast<size_t>(ky) * k + kx) * c;
                    for (int ci = 0; ci < c; ++ci) dst[ci] = src[ci];
                }
            }
        }
    }
}

/// Scatter-add inverse of im2col.
inline void col2im(const RowMat& col, int h, int w, int c, int k, int stride,
                   int pad, int oh, int ow, double* din) {
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const double* row = col.data() + (static_cast<size_t>(oy) * ow + ox) * col.cols();
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride - pad + kx;
                    if (ix < 0 || ix >= w) continue;
                    double* dst = din + (static_cast<size_t>(iy) * w + ix) * c;
                    const double* src = row + (static_cast<size_t>(ky) * k + kx) * c;
                    for (int ci = 0; ci < c; ++ci) dst[ci] += src[ci];
                }
            }
        }
    }
}

inline Batch upsample2(const Batch& in) {
    Batch out(in.n, in.h * 2, in.w * 2, in.c);
    for (int i = 0; i < in.n; ++i) {
        const double* src = in.sample(i);
        double* dst = out.sample(i);
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) {
                const double* s = src + (static_cast<size_t>(y / 2) * in.w + x / 2) * in.c;
                double* d = dst + (static_cast<size_t>(y) * out.w + x) * in.c;
                for (int c = 0; c < in.c; ++c) d[c] = s[c];
            }
    }
    return out;
}

inline Batch upsample2_backward(const Batch& dout, int in_h, int in_w) {
    Batch din(dout.n, in_h, in_w, dout.c, 0.0);
    for (int i = 0; i < dout.n; ++i) {
        const double* src = dout.sample(i);
        double* dst = din.sample(i);
        for (int y = 0; y < dout.h; ++y)
            for (int x = 0; x < dout.w; ++x) {
                const double* s = src + (static_cast<size_t>(y) * dout.w + x) * dout.c;
                double* d = dst + (static_cast<size_t>(y / 2) * in_w + x / 2) * dout.c;
                for (int c = 0; c < dout.c; ++c) d[c] += s[c];
            }
    }
    return din;
}

inline Batch conv_forward(const Batch& in, const ConvLayerParams& L) {
    const int k = L.kernel, pad = (k - 1) / 2;
    const int oh = (in.h + 2 * pad - k) / L.stride + 1;
    const int ow = (in.w + 2 * pad - k) / L.stride + 1;
    Batch out(in.n, oh, ow, L.out_ch);
    Eigen::Map<const RowMat> W(L.weights.data(), static_cast<Eigen::Index>(k) * k * in.c,
                               L.out_ch);
    Eigen::Map<const Eigen::RowVectorXd> b(L.bias.data(), L.out_ch);
    RowMat col;
    for (int i = 0; i < in.n; ++i) {
        im2col(in.sample(i), in.h, in.w, in.c, k, L.stride, pad, oh, ow, col);
        Eigen::Map<RowMat> O(out.sample(i), static_cast<Eigen::Index>(oh) * ow, L.out_ch);
        O.noalias() = col * W;
        O.rowwise() += b;
    }
    return out;
}

/// Gradients w.r.t. conv input, weights and bias. `in` is the conv input
/// (after any upsampling); dw/db are accumulated into.
inline Batch conv_backward(const Batch& in, const ConvLayerParams& L, const Batch& dout,
                           std::vector<double>& dw, std::vector<double>& db) {
    const int k = L.kernel, pad = (k - 1) / 2;
    Batch din(in.n, in.h, in.w, in.c, 0.0);
    Eigen::Map<const RowMat> W(L.weights.data(), static_cast<Eigen::Index>(k) * k * in.c,
                               L.out_ch);
    Eigen::Map<RowMat> dW(dw.data(), static_cast<Eigen::Index>(k) * k * in.c, L.out_ch);
    Eigen::Map<Eigen::RowVectorXd> dB(db.data(), L.out_ch);
    RowMat col, dcol;
    for (int i = 0; i < in.n; ++i) {
        im2col(in.sample(i), in.h, in.w, in.c, k, L.stride, pad, dout.h, dout.w, col);
        Eigen::Map<const RowMat> dO(dout.sample(i),
                                    static_cast<Eigen::Index>(dout.h) * dout.w, L.out_ch);
        dW.noalias() += col.transpose() * dO;
        dB += dO.colwise().sum();
        dcol.noalias() = dO * W.transpose();
        col2im(dcol, in.h, in.w, in.c, k, L.stride, pad, dout.h, dout.w, din.sample(i));
    }
    return din;
}

struct BnBatchStats {
    std::vector<double> mean, var; // per channel, biased variance
};

/// Train-mode batch norm over all samples and spatial positions per channel;
/// x is replaced by scale * xhat + offset. Returns the batch statistics.
inline BnBatchStats bn_train_forward(Batch& x, const ConvLayerParams& L) {
    const size_t rows = static_cast<size_t>(x.n) * x.h * x.w;
    if (rows == 0) throw SizeError("batch norm: empty batch in train mode");
    BnBatchStats s;
    s.mean.assign(x.c, 0.0);
    s.var.assign(x.c, 0.0);
    for (size_t r = 0; r < rows; ++r) {
        const double* p = x.data.data() + r * x.c;
        for (int c = 0; c < x.c; ++c) s.mean[c] += p[c];
    }
    for (int c = 0; c < x.c; ++c) s.mean[c] /= static_cast<double>(rows);
    for (size_t r = 0; r < rows; ++r) {
        const double* p = x.data.data() + r * x.c;
        for (int c = 0; c < x.c; ++c) {
            const double d = p[c] - s.mean[c];
            s.var[c] += d * d;
        }
    }
    for (int c = 0; c < x.c; ++c) s.var[c] /= static_cast<double>(rows);
    std::vector<double> a(x.c), b(x.c);
    for (int c = 0; c < x.c; ++c) {
        const double inv = 1.0 / std::sqrt(s.var[c] + kBnEpsilon);
        a[c] = L.bn_scale[c] * inv;
        b[c] = L.bn_offset[c] - a[c] * s.mean[c];
    }
    for (size_t r = 0; r < rows; ++r) {
        double* p = x.data.data() + r * x.c;
        for (int c = 0; c < x.c; ++c) p[c] = a[c] * p[c] + b[c];
    }
    return s;
}

inline void bn_infer_forward(Batch& x, const ConvLayerParams& L) {
    if (!L.bn_initialized)
        throw StateError("batch norm: inference requested before any "
                         "running-statistics update");
    const size_t rows = static_cast<size_t>(x.n) * x.h * x.w;
    std::vector<double> a(x.c), b(x.c);
    for (int c = 0; c < x.c; ++c) {
        const double inv = 1.0 / std::sqrt(L.bn_run_var[c] + kBnEpsilon);
        a[c] = L.bn_scale[c] * inv;
        b[c] = L.bn_offset[c] - L.bn_run_mean[c] * a[c];
    }
    for (size_t r = 0; r < rows; ++r) {
        double* p = x.data.data() + r * x.c;
        for (int c = 0; c < x.c; ++c) p[c] = a[c] * p[c] + b[c];
    }
}

/// running = decay * running + (1 - decay) * batch_stat
inline void bn_commit(ConvLayerParams& L, const BnBatchStats& s, double decay) {
    for (int c = 0; c < L.out_ch; ++c) {
        L.bn_run_mean[c] = decay * L.bn_run_mean[c] + (1.0 - decay) * s.mean[c];
        L.bn_run_var[c] = decay * L.bn_run_var[c] + (1.0 - decay) * s.var[c];
    }
    L.bn_initialized = true;
}

inline void relu_inplace(Batch& x) {
    for (double& v : x.data) v = v > 0.0 ? v : 0.0;
}

struct LayerCache {
    Batch in;            // layer input, before any upsampling
    Batch conv_out;      // after conv+bias, before batch norm
    BnBatchStats bn;     // train-mode batch statistics
    Batch out;           // layer output, post activation
};

/// Forward through one stage. Pure: running statistics are not touched; a
/// training loop commits cache->bn via bn_commit after the step.
inline Batch layer_forward(const ConvLayerParams& L, const Batch& in, RunMode mode,
                           LayerCache* cache) {
    if (!L.has_parameters) {
        if (cache) { cache->in = in; cache->out = in; }
        return in;
    }
    Batch x = L.upsample_before ? upsample2(in) : in;
    Batch y = conv_forward(x, L);
    if (cache) { cache->in = in; cache->conv_out = y; }
    if (L.has_batchnorm) {
        if (mode == RunMode::Train) {
            BnBatchStats s = bn_train_forward(y, L);
            if (cache) cache->bn = std::move(s);
        } else {
            bn_infer_forward(y, L);
        }
    }
    if (L.has_activation) relu_inplace(y);
    if (cache) cache->out = y;
    return y;
}

} // namespace nn

/// Xavier bound sqrt(6 / (fan_in + fan_out)) for uniform initialization.
inline double xavier_bound(int fan_in, int fan_out) {
    if (fan_in <= 0 || fan_out <= 0)
        throw ValidationError("xavier bound: fans must be positive");
    return std::sqrt(6.0 / (fan_in + fan_out));
}

namespace detail {

inline ConvLayerParams make_conv_layer(int in_ch, int out_ch, int stride, bool upsample,
                                       bool bn, bool act, Rng& rng) {
    ConvLayerParams L;
    L.in_ch = in_ch;
    L.out_ch = out_ch;
    L.stride = stride;
    L.upsample_before = upsample;
    L.has_batchnorm = bn;
    L.has_activation = act;
    const int k = L.kernel;
    const double bound = xavier_bound(k * k * in_ch, k * k * out_ch);
    L.weights.resize(static_cast<size_t>(k) * k * in_ch * out_ch);
    for (double& v : L.weights) v = rng.uniform(-bound, bound);
    L.bias.assign(out_ch, 0.0);
    if (bn) {
        L.bn_scale.assign(out_ch, 1.0);
        L.bn_offset.assign(out_ch, 0.0);
        L.bn_run_mean.assign(out_ch, 0.0);
        L.bn_run_var.assign(out_ch, 1.0);
    }
    return L;
}

} // namespace detail

/// Build a freshly initialized autoencoder.
///
/// Encoder: four 3x3 convolutions, strides (2,2,2,1), widths
/// (c0, c1, c2, latent_depth), each batch-normalized and ReLU activated.
/// Decoder: three stages of nearest-neighbour 2x resize + 3x3 convolution
/// with widths (c2, c1, c0), then a 3x3 convolution to one channel with no
/// batch norm or activation, then a parameter-free identity output stage.
/// Resize-then-convolve avoids the checkerboard artefacts of transposed
/// convolutions.
inline AutoencoderParams make_autoencoder(int latent_depth, Rng& rng,
                                          int input_size = 160,
                                          std::array<int, 3> channels = {32, 64, 128},
                                          Modality modality = Modality::TEM_STEM) {
    if (input_size % 8 != 0 || input_size < 8)
        throw ValidationError("autoencoder input size must be a positive multiple of 8");
    if (latent_depth < 1)
        throw ValidationError("latent depth must be positive");
    AutoencoderParams p;
    p.modality = modality;
    p.input_size = input_size;
    p.latent_size = input_size / 8;
    p.latent_depth = latent_depth;
    using detail::make_conv_layer;
    p.encoder_layers.push_back(make_conv_layer(1, channels[0], 2, false, true, true, rng));
    p.encoder_layers.push_back(make_conv_layer(channels[0], channels[1], 2, false, true, true, rng));
    p.encoder_layers.push_back(make_conv_layer(channels[1], channels[2], 2, false, true, true, rng));
    p.encoder_layers.push_back(make_conv_layer(channels[2], latent_depth, 1, false, true, true, rng));
    p.decoder_layers.push_back(make_conv_layer(latent_depth, channels[2], 1, true, true, true, rng));
    p.decoder_layers.push_back(make_conv_layer(channels[2], channels[1], 1, true, true, true, rng));
    p.decoder_layers.push_back(make_conv_layer(channels[1], channels[0], 1, true, true, true, rng));
    // Second-to-last stage: no batch norm, no activation.
    p.decoder_layers.push_back(make_conv_layer(channels[0], 1, 1, false, false, false, rng));
    // Final stage: parameter-free identity.
    ConvLayerParams last;
    last.in_ch = 1;
    last.out_ch = 1;
    last.has_parameters = false;
    last.has_batchnorm = false;
    last.has_activation = false;
    p.decoder_layers.push_back(last);
    return p;
}

inline Batch batch_from_image(const Image& img) {
    Batch b(1, img.height, img.width, 1);
    b.data = img.data;
    return b;
}

inline Batch batch_from_tensor3(const Tensor3& t) {
    Batch b(1, t.height, t.width, t.depth);
    b.data = t.data;
    return b;
}

/// Encode a normalized input_size x input_size crop to the latent tensor.
/// Train mode normalizes by batch statistics and updates the running
/// statistics in place; infer mode uses the stored running statistics.
inline Tensor3 autoencoder_encode(AutoencoderParams& params, const Image& img,
                                  RunMode mode, double bn_decay = 0.999) {
    if (img.height != params.input_size || img.width != params.input_size)
        throw SizeError("autoencoder_encode: expected " + std::to_string(params.input_size) +
                        "x" + std::to_string(params.input_size) + " input, got " +
                        std::to_string(img.height) + "x" + std::to_string(img.width));
    Batch x = batch_from_image(img);
    for (auto& L : params.encoder_layers) {
        nn::LayerCache cache;
        x = nn::layer_forward(L, x, mode, &cache);
        if (mode == RunMode::Train && L.has_batchnorm) nn::bn_commit(L, cache.bn, bn_decay);
    }
    Tensor3 out(x.h, x.w, x.c);
    out.data = std::move(x.data);
    return out;
}

inline Tensor3 autoencoder_encode(const AutoencoderParams& params, const Image& img) {
    Batch x = batch_from_image(img);
    if (img.height != params.input_size || img.width != params.input_size)
        throw SizeError("autoencoder_encode: wrong input size");
    for (const auto& L : params.encoder_layers)
        x = nn::layer_forward(L, x, RunMode::Infer, nullptr);
    Tensor3 out(x.h, x.w, x.c);
    out.data = std::move(x.data);
    return out;
}

/// Decode a latent tensor back to an input_size x input_size image.
inline Image autoencoder_decode(AutoencoderParams& params, const Tensor3& latent,
                                RunMode mode, double bn_decay = 0.999) {
    if (latent.height != params.latent_size || latent.width != params.latent_size ||
        latent.depth != params.latent_depth)
        throw SizeError("autoencoder_decode: expected latent " +
                        std::to_string(params.latent_size) + "x" +
                        std::to_string(params.latent_size) + "x" +
                        std::to_string(params.latent_depth) + ", got " +
                        std::to_string(latent.height) + "x" + std::to_string(latent.width) +
                        "x" + std::to_string(latent.depth));
    Batch x = batch_from_tensor3(latent);
    for (auto& L : params.decoder_layers) {
        nn::LayerCache cache;
        x = nn::layer_forward(L, x, mode, &cache);
        if (mode == RunMode::Train && L.has_batchnorm) nn::bn_commit(L, cache.bn, bn_decay);
    }
    Image out(x.h, x.w);
    out.data = std::move(x.data);
    return out;
}

inline Image autoencoder_decode(const AutoencoderParams& params, const Tensor3& latent) {
    if (latent.height != params.latent_size || latent.width != params.latent_size ||
        latent.depth != params.latent_depth)
        throw SizeError("autoencoder_decode: wrong latent shape");
    Batch x = batch_from_tensor3(latent);
    for (const auto& L : params.decoder_layers)
        x = nn::layer_forward(L, x, RunMode::Infer, nullptr);
    Image out(x.h, x.w);
    out.data = std::move(x.data);
    return out;
}

inline MlpModel make_mlp(int w, int hidden_layers, Rng& rng) {
    if (w < 3 || w % 2 == 0)
        throw ValidationError("MLP input size must be odd and >= 3");
    if (hidden_layers < 1 || hidden_layers > 2)
        throw ValidationError("MLP hidden layer count must be 1 or 2");
    const int n = w * w;
    MlpModel m;
    m.w = w;
    for (int l = 0; l < hidden_layers; ++l) {
        MlpHiddenLayer L;
        const double gb = xavier_bound(1, 1);
        L.gain.resize(n);
        for (double& v : L.gain) v = rng.uniform(-gb, gb);
        L.bias.assign(n, 0.0);
        const double db = xavier_bound(n, n);
        L.dense.resize(static_cast<size_t>(n) * n);
        for (double& v : L.dense) v = rng.uniform(-db, db);
        m.hidden.push_back(std::move(L));
    }
    const double ob = xavier_bound(n, 1);
    m.output_weights.resize(n);
    for (double& v : m.output_weights) v = rng.uniform(-ob, ob);
    return m;
}

inline KernelModel make_kernel(int w, Rng& rng) {
    if (w < 3 || w % 2 == 0)
        throw ValidationError("kernel size must be odd and >= 3");
    KernelModel k;
    k.w = w;
    const double b = xavier_bound(w * w, 1);
    k.weights.resize(static_cast<size_t>(w) * w);
    for (double& v : k.weights) v = rng.uniform(-b, b);
    return k;
}

} // namespace emrc
