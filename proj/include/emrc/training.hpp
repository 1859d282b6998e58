#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emrc/errors.hpp"
#include "emrc/models.hpp"
#include "emrc/preprocess.hpp"
#include "emrc/rng.hpp"
#include "emrc/tensor.hpp"

namespace emrc {

// ---------------------------------------------------------------------------
// Loss, schedule, initialization, optimizer
// ---------------------------------------------------------------------------

struct LossValue {
    double loss;
    double mse;
};

/// loss = MSE for MSE < 1, sqrt(MSE) otherwise. Damps large early-training
/// errors; both branches meet at 1.
inline LossValue huber_mse_loss(const Image& output, const Image& target) {
    if (output.height != target.height || output.width != target.width)
        throw SizeError("huber_mse_loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < output.data.size(); ++i) {
        const double d = output.data[i] - target.data[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(output.data.size());
    return {mse < 1.0 ? mse : std::sqrt(mse), mse};
}

inline double huberize(double mse) { return mse < 1.0 ? mse : std::sqrt(mse); }

/// d(huberized loss)/d(MSE).
inline double huber_weight(double mse) {
    return mse < 1.0 ? 1.0 : 0.5 / std::sqrt(mse);
}

/// Quadratic step-down schedule: eta = (1 - k/max_iter)^2 * eta0 where k is
/// iter rounded down to a multiple of step_every.
struct Schedule {
    double eta0 = 0.01;
    int max_iter = 60000;
    int step_every = 5000; // 1 for kernels/MLPs
};

inline double learning_rate(const Schedule& s, int iter) {
    if (s.eta0 <= 0.0 || s.max_iter <= 0 || s.step_every <= 0 || s.step_every > s.max_iter)
        throw ValidationError("learning_rate: bad schedule");
    if (iter < 0 || iter >= s.max_iter)
        throw RangeError("learning_rate: iter " + std::to_string(iter) +
                         " outside [0, " + std::to_string(s.max_iter) + ")");
    const int k = s.step_every * (iter / s.step_every);
    const double f = 1.0 - static_cast<double>(k) / s.max_iter;
    return f * f * s.eta0;
}

/// Uniform samples on +-sqrt(6 / (fan_in + fan_out)).
inline std::vector<double> xavier_init(int fan_in, int fan_out, size_t count, Rng& rng) {
    const double bound = xavier_bound(fan_in, fan_out);
    std::vector<double> out(count);
    for (double& v : out) v = rng.uniform(-bound, bound);
    return out;
}

/// Per-parameter-array ADAM accumulators. Moment vectors are allocated on
/// the first step.
struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Standard bias-corrected ADAM update, in place.
inline void adam_step(std::span<double> params, std::span<const double> grads,
                      AdamState& s, double lr) {
    if (params.size() != grads.size())
        throw SizeError("adam_step: params/grads shape mismatch");
    if (lr <= 0.0) throw ValidationError("adam_step: learning rate must be positive");
    if (s.m.empty()) {
        s.m.assign(params.size(), 0.0);
        s.v.assign(params.size(), 0.0);
    }
    if (s.m.size() != params.size())
        throw SizeError("adam_step: state size does not match parameters");
    s.t += 1;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (size_t i = 0; i < params.size(); ++i) {
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
        const double mhat = s.m[i] / c1;
        const double vhat = s.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

// ---------------------------------------------------------------------------
// Reference single-channel batch norm
// ---------------------------------------------------------------------------

/// State of one batch-norm channel, for the per-channel reference routine.
struct BnChannel {
    double scale = 1.0;
    double offset = 0.0;
    double running_mean = 0.0;
    double running_var = 1.0;
    long updates = 0;
};

/// Normalize one channel's batch of values. Train mode uses batch statistics
/// (biased variance) and folds them into the running statistics with
/// running = decay * running + (1 - decay) * batch_stat; infer mode uses the
/// running statistics and requires at least one prior update.
inline std::vector<double> batchnorm_forward(const std::vector<double>& xs, BnChannel& st,
                                             RunMode mode, double decay) {
    std::vector<double> out(xs.size());
    double mean, var;
    if (mode == RunMode::Train) {
        if (xs.empty()) throw SizeError("batchnorm_forward: empty batch in train mode");
        mean = 0.0;
        for (double v : xs) mean += v;
        mean /= static_cast<double>(xs.size());
        var = 0.0;
        for (double v : xs) var += (v - mean) * (v - mean);
        var /= static_cast<double>(xs.size());
        st.running_mean = decay * st.running_mean + (1.0 - decay) * mean;
        st.running_var = decay * st.running_var + (1.0 - decay) * var;
        st.updates += 1;
    } else {
        if (st.updates == 0)
            throw StateError("batchnorm_forward: inference before any training update");
        mean = st.running_mean;
        var = st.running_var;
    }
    const double inv = 1.0 / std::sqrt(var + nn::kBnEpsilon);
    for (size_t i = 0; i < xs.size(); ++i)
        out[i] = st.scale * (xs[i] - mean) * inv + st.offset;
    return out;
}

// ---------------------------------------------------------------------------
// Autoencoder forward/backward
// ---------------------------------------------------------------------------

struct LayerGrads {
    std::vector<double> dw, db, dscale, doffset;
};

inline LayerGrads make_layer_grads(const ConvLayerParams& L) {
    LayerGrads g;
    if (L.has_parameters) {
        g.dw.assign(L.weights.size(), 0.0);
        g.db.assign(L.bias.size(), 0.0);
        if (L.has_batchnorm) {
            g.dscale.assign(L.bn_scale.size(), 0.0);
            g.doffset.assign(L.bn_offset.size(), 0.0);
        }
    }
    return g;
}

struct AeGradients {
    std::vector<LayerGrads> encoder, decoder;
};

struct AeForward {
    std::vector<nn::LayerCache> encoder_caches, decoder_caches;
    Batch output;
};

/// Forward through encoder and decoder with per-layer caches. Pure: running
/// statistics in `params` are untouched; commit the cached batch statistics
/// via commit_running_stats after the optimizer step.
inline AeForward ae_forward(const AutoencoderParams& params, const Batch& input,
                            RunMode mode) {
    AeForward f;
    f.encoder_caches.resize(params.encoder_layers.size());
    f.decoder_caches.resize(params.decoder_layers.size());
    Batch x = input;
    for (size_t i = 0; i < params.encoder_layers.size(); ++i)
        x = nn::layer_forward(params.encoder_layers[i], x, mode, &f.encoder_caches[i]);
    for (size_t i = 0; i < params.decoder_layers.size(); ++i)
        x = nn::layer_forward(params.decoder_layers[i], x, mode, &f.decoder_caches[i]);
    f.output = std::move(x);
    return f;
}

namespace detail {

inline void bn_backward(const Batch& conv_out, const nn::BnBatchStats& s,
                        const ConvLayerParams& L, Batch& d, std::vector<double>& dscale,
                        std::vector<double>& doffset) {
    const size_t rows = static_cast<size_t>(d.n) * d.h * d.w;
    const int C = d.c;
    std::vector<double> inv(C), sum_dy(C, 0.0), sum_dy_xhat(C, 0.0);
    for (int c = 0; c < C; ++c) inv[c] = 1.0 / std::sqrt(s.var[c] + nn::kBnEpsilon);
    for (size_t r = 0; r < rows; ++r) {
        const double* x = conv_out.data.data() + r * C;
        const double* dy = d.data.data() + r * C;
        for (int c = 0; c < C; ++c) {
            sum_dy[c] += dy[c];
            sum_dy_xhat[c] += dy[c] * (x[c] - s.mean[c]) * inv[c];
        }
    }
    for (int c = 0; c < C; ++c) {
        dscale[c] += sum_dy_xhat[c];
        doffset[c] += sum_dy[c];
    }
    const double N = static_cast<double>(rows);
    for (size_t r = 0; r < rows; ++r) {
        const double* x = conv_out.data.data() + r * C;
        double* dy = d.data.data() + r * C;
        for (int c = 0; c < C; ++c) {
            const double xhat = (x[c] - s.mean[c]) * inv[c];
            dy[c] = L.bn_scale[c] * inv[c] *
                    (dy[c] - sum_dy[c] / N - xhat * sum_dy_xhat[c] / N);
        }
    }
}

inline Batch layer_backward(const ConvLayerParams& L, const nn::LayerCache& cache,
                            Batch dout, LayerGrads& g) {
    if (!L.has_parameters) return dout;
    if (L.has_activation) {
        for (size_t i = 0; i < dout.data.size(); ++i)
            if (cache.out.data[i] <= 0.0) dout.data[i] = 0.0;
    }
    if (L.has_batchnorm)
        bn_backward(cache.conv_out, cache.bn, L, dout, g.dscale, g.doffset);
    const Batch conv_in = L.upsample_before ? nn::upsample2(cache.in) : cache.in;
    Batch din = nn::conv_backward(conv_in, L, dout, g.dw, g.db);
    if (L.upsample_before) din = nn::upsample2_backward(din, cache.in.h, cache.in.w);
    return din;
}

} // namespace detail

/// Reverse-mode gradients for every parameter given dLoss/dOutput.
inline AeGradients ae_backward(const AutoencoderParams& params, const AeForward& f,
                               const Batch& dout) {
    AeGradients g;
    for (const auto& L : params.encoder_layers) g.encoder.push_back(make_layer_grads(L));
    for (const auto& L : params.decoder_layers) g.decoder.push_back(make_layer_grads(L));
    Batch d = dout;
    for (size_t i = params.decoder_layers.size(); i-- > 0;)
        d = detail::layer_backward(params.decoder_layers[i], f.decoder_caches[i], std::move(d),
                                   g.decoder[i]);
    for (size_t i = params.encoder_layers.size(); i-- > 0;)
        d = detail::layer_backward(params.encoder_layers[i], f.encoder_caches[i], std::move(d),
                                   g.encoder[i]);
    return g;
}

/// Fold cached train-mode batch statistics into the running statistics.
inline void commit_running_stats(AutoencoderParams& params, const AeForward& f,
                                 double decay) {
    for (size_t i = 0; i < params.encoder_layers.size(); ++i)
        if (params.encoder_layers[i].has_batchnorm)
            nn::bn_commit(params.encoder_layers[i], f.encoder_caches[i].bn, decay);
    for (size_t i = 0; i < params.decoder_layers.size(); ++i)
        if (params.decoder_layers[i].has_batchnorm)
            nn::bn_commit(params.decoder_layers[i], f.decoder_caches[i].bn, decay);
}

/// Gradients of the huberized MSE between reconstruction and target for a
/// batch of images. Returns loss and MSE through the out-parameters.
inline AeGradients ae_loss_backward(const AutoencoderParams& params,
                                    const std::vector<Image>& inputs,
                                    const std::vector<Image>& targets, RunMode mode,
                                    double& loss_out, double& mse_out) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw SizeError("ae_loss_backward: batch shape mismatch");
    Batch in(static_cast<int>(inputs.size()), params.input_size, params.input_size, 1);
    Batch tgt = in;
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].height != params.input_size || inputs[i].width != params.input_size)
            throw SizeError("ae_loss_backward: image size mismatch");
        std::copy(inputs[i].data.begin(), inputs[i].data.end(), in.sample(static_cast<int>(i)));
        std::copy(targets[i].data.begin(), targets[i].data.end(), tgt.sample(static_cast<int>(i)));
    }
    AeForward f = ae_forward(params, in, mode);
    const size_t total = f.output.data.size();
    double acc = 0.0;
    for (size_t i = 0; i < total; ++i) {
        const double d = f.output.data[i] - tgt.data[i];
        acc += d * d;
    }
    mse_out = acc / static_cast<double>(total);
    loss_out = huberize(mse_out);
    const double w = huber_weight(mse_out) * 2.0 / static_cast<double>(total);
    Batch dout = f.output;
    for (size_t i = 0; i < total; ++i)
        dout.data[i] = w * (f.output.data[i] - tgt.data[i]);
    return ae_backward(params, f, dout);
}

// ---------------------------------------------------------------------------
// MLP / kernel backward
// ---------------------------------------------------------------------------

struct MlpLayerGrads {
    std::vector<double> dgain, dbias, ddense;
};

struct MlpGrads {
    std::vector<MlpLayerGrads> hidden;
    std::vector<double> doutput;
};

inline MlpGrads make_mlp_grads(const MlpModel& m) {
    MlpGrads g;
    for (const auto& L : m.hidden) {
        MlpLayerGrads lg;
        lg.dgain.assign(L.gain.size(), 0.0);
        lg.dbias.assign(L.bias.size(), 0.0);
        lg.ddense.assign(L.dense.size(), 0.0);
        g.hidden.push_back(std::move(lg));
    }
    g.doutput.assign(m.output_weights.size(), 0.0);
    return g;
}

namespace detail {

/// Forward one window keeping per-layer activations; accumulate gradients
/// for dL/d(output node) = dl.
inline double mlp_window_forward(const MlpModel& m, const double* patch,
                                 std::vector<Vec>& hs) {
    const int n = m.w * m.w;
    hs.clear();
    hs.push_back(Eigen::Map<const Vec>(patch, n));
    for (const auto& L : m.hidden) {
        Vec u = Eigen::Map<const Vec>(L.gain.data(), n).cwiseProduct(hs.back()) +
                Eigen::Map<const Vec>(L.bias.data(), n);
        Vec z = Eigen::Map<const RowMat>(L.dense.data(), n, n) * u;
        hs.push_back(z.unaryExpr([](double v) { return sigmoid(v); }));
    }
    double out = Eigen::Map<const Vec>(m.output_weights.data(), n).dot(hs.back());
    if (m.sigmoid_output) out = sigmoid(out);
    return out;
}

inline void mlp_window_backward(const MlpModel& m, const std::vector<Vec>& hs, double out,
                                double dl, MlpGrads& g) {
    const int n = m.w * m.w;
    if (m.sigmoid_output) dl *= out * (1.0 - out);
    Eigen::Map<Vec>(g.doutput.data(), n) += dl * hs.back();
    Vec dh = dl * Eigen::Map<const Vec>(m.output_weights.data(), n);
    for (size_t l = m.hidden.size(); l-- > 0;) {
        const auto& L = m.hidden[l];
        auto& lg = g.hidden[l];
        const Vec& h = hs[l + 1];      // post-sigmoid output of this layer
        const Vec& hprev = hs[l];      // layer input
        Vec dz = dh.cwiseProduct(h.cwiseProduct(Vec::Ones(n) - h));
        Vec u = Eigen::Map<const Vec>(L.gain.data(), n).cwiseProduct(hprev) +
                Eigen::Map<const Vec>(L.bias.data(), n);
        Eigen::Map<RowMat>(lg.ddense.data(), n, n).noalias() += dz * u.transpose();
        Vec du = Eigen::Map<const RowMat>(L.dense.data(), n, n).transpose() * dz;
        Eigen::Map<Vec>(lg.dgain.data(), n) += du.cwiseProduct(hprev);
        Eigen::Map<Vec>(lg.dbias.data(), n) += du;
        dh = du.cwiseProduct(Eigen::Map<const Vec>(L.gain.data(), n));
    }
}

} // namespace detail

/// MSE over the valid (crop-border) output region of a sliding-window MLP,
/// with gradients for every parameter. `target` must be
/// (H-w+1) x (W-w+1); this matches the masked loss, whose excluded border is
/// exactly the region a valid convolution drops.
inline double mlp_mse_backward(const MlpModel& m, const Image& img, const Image& target,
                               MlpGrads& g) {
    const int w = m.w;
    const int oh = img.height - w + 1;
    const int ow = img.width - w + 1;
    if (oh <= 0 || ow <= 0)
        throw SizeError("mlp_mse_backward: image smaller than input size");
    if (target.height != oh || target.width != ow)
        throw SizeError("mlp_mse_backward: target must match the valid output region");
    std::vector<double> patch(static_cast<size_t>(w) * w);
    std::vector<Vec> hs;
    const double norm = 2.0 / (static_cast<double>(oh) * ow);
    double acc = 0.0;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int ky = 0; ky < w; ++ky)
                for (int kx = 0; kx < w; ++kx)
                    patch[ky * w + kx] = img.at(y + ky, x + kx);
            const double out = detail::mlp_window_forward(m, patch.data(), hs);
            const double r = out - target.at(y, x);
            acc += r * r;
            detail::mlp_window_backward(m, hs, out, norm * r, g);
        }
    }
    return acc / (static_cast<double>(oh) * ow);
}

/// Kernel analogue of mlp_mse_backward.
inline double kernel_mse_backward(const KernelModel& m, const Image& img,
                                  const Image& target, std::vector<double>& dw) {
    const int w = m.w;
    const int oh = img.height - w + 1;
    const int ow = img.width - w + 1;
    if (oh <= 0 || ow <= 0)
        throw SizeError("kernel_mse_backward: image smaller than kernel");
    if (target.height != oh || target.width != ow)
        throw SizeError("kernel_mse_backward: target must match the valid output region");
    if (dw.size() != m.weights.size())
        throw SizeError("kernel_mse_backward: gradient buffer shape mismatch");
    const double norm = 2.0 / (static_cast<double>(oh) * ow);
    double acc = 0.0;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double out = 0.0;
            for (int ky = 0; ky < w; ++ky)
                for (int kx = 0; kx < w; ++kx)
                    out += m.weights[ky * w + kx] * img.at(y + ky, x + kx);
            const double r = out - target.at(y, x);
            acc += r * r;
            const double dl = norm * r;
            for (int ky = 0; ky < w; ++ky)
                for (int kx = 0; kx < w; ++kx)
                    dw[ky * w + kx] += dl * img.at(y + ky, x + kx);
        }
    }
    return acc / (static_cast<double>(oh) * ow);
}

// ---------------------------------------------------------------------------
// Autoencoder training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
    int batch_size = 32;
    int max_iter = 60000;
    double bn_decay = 0.999;
    uint64_t seed = 0;
};

struct TrainResult {
    AutoencoderParams params;
    std::vector<double> mse_curve; // one entry per iteration
};

namespace detail {

struct AeAdam {
    std::vector<AdamState> states;

    void step(AutoencoderParams& p, const AeGradients& g, double lr) {
        size_t idx = 0;
        auto upd = [&](std::vector<double>& a, const std::vector<double>& da) {
            if (states.size() <= idx) states.emplace_back();
            adam_step(a, da, states[idx], lr);
            ++idx;
        };
        auto walk = [&](std::vector<ConvLayerParams>& layers,
                        const std::vector<LayerGrads>& grads) {
            for (size_t i = 0; i < layers.size(); ++i) {
                auto& L = layers[i];
                if (!L.has_parameters) continue;
                upd(L.weights, grads[i].dw);
                upd(L.bias, grads[i].db);
                if (L.has_batchnorm) {
                    upd(L.bn_scale, grads[i].dscale);
                    upd(L.bn_offset, grads[i].doffset);
                }
            }
        };
        walk(p.encoder_layers, g.encoder);
        walk(p.decoder_layers, g.decoder);
    }
};

} // namespace detail

/// Sample a random normalized crop from the dataset. Constant crops fall
/// back to the all-zeros substitution.
inline Image sample_normalized_crop(const std::vector<Image>& dataset, int size, Rng& rng) {
    const Image& src = dataset[dataset.size() == 1 ? 0 : rng.uniform_int(static_cast<int>(dataset.size()))];
    const int top = src.height == size ? 0 : rng.uniform_int(src.height - size + 1);
    const int left = src.width == size ? 0 : rng.uniform_int(src.width - size + 1);
    return normalize(crop(src, top, left, size), /*substitute_degenerate=*/true).first;
}

/// Train an autoencoder to reconstruct normalized random crops of the
/// dataset through its latent bottleneck. Deterministic for a given seed.
inline TrainResult train_autoencoder(const TrainConfig& config, const Schedule& schedule,
                                     const std::vector<Image>& dataset, int latent_depth,
                                     int input_size = 160,
                                     std::array<int, 3> channels = {32, 64, 128}) {
    if (dataset.empty())
        throw ValidationError("train_autoencoder: empty dataset");
    for (const auto& img : dataset)
        if (img.height < input_size || img.width < input_size)
            throw SizeError("train_autoencoder: dataset image " +
                            std::to_string(img.height) + "x" + std::to_string(img.width) +
                            " smaller than crop size " + std::to_string(input_size));
    if (config.batch_size < 1 || config.max_iter < 1 || config.bn_decay <= 0.0 ||
        config.bn_decay >= 1.0)
        throw ValidationError("train_autoencoder: bad config");

    Rng rng(config.seed);
    TrainResult r;
    r.params = make_autoencoder(latent_depth, rng, input_size, channels);
    detail::AeAdam opt;
    r.mse_curve.reserve(config.max_iter);

    Batch in(config.batch_size, input_size, input_size, 1);
    for (int iter = 0; iter < config.max_iter; ++iter) {
        for (int b = 0; b < config.batch_size; ++b) {
            const Image c = sample_normalized_crop(dataset, input_size, rng);
            std::copy(c.data.begin(), c.data.end(), in.sample(b));
        }
        AeForward f = ae_forward(r.params, in, RunMode::Train);
        const size_t total = f.output.data.size();
        double acc = 0.0;
        for (size_t i = 0; i < total; ++i) {
            const double d = f.output.data[i] - in.data[i];
            acc += d * d;
        }
        const double mse = acc / static_cast<double>(total);
        r.mse_curve.push_back(mse);
        const double w = huber_weight(mse) * 2.0 / static_cast<double>(total);
        Batch dout = f.output;
        for (size_t i = 0; i < total; ++i)
            dout.data[i] = w * (f.output.data[i] - in.data[i]);
        AeGradients g = ae_backward(r.params, f, dout);
        opt.step(r.params, g, learning_rate(schedule, iter));
        commit_running_stats(r.params, f, config.bn_decay);
    }
    return r;
}

} // namespace emrc
