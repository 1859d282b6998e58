#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "emrc/errors.hpp"
#include "emrc/models.hpp"
#include "emrc/preprocess.hpp"
#include "emrc/rng.hpp"
#include "emrc/tensor.hpp"
#include "emrc/training.hpp"

namespace emrc {

/// A frozen restoration function: normalized crop in, same-size restoration out.
using Teacher = std::function<Image(const Image&)>;

/// Mean squared difference over the interior region, excluding a border of
/// (w-1)/2 pixels on every side.
inline double masked_mse(const Image& a, const Image& b, int w) {
    if (a.height != b.height || a.width != b.width)
        throw SizeError("masked_mse: shape mismatch");
    const int m = (w - 1) / 2;
    if (a.height <= w - 1 || a.width <= w - 1)
        throw SizeError("masked_mse: image too small for margin " + std::to_string(m));
    double acc = 0.0;
    long n = 0;
    for (int y = m; y < a.height - m; ++y)
        for (int x = m; x < a.width - m; ++x) {
            const double d = a.at(y, x) - b.at(y, x);
            acc += d * d;
            ++n;
        }
    return acc / static_cast<double>(n);
}

namespace detail {
// Mirror with period 2n-2 so arbitrarily large margins fold back in bounds.
inline int reflect_any(int p, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    p = ((p % period) + period) % period;
    return p < n ? p : period - p;
}
} // namespace detail

/// Reflect-extend an image to target_h x target_w with the source centered.
inline Image reflect_extend(const Image& img, int target_h, int target_w) {
    if (target_h < img.height || target_w < img.width)
        throw SizeError("reflect_extend: target smaller than source");
    const int top = (target_h - img.height) / 2;
    const int left = (target_w - img.width) / 2;
    Image out(target_h, target_w);
    for (int y = 0; y < target_h; ++y) {
        const int sy = detail::reflect_any(y - top, img.height);
        for (int x = 0; x < target_w; ++x)
            out.at(y, x) = img.at(sy, detail::reflect_any(x - left, img.width));
    }
    return out;
}

/// Wrap a frozen autoencoder as a Teacher: reflect-extend the crop to the
/// model's input size, restore in infer mode, cut back the central region.
inline Teacher autoencoder_teacher(const AutoencoderParams& params) {
    return [&params](const Image& crop_img) {
        const int s = params.input_size;
        if (crop_img.height > s || crop_img.width > s)
            throw SizeError("autoencoder_teacher: crop larger than model input");
        const Image padded = reflect_extend(crop_img, s, s);
        const Tensor3 latent = autoencoder_encode(params, padded);
        const Image restored = autoencoder_decode(params, latent);
        const int top = (s - crop_img.height) / 2;
        const int left = (s - crop_img.width) / 2;
        Image out(crop_img.height, crop_img.width);
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x)
                out.at(y, x) = restored.at(top + y, left + x);
        return out;
    };
}

/// Draw a random normalized d x d crop and the teacher's restoration of it.
/// Optionally reports the crop coordinates.
inline std::pair<Image, Image> sample_training_pair(const Teacher& teacher,
                                                    const Image& img, int d, Rng& rng,
                                                    int* top_out = nullptr,
                                                    int* left_out = nullptr) {
    if (img.height < d || img.width < d)
        throw SizeError("sample_training_pair: image smaller than crop size " +
                        std::to_string(d));
    const int top = img.height == d ? 0 : rng.uniform_int(img.height - d + 1);
    const int left = img.width == d ? 0 : rng.uniform_int(img.width - d + 1);
    if (top_out) *top_out = top;
    if (left_out) *left_out = left;
    Image c = normalize(crop(img, top, left, d), /*substitute_degenerate=*/true).first;
    Image target = teacher(c);
    if (target.height != c.height || target.width != c.width)
        throw SizeError("sample_training_pair: teacher output shape mismatch");
    return {std::move(c), std::move(target)};
}

struct StudentSpec {
    ModelKind kind = ModelKind::Kernel; // Kernel or Mlp
    int w = 3;
    int hidden_layers = 0; // for MLPs: 1 or 2
};

struct Student {
    StudentSpec spec;
    KernelModel kernel; // populated when spec.kind == Kernel
    MlpModel mlp;       // populated when spec.kind == Mlp
};

struct DistillConfig {
    std::vector<StudentSpec> student_set;
    int crop_size = 0; // 0 -> w_max + 5
    int max_iter = 10000;
    int batch_size = 1; // single crops per iteration
    double eta0 = 0.01;
    uint64_t seed = 0;
};

struct DistillResult {
    std::vector<Student> students;
    std::vector<std::vector<double>> curves; // masked MSE per student, per iteration
    // Crop coordinates each student saw; identical across one set.
    std::vector<std::vector<std::pair<int, int>>> crop_log;
};

namespace detail {

struct StudentOpt {
    std::vector<AdamState> states;
};

} // namespace detail

/// Train a set of kernel/MLP students against a frozen teacher. All students
/// in the set see the same crops in the same order; each student's loss is
/// the masked MSE with its own margin.
inline DistillResult train_students(const DistillConfig& config, const Teacher& teacher,
                                    const std::vector<Image>& dataset) {
    if (config.student_set.empty())
        throw ValidationError("train_students: empty student set");
    if (dataset.empty())
        throw ValidationError("train_students: empty dataset");
    int w_max = 0;
    for (const auto& s : config.student_set) w_max = std::max(w_max, s.w);
    const int d = config.crop_size == 0 ? w_max + 5 : config.crop_size;
    for (const auto& s : config.student_set)
        if (s.w > d - 5)
            throw ValidationError("train_students: student size " + std::to_string(s.w) +
                                  " exceeds crop_size - 5 = " + std::to_string(d - 5));
    if (config.max_iter < 1 || config.batch_size < 1)
        throw ValidationError("train_students: bad config");

    Rng rng(config.seed);
    DistillResult r;
    for (const auto& spec : config.student_set) {
        Student s;
        s.spec = spec;
        if (spec.kind == ModelKind::Kernel)
            s.kernel = make_kernel(spec.w, rng);
        else if (spec.kind == ModelKind::Mlp)
            s.mlp = make_mlp(spec.w, spec.hidden_layers, rng);
        else
            throw ValidationError("train_students: students must be kernels or MLPs");
        r.students.push_back(std::move(s));
    }
    r.curves.assign(r.students.size(), {});
    r.crop_log.assign(r.students.size(), {});

    const Schedule schedule{config.eta0, config.max_iter, 1};
    std::vector<detail::StudentOpt> opts(r.students.size());

    for (int iter = 0; iter < config.max_iter; ++iter) {
        const double lr = learning_rate(schedule, iter);
        std::vector<std::pair<Image, Image>> pairs;
        std::vector<std::pair<int, int>> coords;
        for (int b = 0; b < config.batch_size; ++b) {
            const Image& src =
                dataset[dataset.size() == 1 ? 0 : rng.uniform_int(static_cast<int>(dataset.size()))];
            int top = 0, left = 0;
            pairs.push_back(sample_training_pair(teacher, src, d, rng, &top, &left));
            coords.emplace_back(top, left);
        }
        for (size_t si = 0; si < r.students.size(); ++si) {
            Student& s = r.students[si];
            const int m = (s.spec.w - 1) / 2;
            double mse_sum = 0.0;
            if (s.spec.kind == ModelKind::Kernel) {
                std::vector<double> dw(s.kernel.weights.size(), 0.0);
                for (const auto& [c, t] : pairs)
                    mse_sum += kernel_mse_backward(s.kernel, c, crop(t, m, m, d - 2 * m), dw);
                if (config.batch_size > 1)
                    for (double& v : dw) v /= config.batch_size;
                if (opts[si].states.empty()) opts[si].states.emplace_back();
                adam_step(s.kernel.weights, dw, opts[si].states[0], lr);
            } else {
                MlpGrads g = make_mlp_grads(s.mlp);
                for (const auto& [c, t] : pairs)
                    mse_sum += mlp_mse_backward(s.mlp, c, crop(t, m, m, d - 2 * m), g);
                if (config.batch_size > 1) {
                    const double inv = 1.0 / config.batch_size;
                    for (auto& lg : g.hidden) {
                        for (double& v : lg.dgain) v *= inv;
                        for (double& v : lg.dbias) v *= inv;
                        for (double& v : lg.ddense) v *= inv;
                    }
                    for (double& v : g.doutput) v *= inv;
                }
                auto& st = opts[si].states;
                if (st.empty()) st.resize(3 * s.mlp.hidden.size() + 1);
                size_t k = 0;
                for (size_t l = 0; l < s.mlp.hidden.size(); ++l) {
                    adam_step(s.mlp.hidden[l].gain, g.hidden[l].dgain, st[k++], lr);
                    adam_step(s.mlp.hidden[l].bias, g.hidden[l].dbias, st[k++], lr);
                    adam_step(s.mlp.hidden[l].dense, g.hidden[l].ddense, st[k++], lr);
                }
                adam_step(s.mlp.output_weights, g.doutput, st[k++], lr);
            }
            r.curves[si].push_back(mse_sum / config.batch_size);
            for (const auto& cc : coords) r.crop_log[si].push_back(cc);
        }
    }
    return r;
}

} // namespace emrc
