// emrc: batch restoration and compression tool for electron micrographs.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "emrc/codec.hpp"
#include "emrc/distill.hpp"
#include "emrc/errors.hpp"
#include "emrc/metrics.hpp"
#include "emrc/model_io.hpp"
#include "emrc/models.hpp"
#include "emrc/noise.hpp"
#include "emrc/pgm.hpp"
#include "emrc/published.hpp"
#include "emrc/training.hpp"

namespace {

using namespace emrc;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Image load_image(const std::string& path, int width, int height) {
    if (ends_with(path, ".pgm")) return read_pgm(path);
    if (width <= 0 || height <= 0)
        throw ValidationError("raw f32 input needs --width and --height: " + path);
    return read_raw_f32(path, width, height);
}

void save_image(const std::string& path, const Image& img) {
    if (ends_with(path, ".pgm"))
        write_pgm16(path, img);
    else
        write_raw_f32(path, img);
}

Modality parse_modality(const std::string& s) {
    if (s == "tem") return Modality::TEM;
    if (s == "stem") return Modality::STEM;
    if (s == "temstem" || s == "tem+stem") return Modality::TEM_STEM;
    throw ValidationError("unknown modality \"" + s + "\" (tem, stem, temstem)");
}

// Short names for the published kernels: {tem|stem|temstem}-k{3|5|7|11}.
bool parse_kernel_short_name(const std::string& name, ModelContainer& out) {
    const auto dash = name.find("-k");
    if (dash == std::string::npos) return false;
    Modality m;
    try {
        m = parse_modality(name.substr(0, dash));
    } catch (const ValidationError&) {
        return false;
    }
    int size;
    try {
        size = std::stoi(name.substr(dash + 2));
    } catch (const std::exception&) {
        return false;
    }
    out = to_container(kernel_from_published(get_kernel(m, size)), m);
    return true;
}

ModelContainer load_model_or_short_name(const std::string& spec) {
    ModelContainer c;
    if (parse_kernel_short_name(spec, c)) return c;
    return load_model(spec);
}

// Restoration function for any model kind. Keeps the decoded parameters
// alive inside the closure.
Teacher restorer_from_container(const ModelContainer& c, Border border) {
    switch (c.kind) {
        case ModelKind::Kernel: {
            auto k = std::make_shared<KernelModel>(kernel_from_container(c));
            return [k, border](const Image& img) { return kernel_apply(*k, img, border); };
        }
        case ModelKind::Mlp: {
            auto m = std::make_shared<MlpModel>(mlp_from_container(c));
            return [m, border](const Image& img) { return mlp_denoise(*m, img, border); };
        }
        case ModelKind::Autoencoder: {
            auto p = std::make_shared<AutoencoderParams>(autoencoder_from_container(c));
            return [p](const Image& img) { return decompress(*p, compress(*p, img)); };
        }
    }
    throw ValidationError("bad model kind");
}

std::vector<Image> load_dataset(const std::string& dir, const std::string& noise,
                                uint64_t seed) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && ends_with(e.path().string(), ".pgm"))
            paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("no .pgm images in " + dir);
    std::vector<Image> images;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (const auto& p : paths) {
        Image img = read_pgm(p);
        if (noise == "poisson-gaussian") {
            // Synthetic-data extension: rescale to [0,1], corrupt, keep scale.
            double mx = 1.0;
            for (double v : img.data) mx = std::max(mx, v);
            for (double& v : img.data) v /= mx;
            img = add_poisson_gaussian(img, 100.0, 0.02, rng);
            for (double& v : img.data) v *= mx;
        }
        images.push_back(std::move(img));
    }
    return images;
}

std::vector<StudentSpec> parse_students(const std::string& spec) {
    std::vector<StudentSpec> out;
    size_t start = 0;
    while (start < spec.size()) {
        size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        const std::string tok = spec.substr(start, comma - start);
        start = comma + 1;
        if (tok.empty()) continue;
        StudentSpec s;
        try {
            if (tok[0] == 'k') {
                s.kind = ModelKind::Kernel;
                s.w = std::stoi(tok.substr(1));
            } else if (tok.rfind("mlp", 0) == 0) {
                const auto h = tok.find('h');
                if (h == std::string::npos) throw std::invalid_argument(tok);
                s.kind = ModelKind::Mlp;
                s.w = std::stoi(tok.substr(3, h - 3));
                s.hidden_layers = std::stoi(tok.substr(h + 1));
            } else {
                throw std::invalid_argument(tok);
            }
        } catch (const std::exception&) {
            throw ValidationError("bad student spec \"" + tok +
                                  "\" (use k<w> or mlp<w>h<layers>)");
        }
        out.push_back(s);
    }
    if (out.empty()) throw ValidationError("empty student list");
    return out;
}

std::string student_name(const StudentSpec& s) {
    if (s.kind == ModelKind::Kernel) return "k" + std::to_string(s.w);
    return "mlp" + std::to_string(s.w) + "h" + std::to_string(s.hidden_layers);
}

int run(int argc, char** argv) {
    CLI::App app{"Electron micrograph restoration and compression"};
    app.require_subcommand(1);

    std::string in_path, out_path, model_path, border_str = "reflect";
    std::string modality_str = "temstem", noise = "none", curve_path, students_str;
    std::string teacher_path;
    int width = 0, height = 0, iters = 0, batch = 0, latent_depth = 16;
    int window = 500, tail = 500, size = 3, step_every = 5000, crop_size = 0;
    uint64_t seed = 0;
    double eta0 = 0.01;

    auto* denoise = app.add_subcommand("denoise", "Restore an image with a kernel/MLP/autoencoder");
    denoise->add_option("--model", model_path, "model container or short name (e.g. tem-k3)")->required();
    denoise->add_option("--in", in_path)->required();
    denoise->add_option("--out", out_path)->required();
    denoise->add_option("--border", border_str, "reflect|crop");
    denoise->add_option("--width", width);
    denoise->add_option("--height", height);
    denoise->add_option("--seed", seed);

    auto* train_ae = app.add_subcommand("train-autoencoder", "Train an autoencoder on a directory of images");
    train_ae->add_option("--in", in_path, "directory of .pgm images")->required();
    train_ae->add_option("--out", out_path, "output model container")->required();
    train_ae->add_option("--latent-depth", latent_depth);
    train_ae->add_option("--iters", iters)->required();
    train_ae->add_option("--batch", batch);
    train_ae->add_option("--seed", seed);
    train_ae->add_option("--eta0", eta0);
    train_ae->add_option("--step-every", step_every);
    train_ae->add_option("--curve", curve_path, "write the MSE learning curve CSV here");
    train_ae->add_option("--noise", noise, "none|poisson-gaussian (synthetic-data extension)");
    train_ae->add_option("--modality", modality_str);

    auto* distill_cmd = app.add_subcommand("distill", "Train kernel/MLP students against a frozen teacher");
    distill_cmd->add_option("--in", in_path, "directory of .pgm images")->required();
    distill_cmd->add_option("--teacher", teacher_path, "teacher model container")->required();
    distill_cmd->add_option("--students", students_str, "e.g. k3,k5,mlp5h1")->required();
    distill_cmd->add_option("--out", out_path, "output prefix for student containers")->required();
    distill_cmd->add_option("--iters", iters);
    distill_cmd->add_option("--seed", seed);
    distill_cmd->add_option("--eta0", eta0);
    distill_cmd->add_option("--crop-size", crop_size, "0 = w_max + 5");
    distill_cmd->add_option("--curve", curve_path, "output prefix for learning-curve CSVs");
    distill_cmd->add_option("--modality", modality_str);
    distill_cmd->add_option("--noise", noise);

    auto* compress_cmd = app.add_subcommand("compress", "Encode an image to a latent container");
    compress_cmd->add_option("--model", model_path)->required();
    compress_cmd->add_option("--in", in_path)->required();
    compress_cmd->add_option("--out", out_path)->required();
    compress_cmd->add_option("--width", width);
    compress_cmd->add_option("--height", height);
    compress_cmd->add_option("--seed", seed);

    auto* decompress_cmd = app.add_subcommand("decompress", "Decode a latent container to an image");
    decompress_cmd->add_option("--model", model_path)->required();
    decompress_cmd->add_option("--in", in_path)->required();
    decompress_cmd->add_option("--out", out_path)->required();
    decompress_cmd->add_option("--seed", seed);

    auto* kernels_cmd = app.add_subcommand("kernels", "Export a published kernel to a model container");
    kernels_cmd->add_option("--modality", modality_str)->required();
    kernels_cmd->add_option("--size", size)->required();
    kernels_cmd->add_option("--out", out_path)->required();

    auto* curves_cmd = app.add_subcommand("curves", "Moving average and tail statistics of a curve file");
    curves_cmd->add_option("--in", in_path)->required();
    curves_cmd->add_option("--window", window);
    curves_cmd->add_option("--tail", tail);
    curves_cmd->add_option("--out", out_path, "write the moving-average CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors exit 2, --help exits 0
    }

    if (denoise->parsed()) {
        const Border border = border_str == "crop" ? Border::Crop : Border::Reflect;
        if (border_str != "crop" && border_str != "reflect")
            throw ValidationError("--border must be reflect or crop");
        const ModelContainer c = load_model_or_short_name(model_path);
        const Image img = load_image(in_path, width, height);
        save_image(out_path, restorer_from_container(c, border)(img));
    } else if (train_ae->parsed()) {
        const auto dataset = load_dataset(in_path, noise, seed);
        TrainConfig config;
        config.max_iter = iters;
        if (batch > 0) config.batch_size = batch;
        config.seed = seed;
        const Schedule schedule{eta0, iters, std::min(step_every, iters)};
        TrainResult r = train_autoencoder(config, schedule, dataset, latent_depth);
        r.params.modality = parse_modality(modality_str);
        save_model(out_path, to_container(r.params));
        if (!curve_path.empty()) write_curve(curve_path, r.mse_curve);
        const auto [mean, sd] = tail_stats(r.mse_curve, std::min<int>(500, iters));
        std::printf("final mse mean %.6f std %.6f over last %d iterations\n", mean, sd,
                    std::min<int>(500, iters));
    } else if (distill_cmd->parsed()) {
        const auto dataset = load_dataset(in_path, noise, seed);
        const ModelContainer tc = load_model_or_short_name(teacher_path);
        const Teacher teacher = restorer_from_container(tc, Border::Reflect);
        DistillConfig config;
        config.student_set = parse_students(students_str);
        config.crop_size = crop_size;
        config.max_iter = iters > 0 ? iters : 10000;
        config.eta0 = eta0;
        config.seed = seed;
        DistillResult r = train_students(config, teacher, dataset);
        const Modality m = parse_modality(modality_str);
        for (size_t i = 0; i < r.students.size(); ++i) {
            const auto& s = r.students[i];
            const std::string name = student_name(s.spec);
            const ModelContainer out = s.spec.kind == ModelKind::Kernel
                                           ? to_container(s.kernel, m)
                                           : to_container(s.mlp, m);
            save_model(out_path + name + ".emnn", out);
            if (!curve_path.empty()) write_curve(curve_path + name + ".csv", r.curves[i]);
            const auto [mean, sd] =
                tail_stats(r.curves[i], std::min<int>(500, config.max_iter));
            std::printf("%s: final masked mse mean %.6f std %.6f\n", name.c_str(), mean, sd);
        }
    } else if (compress_cmd->parsed()) {
        const AutoencoderParams p = autoencoder_from_container(load_model(model_path));
        const Image img = load_image(in_path, width, height);
        write_container(out_path, compress(p, img));
    } else if (decompress_cmd->parsed()) {
        const AutoencoderParams p = autoencoder_from_container(load_model(model_path));
        save_image(out_path, decompress(p, read_container(in_path)));
    } else if (kernels_cmd->parsed()) {
        const Modality m = parse_modality(modality_str);
        save_model(out_path, to_container(kernel_from_published(get_kernel(m, size)), m));
    } else if (curves_cmd->parsed()) {
        const auto series = read_curve(in_path);
        if (!out_path.empty()) write_curve(out_path, moving_average(series, window));
        const auto [mean, sd] = tail_stats(series, std::min<size_t>(tail, series.size()));
        std::printf("tail %d: mean %.9f std %.9f\n",
                    static_cast<int>(std::min<size_t>(tail, series.size())), mean, sd);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const emrc::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 3;
    } catch (const emrc::ParseError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 4;
    } catch (const emrc::DegenerateInputError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
