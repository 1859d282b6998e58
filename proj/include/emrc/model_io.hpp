#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "emrc/errors.hpp"
#include "emrc/models.hpp"
#include "emrc/published.hpp"

namespace emrc {

// Model container ("EMNN"): magic | version u16 | kind u8 | modality u8 |
// config: u32 (w or latent depth) + u32 (hidden layer count; input size for
// autoencoders) | tensor count u32 | per tensor: name length u16, UTF-8
// name, rank u8, dims u32 each, f32 little-endian data.

struct NamedTensor {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<float> data;
};

struct ModelContainer {
    ModelKind kind = ModelKind::Kernel;
    Modality modality = Modality::TEM_STEM;
    uint32_t size_or_depth = 0; // w for kernels/MLPs, latent depth for autoencoders
    uint32_t aux = 0;           // hidden layers for MLPs, input size for autoencoders
    std::vector<NamedTensor> tensors;

    const NamedTensor& find(const std::string& name) const {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw ParseError("model container missing tensor \"" + name + "\"");
    }
    bool has(const std::string& name) const {
        for (const auto& t : tensors)
            if (t.name == name) return true;
        return false;
    }
};

namespace detail {

inline void put_u16m(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v & 0xff));
    b.push_back(static_cast<uint8_t>(v >> 8));
}
inline void put_u32m(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

struct ModelReader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;
    void need(size_t n) const {
        if (pos + n > buf.size())
            throw ParseError("model container truncated at byte " + std::to_string(pos));
    }
    uint8_t u8() { need(1); return buf[pos++]; }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(buf[pos] | (buf[pos + 1] << 8));
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
};

inline std::vector<float> to_f32(const std::vector<double>& v) {
    std::vector<float> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
}

inline std::vector<double> to_f64(const std::vector<float>& v) {
    return {v.begin(), v.end()};
}

} // namespace detail

inline std::vector<uint8_t> serialize_model(const ModelContainer& c) {
    using namespace detail;
    std::vector<uint8_t> b;
    b.insert(b.end(), {'E', 'M', 'N', 'N'});
    put_u16m(b, 1);
    b.push_back(static_cast<uint8_t>(c.kind));
    b.push_back(static_cast<uint8_t>(c.modality));
    put_u32m(b, c.size_or_depth);
    put_u32m(b, c.aux);
    put_u32m(b, static_cast<uint32_t>(c.tensors.size()));
    for (const auto& t : c.tensors) {
        put_u16m(b, static_cast<uint16_t>(t.name.size()));
        b.insert(b.end(), t.name.begin(), t.name.end());
        b.push_back(static_cast<uint8_t>(t.dims.size()));
        size_t count = 1;
        for (uint32_t d : t.dims) {
            put_u32m(b, d);
            count *= d;
        }
        if (count != t.data.size())
            throw ValidationError("serialize_model: tensor \"" + t.name +
                                  "\" dims do not match data length");
        for (float v : t.data) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32m(b, bits);
        }
    }
    return b;
}

inline ModelContainer deserialize_model(const std::vector<uint8_t>& bytes) {
    detail::ModelReader r{bytes};
    r.need(4);
    if (!(bytes[0] == 'E' && bytes[1] == 'M' && bytes[2] == 'N' && bytes[3] == 'N'))
        throw ParseError("bad magic: expected \"EMNN\"");
    r.pos = 4;
    const uint16_t version = r.u16();
    if (version != 1)
        throw ParseError("unsupported model container version " + std::to_string(version));
    ModelContainer c;
    const uint8_t kind = r.u8();
    if (kind > 2) throw ParseError("bad model kind byte " + std::to_string(kind));
    c.kind = static_cast<ModelKind>(kind);
    const uint8_t modality = r.u8();
    if (modality > 2) throw ParseError("bad modality byte " + std::to_string(modality));
    c.modality = static_cast<Modality>(modality);
    c.size_or_depth = r.u32();
    c.aux = r.u32();
    const uint32_t n_tensors = r.u32();
    for (uint32_t i = 0; i < n_tensors; ++i) {
        NamedTensor t;
        const uint16_t name_len = r.u16();
        r.need(name_len);
        t.name.assign(reinterpret_cast<const char*>(bytes.data() + r.pos), name_len);
        r.pos += name_len;
        const uint8_t rank = r.u8();
        size_t count = 1;
        for (uint8_t d = 0; d < rank; ++d) {
            t.dims.push_back(r.u32());
            count *= t.dims.back();
        }
        t.data.resize(count);
        for (size_t j = 0; j < count; ++j) {
            const uint32_t bits = r.u32();
            float v;
            std::memcpy(&v, &bits, 4);
            t.data[j] = v;
        }
        c.tensors.push_back(std::move(t));
    }
    if (r.pos != bytes.size()) throw ParseError("trailing bytes after the last tensor");
    return c;
}

inline void save_model(const std::string& path, const ModelContainer& c) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const auto bytes = serialize_model(c);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline ModelContainer load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

inline ModelContainer to_container(const KernelModel& k, Modality modality) {
    ModelContainer c;
    c.kind = ModelKind::Kernel;
    c.modality = modality;
    c.size_or_depth = static_cast<uint32_t>(k.w);
    c.aux = 0;
    c.tensors.push_back({"weights",
                         {static_cast<uint32_t>(k.w), static_cast<uint32_t>(k.w)},
                         detail::to_f32(k.weights)});
    return c;
}

inline KernelModel kernel_from_container(const ModelContainer& c) {
    if (c.kind != ModelKind::Kernel)
        throw ValidationError("container does not hold a kernel");
    KernelModel k;
    k.w = static_cast<int>(c.size_or_depth);
    const auto& t = c.find("weights");
    if (t.dims != std::vector<uint32_t>{c.size_or_depth, c.size_or_depth})
        throw ParseError("kernel weights dims do not match declared size");
    k.weights = detail::to_f64(t.data);
    return k;
}

inline ModelContainer to_container(const MlpModel& m, Modality modality) {
    ModelContainer c;
    c.kind = ModelKind::Mlp;
    c.modality = modality;
    c.size_or_depth = static_cast<uint32_t>(m.w);
    c.aux = static_cast<uint32_t>(m.hidden.size());
    const uint32_t n = static_cast<uint32_t>(m.w * m.w);
    for (size_t l = 0; l < m.hidden.size(); ++l) {
        const std::string p = "hidden" + std::to_string(l) + ".";
        c.tensors.push_back({p + "gain", {n}, detail::to_f32(m.hidden[l].gain)});
        c.tensors.push_back({p + "bias", {n}, detail::to_f32(m.hidden[l].bias)});
        c.tensors.push_back({p + "dense", {n, n}, detail::to_f32(m.hidden[l].dense)});
    }
    c.tensors.push_back({"output.weights", {n}, detail::to_f32(m.output_weights)});
    return c;
}

inline MlpModel mlp_from_container(const ModelContainer& c) {
    if (c.kind != ModelKind::Mlp)
        throw ValidationError("container does not hold an MLP");
    MlpModel m;
    m.w = static_cast<int>(c.size_or_depth);
    const uint32_t n = c.size_or_depth * c.size_or_depth;
    for (uint32_t l = 0; l < c.aux; ++l) {
        const std::string p = "hidden" + std::to_string(l) + ".";
        MlpHiddenLayer L;
        L.gain = detail::to_f64(c.find(p + "gain").data);
        L.bias = detail::to_f64(c.find(p + "bias").data);
        L.dense = detail::to_f64(c.find(p + "dense").data);
        if (L.gain.size() != n || L.bias.size() != n || L.dense.size() != size_t(n) * n)
            throw ParseError("MLP tensor sizes do not match declared input size");
        m.hidden.push_back(std::move(L));
    }
    m.output_weights = detail::to_f64(c.find("output.weights").data);
    if (m.output_weights.size() != n)
        throw ParseError("MLP output weights size mismatch");
    return m;
}

namespace detail {

inline void push_layer_tensors(ModelContainer& c, const std::string& prefix,
                               const ConvLayerParams& L) {
    const uint32_t k = static_cast<uint32_t>(L.kernel);
    c.tensors.push_back({prefix + ".weights",
                         {k, k, static_cast<uint32_t>(L.in_ch), static_cast<uint32_t>(L.out_ch)},
                         to_f32(L.weights)});
    c.tensors.push_back({prefix + ".bias", {static_cast<uint32_t>(L.out_ch)}, to_f32(L.bias)});
    if (L.has_batchnorm) {
        const uint32_t oc = static_cast<uint32_t>(L.out_ch);
        c.tensors.push_back({prefix + ".bn_scale", {oc}, to_f32(L.bn_scale)});
        c.tensors.push_back({prefix + ".bn_offset", {oc}, to_f32(L.bn_offset)});
        c.tensors.push_back({prefix + ".bn_run_mean", {oc}, to_f32(L.bn_run_mean)});
        c.tensors.push_back({prefix + ".bn_run_var", {oc}, to_f32(L.bn_run_var)});
    }
}

inline void load_layer_tensors(const ModelContainer& c, const std::string& prefix,
                               ConvLayerParams& L) {
    const auto& w = c.find(prefix + ".weights");
    if (w.dims.size() != 4 || w.dims[0] != static_cast<uint32_t>(L.kernel) ||
        w.dims[2] != static_cast<uint32_t>(L.in_ch) ||
        w.dims[3] != static_cast<uint32_t>(L.out_ch))
        throw ParseError("autoencoder layer \"" + prefix + "\" has unexpected weight dims");
    L.weights = to_f64(w.data);
    L.bias = to_f64(c.find(prefix + ".bias").data);
    if (L.has_batchnorm) {
        L.bn_scale = to_f64(c.find(prefix + ".bn_scale").data);
        L.bn_offset = to_f64(c.find(prefix + ".bn_offset").data);
        L.bn_run_mean = to_f64(c.find(prefix + ".bn_run_mean").data);
        L.bn_run_var = to_f64(c.find(prefix + ".bn_run_var").data);
    }
}

} // namespace detail

inline ModelContainer to_container(const AutoencoderParams& p) {
    ModelContainer c;
    c.kind = ModelKind::Autoencoder;
    c.modality = p.modality;
    c.size_or_depth = static_cast<uint32_t>(p.latent_depth);
    c.aux = static_cast<uint32_t>(p.input_size);
    std::vector<float> bn_flags;
    for (size_t i = 0; i < p.encoder_layers.size(); ++i) {
        detail::push_layer_tensors(c, "enc" + std::to_string(i), p.encoder_layers[i]);
        if (p.encoder_layers[i].has_batchnorm)
            bn_flags.push_back(p.encoder_layers[i].bn_initialized ? 1.0f : 0.0f);
    }
    for (size_t i = 0; i < p.decoder_layers.size(); ++i) {
        if (!p.decoder_layers[i].has_parameters) continue;
        detail::push_layer_tensors(c, "dec" + std::to_string(i), p.decoder_layers[i]);
        if (p.decoder_layers[i].has_batchnorm)
            bn_flags.push_back(p.decoder_layers[i].bn_initialized ? 1.0f : 0.0f);
    }
    c.tensors.push_back({"bn_initialized", {static_cast<uint32_t>(bn_flags.size())}, bn_flags});
    return c;
}

inline AutoencoderParams autoencoder_from_container(const ModelContainer& c) {
    if (c.kind != ModelKind::Autoencoder)
        throw ValidationError("container does not hold an autoencoder");
    const int latent_depth = static_cast<int>(c.size_or_depth);
    const int input_size = static_cast<int>(c.aux);
    // Channel plan recovered from the first encoder layer onwards.
    const auto& w0 = c.find("enc0.weights");
    const auto& w1 = c.find("enc1.weights");
    const auto& w2 = c.find("enc2.weights");
    if (w0.dims.size() != 4 || w1.dims.size() != 4 || w2.dims.size() != 4)
        throw ParseError("autoencoder container has malformed encoder weights");
    std::array<int, 3> channels = {static_cast<int>(w0.dims[3]),
                                   static_cast<int>(w1.dims[3]),
                                   static_cast<int>(w2.dims[3])};
    Rng dummy(0);
    AutoencoderParams p = make_autoencoder(latent_depth, dummy, input_size, channels,
                                           c.modality);
    size_t bn_idx = 0;
    const auto& flags = c.find("bn_initialized");
    auto next_flag = [&]() {
        if (bn_idx >= flags.data.size())
            throw ParseError("bn_initialized flag count mismatch");
        return flags.data[bn_idx++] != 0.0f;
    };
    for (size_t i = 0; i < p.encoder_layers.size(); ++i) {
        detail::load_layer_tensors(c, "enc" + std::to_string(i), p.encoder_layers[i]);
        if (p.encoder_layers[i].has_batchnorm)
            p.encoder_layers[i].bn_initialized = next_flag();
    }
    for (size_t i = 0; i < p.decoder_layers.size(); ++i) {
        if (!p.decoder_layers[i].has_parameters) continue;
        detail::load_layer_tensors(c, "dec" + std::to_string(i), p.decoder_layers[i]);
        if (p.decoder_layers[i].has_batchnorm)
            p.decoder_layers[i].bn_initialized = next_flag();
    }
    return p;
}

} // namespace emrc
