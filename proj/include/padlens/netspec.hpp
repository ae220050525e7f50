#ifndef PADLENS_NETSPEC_HPP
#define PADLENS_NETSPEC_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "padlens/padding.hpp"
#include "padlens/tensor.hpp"

namespace padlens {

enum class LayerKind { conv, depthwise_conv, maxpool, relu, add_from };

inline const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::depthwise_conv: return "depthwise_conv";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::relu: return "relu";
        case LayerKind::add_from: return "add_from";
    }
    return "?";
}

struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    int kernel_h = 1, kernel_w = 1;
    int stride_h = 1, stride_w = 1;
    int dilation_h = 1, dilation_w = 1;
    PaddingSpec padding;
    int in_channels = 0, out_channels = 0;
    int add_source = -1;  // layer index, add_from only

    bool operator==(const LayerSpec&) const = default;

    bool has_geometry() const {
        return kind == LayerKind::conv || kind == LayerKind::depthwise_conv ||
               kind == LayerKind::maxpool;
    }
    bool has_weights() const {
        return kind == LayerKind::conv || kind == LayerKind::depthwise_conv;
    }
    /// Downsampling = stride > 1 in either dimension.
    bool downsampling() const {
        return has_geometry() && (stride_h > 1 || stride_w > 1);
    }
    int effective_kernel_h() const { return dilation_h * (kernel_h - 1) + 1; }
    int effective_kernel_w() const { return dilation_w * (kernel_w - 1) + 1; }

    static LayerSpec conv2d(int in, int out, int k, int s, PaddingSpec pad) {
        LayerSpec l;
        l.kind = LayerKind::conv;
        l.kernel_h = l.kernel_w = k;
        l.stride_h = l.stride_w = s;
        l.padding = pad;
        l.in_channels = in;
        l.out_channels = out;
        return l;
    }
    static LayerSpec depthwise(int ch, int k, int s, PaddingSpec pad) {
        LayerSpec l = conv2d(ch, ch, k, s, pad);
        l.kind = LayerKind::depthwise_conv;
        return l;
    }
    static LayerSpec pool(int k, int s, PaddingSpec pad = PaddingSpec::valid_pad()) {
        LayerSpec l;
        l.kind = LayerKind::maxpool;
        l.kernel_h = l.kernel_w = k;
        l.stride_h = l.stride_w = s;
        l.padding = pad;
        return l;
    }
    static LayerSpec relu() {
        LayerSpec l;
        l.kind = LayerKind::relu;
        return l;
    }
    static LayerSpec add(int source_index) {
        LayerSpec l;
        l.kind = LayerKind::add_from;
        l.add_source = source_index;
        return l;
    }
};

namespace detail {
[[noreturn]] inline void layer_error(std::size_t index, const std::string& what) {
    std::ostringstream os;
    os << "layer " << index << ": " << what;
    throw std::invalid_argument(os.str());
}
}  // namespace detail

struct NetworkSpec {
    std::string name;
    int input_channels = 0;
    std::vector<LayerSpec> layers;

    bool operator==(const NetworkSpec&) const = default;

    /// Enforces the structural invariants and fills derived channel
    /// counts on geometry-free layers. Throws with the offending layer
    /// index on violation.
    void validate() {
        if (input_channels < 1) {
            throw std::invalid_argument("input_channels must be >= 1");
        }
        if (layers.empty()) {
            throw std::invalid_argument("network needs at least one layer");
        }
        int cur = input_channels;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            LayerSpec& l = layers[i];
            if (l.has_geometry()) {
                if (l.kernel_h < 1 || l.kernel_w < 1 || l.stride_h < 1 ||
                    l.stride_w < 1 || l.dilation_h < 1 || l.dilation_w < 1) {
                    detail::layer_error(i, "kernel/stride/dilation must be >= 1");
                }
            }
            switch (l.kind) {
                case LayerKind::conv:
                    if (l.in_channels != cur) {
                        std::ostringstream os;
                        os << "channel mismatch: expects " << l.in_channels
                           << " input channels but gets " << cur;
                        detail::layer_error(i, os.str());
                    }
                    if (l.out_channels < 1) detail::layer_error(i, "out_channels must be >= 1");
                    cur = l.out_channels;
                    break;
                case LayerKind::depthwise_conv:
                    if (l.in_channels == 0 && l.out_channels == 0) {
                        l.in_channels = l.out_channels = cur;
                    }
                    if (l.out_channels != l.in_channels) {
                        detail::layer_error(i, "depthwise_conv requires out_channels = in_channels");
                    }
                    if (l.in_channels != cur) {
                        std::ostringstream os;
                        os << "channel mismatch: expects " << l.in_channels
                           << " input channels but gets " << cur;
                        detail::layer_error(i, os.str());
                    }
                    break;
                case LayerKind::maxpool:
                case LayerKind::relu:
                    l.in_channels = l.out_channels = cur;
                    break;
                case LayerKind::add_from: {
                    if (l.add_source < 0 || static_cast<std::size_t>(l.add_source) >= i) {
                        detail::layer_error(i, "add_from must reference a strictly earlier layer");
                    }
                    const int src_ch = layers[l.add_source].out_channels;
                    if (src_ch != cur) {
                        std::ostringstream os;
                        os << "add_from source layer " << l.add_source << " has "
                           << src_ch << " channels, current is " << cur;
                        detail::layer_error(i, os.str());
                    }
                    l.in_channels = l.out_channels = cur;
                    break;
                }
            }
        }
    }

    std::size_t downsampling_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.downsampling() ? 1 : 0;
        return n;
    }
};

// ---------------------------------------------------------------------------
// JSON config format
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<int, int> parse_hw(const nlohmann::json& j, std::size_t idx,
                                    const char* field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
        !j[1].is_number_integer()) {
        layer_error(idx, std::string(field) + " must be an [h, w] integer pair");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

inline PaddingSpec parse_padding(const nlohmann::json& j, std::size_t idx) {
    if (!j.is_object() || !j.contains("mode")) {
        layer_error(idx, "pad must be an object with a \"mode\"");
    }
    PaddingSpec p;
    try {
        p.mode = parse_mode(j.at("mode").get<std::string>());
    } catch (const std::exception& e) {
        layer_error(idx, e.what());
    }
    if (p.mode == PadMode::valid) return PaddingSpec::valid_pad();
    if (!j.contains("amount")) layer_error(idx, "pad needs an \"amount\"");
    const auto& am = j.at("amount");
    if (am.is_string()) {
        if (am.get<std::string>() != "same") {
            layer_error(idx, "pad amount must be \"same\" or [top,bottom,left,right]");
        }
        p.same = true;
        return p;
    }
    if (!am.is_array() || am.size() != 4) {
        layer_error(idx, "pad amount must be \"same\" or [top,bottom,left,right]");
    }
    p.amounts = PadAmounts{am[0].get<int>(), am[1].get<int>(), am[2].get<int>(),
                           am[3].get<int>()};
    return p;
}

}  // namespace detail

inline NetworkSpec parse_network(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object() || !root.contains("layers") || !root["layers"].is_array()) {
        throw std::invalid_argument("config must be an object with a \"layers\" array");
    }
    NetworkSpec spec;
    spec.name = root.value("name", std::string{});
    if (!root.contains("input_channels") || !root["input_channels"].is_number_integer()) {
        throw std::invalid_argument("config needs integer \"input_channels\"");
    }
    spec.input_channels = root["input_channels"].get<int>();

    const auto& jlayers = root["layers"];
    for (std::size_t i = 0; i < jlayers.size(); ++i) {
        const auto& jl = jlayers[i];
        if (!jl.is_object() || !jl.contains("kind")) {
            detail::layer_error(i, "each layer needs a \"kind\"");
        }
        const std::string kind = jl["kind"].get<std::string>();
        LayerSpec l;
        if (kind == "conv") l.kind = LayerKind::conv;
        else if (kind == "depthwise_conv") l.kind = LayerKind::depthwise_conv;
        else if (kind == "maxpool") l.kind = LayerKind::maxpool;
        else if (kind == "relu") l.kind = LayerKind::relu;
        else if (kind == "add_from") l.kind = LayerKind::add_from;
        else detail::layer_error(i, "unknown layer kind \"" + kind + "\"");

        if (l.kind == LayerKind::add_from) {
            if (!jl.contains("add_from") || !jl["add_from"].is_number_integer()) {
                detail::layer_error(i, "add_from layer needs an integer \"add_from\" index");
            }
            l.add_source = jl["add_from"].get<int>();
        }
        if (l.has_geometry()) {
            if (!jl.contains("k")) detail::layer_error(i, "missing kernel \"k\"");
            std::tie(l.kernel_h, l.kernel_w) = detail::parse_hw(jl["k"], i, "k");
            if (jl.contains("s")) {
                std::tie(l.stride_h, l.stride_w) = detail::parse_hw(jl["s"], i, "s");
            }
            if (jl.contains("d")) {
                std::tie(l.dilation_h, l.dilation_w) = detail::parse_hw(jl["d"], i, "d");
            }
            if (jl.contains("pad")) l.padding = detail::parse_padding(jl["pad"], i);
        }
        if (l.kind == LayerKind::conv) {
            if (!jl.contains("in") || !jl.contains("out")) {
                detail::layer_error(i, "conv layer needs \"in\" and \"out\" channel counts");
            }
            l.in_channels = jl["in"].get<int>();
            l.out_channels = jl["out"].get<int>();
        } else if (l.kind == LayerKind::depthwise_conv) {
            if (jl.contains("out")) l.out_channels = jl["out"].get<int>();
            if (jl.contains("in")) l.in_channels = jl["in"].get<int>();
            if (l.in_channels == 0) l.in_channels = l.out_channels;
            if (l.out_channels == 0) l.out_channels = l.in_channels;
        }
        spec.layers.push_back(l);
    }
    spec.validate();
    return spec;
}

inline std::string serialize_network(const NetworkSpec& spec) {
    nlohmann::ordered_json root;
    root["name"] = spec.name;
    root["input_channels"] = spec.input_channels;
    root["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : spec.layers) {
        nlohmann::ordered_json jl;
        jl["kind"] = kind_name(l.kind);
        if (l.has_geometry()) {
            jl["k"] = {l.kernel_h, l.kernel_w};
            jl["s"] = {l.stride_h, l.stride_w};
            jl["d"] = {l.dilation_h, l.dilation_w};
            nlohmann::ordered_json jp;
            jp["mode"] = mode_name(l.padding.mode);
            if (l.padding.mode != PadMode::valid) {
                if (l.padding.same) {
                    jp["amount"] = "same";
                } else {
                    jp["amount"] = {l.padding.amounts.top, l.padding.amounts.bottom,
                                    l.padding.amounts.left, l.padding.amounts.right};
                }
            }
            jl["pad"] = jp;
        }
        if (l.kind == LayerKind::conv || l.kind == LayerKind::depthwise_conv) {
            jl["in"] = l.in_channels;
            jl["out"] = l.out_channels;
        }
        if (l.kind == LayerKind::add_from) jl["add_from"] = l.add_source;
        root["layers"].push_back(jl);
    }
    return root.dump(2) + "\n";
}

inline NetworkSpec load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open network config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

// ---------------------------------------------------------------------------
// Built-in presets
// ---------------------------------------------------------------------------

namespace detail {

inline NetworkSpec vgg_preset(const std::string& name,
                              const std::vector<int>& convs_per_block) {
    const int block_channels[5] = {64, 128, 256, 512, 512};
    NetworkSpec spec;
    spec.name = name;
    spec.input_channels = 3;
    int cur = 3;
    for (std::size_t b = 0; b < convs_per_block.size(); ++b) {
        for (int c = 0; c < convs_per_block[b]; ++c) {
            spec.layers.push_back(LayerSpec::conv2d(
                cur, block_channels[b], 3, 1,
                PaddingSpec::explicit_pad(PadMode::zero, 1)));
            cur = block_channels[b];
            spec.layers.push_back(LayerSpec::relu());
        }
        spec.layers.push_back(LayerSpec::pool(2, 2));
    }
    spec.validate();
    return spec;
}

/// Shared ResNet skeleton spine: 7x7 stride-2 stem, 3x3 stride-2 pool,
/// then one residual block per stage. Channel widths differ between the
/// 18- and 50-style skeletons; the downsampling arithmetic is identical.
inline NetworkSpec resnet_skeleton(const std::string& name, bool bottleneck) {
    NetworkSpec spec;
    spec.name = name;
    spec.input_channels = 3;
    auto p1 = PaddingSpec::explicit_pad(PadMode::zero, 1);

    spec.layers.push_back(LayerSpec::conv2d(3, 64, 7, 2,
                                            PaddingSpec::explicit_pad(PadMode::zero, 3)));
    spec.layers.push_back(LayerSpec::relu());
    spec.layers.push_back(LayerSpec::pool(3, 2, p1));

    auto block = [&](int ch) {
        const int entry = static_cast<int>(spec.layers.size()) - 1;
        if (bottleneck) {
            spec.layers.push_back(LayerSpec::conv2d(ch, ch, 1, 1, PaddingSpec::valid_pad()));
            spec.layers.push_back(LayerSpec::relu());
            spec.layers.push_back(LayerSpec::conv2d(ch, ch, 3, 1, p1));
            spec.layers.push_back(LayerSpec::relu());
            spec.layers.push_back(LayerSpec::conv2d(ch, ch, 1, 1, PaddingSpec::valid_pad()));
        } else {
            spec.layers.push_back(LayerSpec::conv2d(ch, ch, 3, 1, p1));
            spec.layers.push_back(LayerSpec::relu());
            spec.layers.push_back(LayerSpec::conv2d(ch, ch, 3, 1, p1));
        }
        spec.layers.push_back(LayerSpec::add(entry));
        spec.layers.push_back(LayerSpec::relu());
    };

    block(64);
    for (int ch : {128, 256, 512}) {
        spec.layers.push_back(LayerSpec::conv2d(ch / 2, ch, 3, 2, p1));
        spec.layers.push_back(LayerSpec::relu());
        block(ch);
    }
    spec.validate();
    return spec;
}

inline NetworkSpec mobilenet_v1_skeleton() {
    NetworkSpec spec;
    spec.name = "mobilenetv1_skeleton";
    spec.input_channels = 3;
    auto p1 = PaddingSpec::explicit_pad(PadMode::zero, 1);

    auto relu = [&] { spec.layers.push_back(LayerSpec::relu()); };
    auto dw = [&](int ch, int s) {
        spec.layers.push_back(LayerSpec::depthwise(ch, 3, s, p1));
        relu();
    };
    auto pw = [&](int in, int out) {
        spec.layers.push_back(LayerSpec::conv2d(in, out, 1, 1, PaddingSpec::valid_pad()));
        relu();
    };

    spec.layers.push_back(LayerSpec::conv2d(3, 32, 3, 2, p1));
    relu();
    dw(32, 1);  pw(32, 64);
    dw(64, 2);  pw(64, 128);
    dw(128, 1); pw(128, 128);
    dw(128, 2); pw(128, 256);
    dw(256, 1); pw(256, 256);
    dw(256, 2); pw(256, 512);
    for (int i = 0; i < 5; ++i) { dw(512, 1); pw(512, 512); }
    dw(512, 2); pw(512, 1024);
    dw(1024, 1); pw(1024, 1024);
    spec.validate();
    return spec;
}

}  // namespace detail

inline NetworkSpec preset(const std::string& name) {
    if (name == "vgg16") return detail::vgg_preset("vgg16", {2, 2, 3, 3, 3});
    if (name == "vgg19") return detail::vgg_preset("vgg19", {2, 2, 4, 4, 4});
    if (name == "resnet18_skeleton") return detail::resnet_skeleton(name, false);
    if (name == "resnet50_skeleton") return detail::resnet_skeleton(name, true);
    if (name == "mobilenetv1_skeleton") return detail::mobilenet_v1_skeleton();
    throw std::invalid_argument("unknown preset \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// Weight sets and the PADW1 file format
// ---------------------------------------------------------------------------

/// Per-layer kernels, keyed by position in NetworkSpec::layers.
struct WeightSet {
    std::map<int, KernelSet> layers;

    const KernelSet& at(int layer_index) const {
        auto it = layers.find(layer_index);
        if (it == layers.end()) {
            std::ostringstream os;
            os << "no weights for layer " << layer_index;
            throw std::out_of_range(os.str());
        }
        return it->second;
    }
};

/// Expected kernel shape for a weighted layer.
inline KernelSet kernel_shape_for(const LayerSpec& l) {
    if (l.kind == LayerKind::depthwise_conv) {
        return KernelSet(l.out_channels, 1, l.kernel_h, l.kernel_w);
    }
    return KernelSet(l.out_channels, l.in_channels, l.kernel_h, l.kernel_w);
}

struct WeightDistribution {
    enum class Kind { uniform, constant };
    Kind kind = Kind::uniform;
    double param = 0.1;

    /// Weights uniform on (-a, a), biases uniform on [0, a).
    static WeightDistribution uniform(double a = 0.1) {
        return WeightDistribution{Kind::uniform, a};
    }
    static WeightDistribution constant(double c) {
        return WeightDistribution{Kind::constant, c};
    }
};

namespace detail {
/// Uniform double in [0, 1) from the top 53 bits; keeps weight streams
/// identical across standard libraries.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace detail

inline WeightSet random_weights(const NetworkSpec& spec, std::uint64_t seed,
                                WeightDistribution dist = WeightDistribution::uniform()) {
    std::mt19937_64 rng(seed);
    WeightSet ws;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (!l.has_weights()) continue;
        KernelSet ks = kernel_shape_for(l);
        if (dist.kind == WeightDistribution::Kind::constant) {
            for (double& w : ks.weights) w = dist.param;
            for (double& b : ks.biases) b = dist.param;
        } else {
            for (double& w : ks.weights) {
                w = (2.0 * detail::next_unit(rng) - 1.0) * dist.param;
            }
            for (double& b : ks.biases) b = detail::next_unit(rng) * dist.param;
        }
        ws.layers.emplace(static_cast<int>(i), std::move(ks));
    }
    return ws;
}

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    put_u64_le(out, bits);
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline double get_f64_le(const unsigned char* p) {
    const std::uint64_t bits = get_u64_le(p);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

}  // namespace detail

inline constexpr char kPadwMagic[5] = {'P', 'A', 'D', 'W', '1'};

inline std::string encode_weights(const WeightSet& ws) {
    nlohmann::json manifest;
    manifest["layers"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [idx, ks] : ws.layers) {
        nlohmann::json e;
        e["layer_index"] = idx;
        e["out"] = ks.out_channels;
        e["in"] = ks.in_channels;
        e["kh"] = ks.kernel_h;
        e["kw"] = ks.kernel_w;
        e["weight_offset"] = offset;
        offset += 8 * ks.weights.size();
        e["bias_offset"] = offset;
        offset += 8 * ks.biases.size();
        manifest["layers"].push_back(e);
    }
    const std::string mtext = manifest.dump();

    std::string out;
    out.append(kPadwMagic, 5);
    detail::put_u64_le(out, mtext.size());
    out += mtext;
    for (const auto& [idx, ks] : ws.layers) {
        (void)idx;
        for (double w : ks.weights) detail::put_f64_le(out, w);
        for (double b : ks.biases) detail::put_f64_le(out, b);
    }
    return out;
}

inline WeightSet decode_weights(const std::string& bytes,
                                const NetworkSpec* spec = nullptr) {
    if (bytes.size() < 13 || std::memcmp(bytes.data(), kPadwMagic, 5) != 0) {
        throw std::invalid_argument("PADW: bad magic");
    }
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t mlen = detail::get_u64_le(raw + 5);
    if (13 + mlen > bytes.size()) {
        throw std::invalid_argument("PADW: manifest length exceeds file size");
    }
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.substr(13, mlen));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("PADW: bad manifest: ") + e.what());
    }
    const std::size_t blob_start = 13 + mlen;
    const std::size_t blob_size = bytes.size() - blob_start;

    WeightSet ws;
    std::uint64_t expected = 0;
    for (const auto& e : manifest.at("layers")) {
        const int idx = e.at("layer_index").get<int>();
        KernelSet ks(e.at("out").get<int>(), e.at("in").get<int>(),
                     e.at("kh").get<int>(), e.at("kw").get<int>());
        const std::uint64_t woff = e.at("weight_offset").get<std::uint64_t>();
        const std::uint64_t boff = e.at("bias_offset").get<std::uint64_t>();
        const std::uint64_t wbytes = 8 * ks.weights.size();
        const std::uint64_t bbytes = 8 * ks.biases.size();
        if (woff + wbytes > blob_size || boff + bbytes > blob_size) {
            throw std::invalid_argument("PADW: blob length mismatch");
        }
        expected += wbytes + bbytes;
        for (std::size_t k = 0; k < ks.weights.size(); ++k) {
            ks.weights[k] = detail::get_f64_le(raw + blob_start + woff + 8 * k);
        }
        for (std::size_t k = 0; k < ks.biases.size(); ++k) {
            ks.biases[k] = detail::get_f64_le(raw + blob_start + boff + 8 * k);
        }
        ws.layers.emplace(idx, std::move(ks));
    }
    if (expected != blob_size) {
        throw std::invalid_argument("PADW: blob length mismatch");
    }

    if (spec) {
        for (const auto& [idx, ks] : ws.layers) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= spec->layers.size() ||
                !spec->layers[idx].has_weights()) {
                std::ostringstream os;
                os << "PADW: layer " << idx << " is not a weighted layer of " << spec->name;
                throw std::invalid_argument(os.str());
            }
            const KernelSet want = kernel_shape_for(spec->layers[idx]);
            if (want.out_channels != ks.out_channels || want.in_channels != ks.in_channels ||
                want.kernel_h != ks.kernel_h || want.kernel_w != ks.kernel_w) {
                std::ostringstream os;
                os << "PADW: layer " << idx << " shape mismatch: file has "
                   << ks.out_channels << "x" << ks.in_channels << "x" << ks.kernel_h
                   << "x" << ks.kernel_w << ", spec wants " << want.out_channels << "x"
                   << want.in_channels << "x" << want.kernel_h << "x" << want.kernel_w;
                throw std::invalid_argument(os.str());
            }
        }
        for (std::size_t i = 0; i < spec->layers.size(); ++i) {
            if (spec->layers[i].has_weights() && !ws.layers.count(static_cast<int>(i))) {
                std::ostringstream os;
                os << "PADW: missing weights for layer " << i;
                throw std::invalid_argument(os.str());
            }
        }
    }
    return ws;
}

inline void save_weights(const WeightSet& ws, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write weight file: " + path);
    const std::string bytes = encode_weights(ws);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

inline WeightSet load_weights(const std::string& path,
                              const NetworkSpec* spec = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open weight file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_weights(buf.str(), spec);
}

}  // namespace padlens

#endif
