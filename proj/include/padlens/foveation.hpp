#ifndef PADLENS_FOVEATION_HPP
#define PADLENS_FOVEATION_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "padlens/convarith.hpp"
#include "padlens/engine.hpp"
#include "padlens/netspec.hpp"
#include "padlens/padding.hpp"
#include "padlens/tensor.hpp"

namespace padlens {

/// Per-input-pixel count of input-to-output convolutional paths. Counts
/// are exact integers below 2^53 whenever every layer uses
/// count-preserving arithmetic; partial-convolution and distribution
/// padding weight the counts and produce real values.
struct FoveationMap {
    int height = 0;
    int width = 0;
    std::vector<double> counts;

    FoveationMap() = default;
    FoveationMap(int h, int w) : height(h), width(w) {
        counts.assign(static_cast<std::size_t>(h) * w, 0.0);
    }

    double& at(int y, int x) { return counts[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const {
        return counts[static_cast<std::size_t>(y) * width + x];
    }
};

inline FeatureMap to_feature_map(const FoveationMap& fmap) {
    FeatureMap m(fmap.height, fmap.width, 1);
    m.data = fmap.counts;
    return m;
}

/// True when every count is an integer still inside the exact double
/// range.
inline bool exact_integer_counts(const FoveationMap& fmap) {
    for (double v : fmap.counts) {
        if (v >= 9007199254740992.0 || std::floor(v) != v) return false;
    }
    return true;
}

struct UniformityStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double relative_spread = 0.0;  // (max - min) / mean
};

inline UniformityStats uniformity_stats(const FoveationMap& fmap) {
    UniformityStats s;
    if (fmap.counts.empty()) return s;
    s.min = fmap.counts[0];
    s.max = fmap.counts[0];
    double sum = 0.0;
    for (double v : fmap.counts) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sum += v;
    }
    s.mean = sum / static_cast<double>(fmap.counts.size());
    s.relative_spread = s.mean != 0.0 ? (s.max - s.min) / s.mean : 0.0;
    return s;
}

namespace detail {

struct CreditGrid {
    int h = 0, w = 0;
    std::vector<double> v;
    CreditGrid() = default;
    CreditGrid(int h_, int w_, double fill = 0.0) : h(h_), w(w_) {
        v.assign(static_cast<std::size_t>(h) * w, fill);
    }
    double& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
};

inline void add_into(CreditGrid& dst, const CreditGrid& src) {
    for (std::size_t k = 0; k < dst.v.size(); ++k) dst.v[k] += src.v[k];
}

}  // namespace detail

/// Path counts by one backward sweep: ones over the final feature map,
/// then per layer the adjoint of (pad, then window) — a transposed
/// all-ones convolution scattering credit into padded coordinates, and
/// a pad adjoint scattering padded-cell credit onto its source pixels.
/// Max-pool windows count every membership; add_from junctions feed
/// credit into both branches. ReLU is identity and biases are ignored;
/// channels are collapsed to one (per-pixel counts are
/// channel-independent up to a constant factor).
inline FoveationMap foveation_map(const NetworkSpec& spec, Extent2D input,
                                  std::optional<PadMode> padding_override = {}) {
    const NetworkSpec net =
        padding_override ? with_padding_override(spec, *padding_override) : spec;
    const ShapeTrace trace = check_even_padding(net, input).trace;
    const std::size_t n_layers = net.layers.size();

    std::vector<detail::CreditGrid> credit(n_layers);
    for (std::size_t i = 0; i < n_layers; ++i) {
        credit[i] = detail::CreditGrid(trace[i + 1].h, trace[i + 1].w);
    }
    detail::CreditGrid input_credit(trace[0].h, trace[0].w);
    for (double& v : credit[n_layers - 1].v) v = 1.0;

    auto sink = [&](std::ptrdiff_t i) -> detail::CreditGrid& {
        return i < 0 ? input_credit : credit[i];
    };

    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(n_layers) - 1; i >= 0; --i) {
        const LayerSpec& l = net.layers[i];
        detail::CreditGrid& cred = credit[i];
        const Extent2D in = trace[i];
        const Extent2D out = trace[i + 1];

        if (l.kind == LayerKind::relu) {
            detail::add_into(sink(i - 1), cred);
            continue;
        }
        if (l.kind == LayerKind::add_from) {
            detail::add_into(sink(i - 1), cred);
            detail::add_into(credit[l.add_source], cred);
            continue;
        }

        const PadAmounts a = resolve_amounts(l, in.h, in.w);
        const bool partial = l.padding.mode == PadMode::partial_conv;
        std::vector<int> vh, vw;
        const int full = l.kernel_h * l.kernel_w;
        if (partial) {
            vh = detail::in_image_tap_counts(out.h, l.stride_h, l.kernel_h,
                                             l.dilation_h, a.top, in.h);
            vw = detail::in_image_tap_counts(out.w, l.stride_w, l.kernel_w,
                                             l.dilation_w, a.left, in.w);
        }

        detail::CreditGrid padded(in.h + a.total_h(), in.w + a.total_w());
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                double c = cred.at(oy, ox);
                if (c == 0.0) continue;
                if (partial) {
                    c *= detail::partial_scale(full, vh[oy] * vw[ox]);
                }
                for (int ti = 0; ti < l.kernel_h; ++ti) {
                    for (int tj = 0; tj < l.kernel_w; ++tj) {
                        padded.at(oy * l.stride_h + ti * l.dilation_h,
                                  ox * l.stride_w + tj * l.dilation_w) += c;
                    }
                }
            }
        }

        const PadSourceMap sm = pad_sources(in.h, in.w, l.padding.mode, a);
        detail::CreditGrid& dst = sink(i - 1);
        for (int py = 0; py < sm.padded_h; ++py) {
            for (int px = 0; px < sm.padded_w; ++px) {
                const double c = padded.at(py, px);
                if (c == 0.0) continue;
                for (const PadSource& s : sm.at(py, px)) {
                    dst.at(s.y, s.x) += s.weight == 1.0 ? c : c * s.weight;
                }
            }
        }
    }

    FoveationMap fmap(input.h, input.w);
    fmap.counts = std::move(input_credit.v);
    return fmap;
}

/// Single-channel all-ones counting network: pools become all-ones
/// convolutions with the pool geometry (window-membership counting),
/// everything else keeps its position so add_from indices stay valid.
inline NetworkSpec counting_network(const NetworkSpec& spec) {
    NetworkSpec cnet;
    cnet.name = spec.name + "_counting";
    cnet.input_channels = 1;
    for (const auto& l : spec.layers) {
        LayerSpec cl = l;
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::depthwise_conv:
            case LayerKind::maxpool:
                cl.kind = LayerKind::conv;
                cl.in_channels = 1;
                cl.out_channels = 1;
                break;
            case LayerKind::relu:
            case LayerKind::add_from:
                break;
        }
        cnet.layers.push_back(cl);
    }
    cnet.validate();
    return cnet;
}

/// Brute-force oracle: forward one one-hot input per pixel through the
/// all-ones, zero-bias counting network and sum the final map. All
/// activations stay nonnegative, so the ReLU layers are numerically
/// identity and need no special treatment.
inline FoveationMap oracle_foveation(const NetworkSpec& spec, Extent2D input,
                                     std::optional<PadMode> padding_override = {}) {
    const NetworkSpec net =
        padding_override ? with_padding_override(spec, *padding_override) : spec;
    const NetworkSpec cnet = counting_network(net);

    WeightSet ones;
    for (std::size_t i = 0; i < cnet.layers.size(); ++i) {
        if (!cnet.layers[i].has_weights()) continue;
        const LayerSpec& l = cnet.layers[i];
        KernelSet ks(1, 1, l.kernel_h, l.kernel_w, 1.0);
        ones.layers.emplace(static_cast<int>(i), std::move(ks));
    }

    FoveationMap fmap(input.h, input.w);
    for (int py = 0; py < input.h; ++py) {
        for (int px = 0; px < input.w; ++px) {
            FeatureMap onehot(input.h, input.w, 1);
            onehot.at(0, py, px) = 1.0;
            const FeatureMap last =
                forward(cnet, ones, onehot, Record::last).front();
            double total = 0.0;
            for (double v : last.data) total += v;
            fmap.at(py, px) = total;
        }
    }
    return fmap;
}

}  // namespace padlens

#endif
