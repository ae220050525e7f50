#ifndef PADLENS_CONVARITH_HPP
#define PADLENS_CONVARITH_HPP

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "padlens/netspec.hpp"
#include "padlens/padding.hpp"

namespace padlens {

struct Extent2D {
    int h = 0;
    int w = 0;
    bool operator==(const Extent2D&) const = default;
};

/// Spatial extents per layer, trace[0] being the network input.
using ShapeTrace = std::vector<Extent2D>;

namespace detail {

/// SAME total for one dimension of a (possibly strided) layer:
/// max(0, s * (ceil(n / s) - 1) + eff_k - n).
inline int same_total(int n, int stride, int eff_kernel) {
    const int out = (n + stride - 1) / stride;
    return std::max(0, stride * (out - 1) + eff_kernel - n);
}

}  // namespace detail

/// Concrete per-side amounts for a layer applied to an input extent.
/// "same" splits odd totals with the extra pixel on the bottom/right.
inline PadAmounts resolve_amounts(const LayerSpec& layer, int in_h, int in_w) {
    switch (layer.padding.mode) {
        case PadMode::valid:
            return PadAmounts{};
        case PadMode::full_zero: {
            const int ph = layer.effective_kernel_h() - 1;
            const int pw = layer.effective_kernel_w() - 1;
            return PadAmounts{ph, ph, pw, pw};
        }
        default:
            break;
    }
    if (!layer.padding.same) return layer.padding.amounts;
    const int th = detail::same_total(in_h, layer.stride_h, layer.effective_kernel_h());
    const int tw = detail::same_total(in_w, layer.stride_w, layer.effective_kernel_w());
    return PadAmounts{th / 2, th - th / 2, tw / 2, tw - tw / 2};
}

/// floor((n + pad - eff_k) / s) + 1 for one dimension.
inline int output_extent(int in, int pad_total, int eff_kernel, int stride) {
    const int padded = in + pad_total;
    if (padded < eff_kernel) return 0;
    return (padded - eff_kernel) / stride + 1;
}

inline Extent2D output_shape(const LayerSpec& layer, Extent2D in) {
    if (!layer.has_geometry()) return in;
    const PadAmounts a = resolve_amounts(layer, in.h, in.w);
    Extent2D out;
    out.h = output_extent(in.h, a.total_h(), layer.effective_kernel_h(), layer.stride_h);
    out.w = output_extent(in.w, a.total_w(), layer.effective_kernel_w(), layer.stride_w);
    if (out.h < 1 || out.w < 1) {
        std::ostringstream os;
        os << "output shape collapses to " << out.h << "x" << out.w << " for "
           << in.h << "x" << in.w << " input (k=" << layer.kernel_h << "x"
           << layer.kernel_w << ", s=" << layer.stride_h << "x" << layer.stride_w
           << ")";
        throw std::invalid_argument(os.str());
    }
    return out;
}

/// Extent of the padded input actually processed by the kernel windows:
/// s * (out - 1) + (d * (k - 1) + 1).
inline int consumed_extent(int out_extent, int stride, int kernel, int dilation = 1) {
    if (out_extent < 1) throw std::invalid_argument("consumed_extent: out_extent < 1");
    return stride * (out_extent - 1) + dilation * (kernel - 1) + 1;
}

/// Evenness record for one downsampling layer; both dimensions are
/// tracked independently.
struct LayerBalance {
    int layer_index = 0;
    LayerKind kind = LayerKind::conv;
    Extent2D in, out;
    int padded_h = 0, padded_w = 0;      // extent after padding
    int consumed_h = 0, consumed_w = 0;  // extent covered by kernel windows
    int unconsumed_h = 0, unconsumed_w = 0;
    PadAmounts applied;
    int consumed_top = 0, consumed_bottom = 0, consumed_left = 0, consumed_right = 0;
    bool even_h = false, even_w = false;
    bool eroding_h = false, eroding_w = false;  // original rows/cols dropped

    bool even() const { return even_h && even_w; }
    bool eroding() const { return eroding_h || eroding_w; }
};

struct EvenPaddingAudit {
    std::string network;
    Extent2D input;
    std::vector<LayerBalance> layers;  // downsampling layers only
    ShapeTrace trace;                  // every layer, input first
    bool all_even = true;
};

/// Walk the network, recording shapes everywhere and a consumed-extent
/// balance record at each downsampling layer. Padding-free downsampling
/// that drops rows/columns is reported as erosion.
inline EvenPaddingAudit check_even_padding(const NetworkSpec& spec, Extent2D input) {
    if (input.h < 1 || input.w < 1) {
        throw std::invalid_argument("input extents must be >= 1");
    }
    EvenPaddingAudit audit;
    audit.network = spec.name;
    audit.input = input;
    audit.trace.push_back(input);

    Extent2D cur = input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (l.kind == LayerKind::add_from) {
            const Extent2D src = audit.trace[l.add_source + 1];
            if (!(src == cur)) {
                std::ostringstream os;
                os << "layer " << i << ": add_from source shape " << src.h << "x"
                   << src.w << " does not match current " << cur.h << "x" << cur.w;
                throw std::invalid_argument(os.str());
            }
            audit.trace.push_back(cur);
            continue;
        }
        if (!l.has_geometry()) {
            audit.trace.push_back(cur);
            continue;
        }

        const PadAmounts a = resolve_amounts(l, cur.h, cur.w);
        Extent2D out;
        try {
            out = output_shape(l, cur);
        } catch (const std::invalid_argument& e) {
            std::ostringstream os;
            os << "layer " << i << ": " << e.what();
            throw std::invalid_argument(os.str());
        }

        if (l.downsampling()) {
            LayerBalance b;
            b.layer_index = static_cast<int>(i);
            b.kind = l.kind;
            b.in = cur;
            b.out = out;
            b.applied = a;
            b.padded_h = cur.h + a.total_h();
            b.padded_w = cur.w + a.total_w();
            b.consumed_h = consumed_extent(out.h, l.stride_h, l.kernel_h, l.dilation_h);
            b.consumed_w = consumed_extent(out.w, l.stride_w, l.kernel_w, l.dilation_w);
            b.unconsumed_h = b.padded_h - b.consumed_h;
            b.unconsumed_w = b.padded_w - b.consumed_w;
            b.consumed_top = std::min(a.top, b.consumed_h);
            b.consumed_bottom = std::clamp(b.consumed_h - (a.top + cur.h), 0, a.bottom);
            b.consumed_left = std::min(a.left, b.consumed_w);
            b.consumed_right = std::clamp(b.consumed_w - (a.left + cur.w), 0, a.right);
            b.even_h = b.unconsumed_h == 0 && a.top == a.bottom;
            b.even_w = b.unconsumed_w == 0 && a.left == a.right;
            b.eroding_h = b.unconsumed_h > a.bottom;
            b.eroding_w = b.unconsumed_w > a.right;
            audit.all_even = audit.all_even && b.even();
            audit.layers.push_back(b);
        }
        cur = out;
        audit.trace.push_back(cur);
    }
    return audit;
}

/// Square input sizes in [lo, hi] that keep every downsampling layer
/// even. Sizes whose trace collapses are skipped.
inline std::vector<int> admissible_sizes(const NetworkSpec& spec, int lo, int hi) {
    if (lo > hi) return {};
    std::vector<int> sizes;
    for (int s = std::max(1, lo); s <= hi; ++s) {
        try {
            if (check_even_padding(spec, Extent2D{s, s}).all_even) sizes.push_back(s);
        } catch (const std::invalid_argument&) {
        }
    }
    return sizes;
}

struct SizeSuggestion {
    int desired = 0;
    int nearest_le = -1;  // admissible size <= desired, -1 if none found
    int nearest_ge = -1;  // admissible size >= desired, -1 if none found

    bool admissible() const { return nearest_le == desired || nearest_ge == desired; }
    /// Growing is achievable by constant-padding the input.
    int pad_to() const { return nearest_ge; }
};

/// Nearest admissible sizes around a desired extent, searched outward
/// up to `search_limit` pixels away.
inline SizeSuggestion suggest_size(const NetworkSpec& spec, int desired,
                                   int search_limit = 4096) {
    SizeSuggestion s;
    s.desired = desired;
    auto ok = [&](int n) {
        if (n < 1) return false;
        try {
            return check_even_padding(spec, Extent2D{n, n}).all_even;
        } catch (const std::invalid_argument&) {
            return false;
        }
    };
    for (int d = 0; d <= search_limit; ++d) {
        if (s.nearest_le < 0 && ok(desired - d)) s.nearest_le = desired - d;
        if (s.nearest_ge < 0 && ok(desired + d)) s.nearest_ge = desired + d;
        if (s.nearest_le >= 0 && s.nearest_ge >= 0) break;
    }
    return s;
}

/// Receptive-field extent (not radius) of each layer's output cells on
/// the network input, via the usual extent/jump recurrence.
inline std::vector<int> receptive_field_extents(const NetworkSpec& spec) {
    std::vector<int> extents;
    long long extent = 1, jump = 1;
    for (const auto& l : spec.layers) {
        if (l.has_geometry()) {
            extent += static_cast<long long>(l.effective_kernel_h() - 1) * jump;
            jump *= l.stride_h;
        }
        extents.push_back(static_cast<int>(std::min<long long>(extent, 1 << 28)));
    }
    return extents;
}

inline nlohmann::json audit_to_json(const EvenPaddingAudit& audit) {
    nlohmann::json j;
    j["network"] = audit.network;
    j["input"] = {audit.input.h, audit.input.w};
    j["all_even"] = audit.all_even;
    j["downsampling_layers"] = nlohmann::json::array();
    for (const auto& b : audit.layers) {
        nlohmann::json e;
        e["layer"] = b.layer_index;
        e["kind"] = kind_name(b.kind);
        e["in"] = {b.in.h, b.in.w};
        e["out"] = {b.out.h, b.out.w};
        e["padded"] = {b.padded_h, b.padded_w};
        e["consumed"] = {b.consumed_h, b.consumed_w};
        e["unconsumed"] = {b.unconsumed_h, b.unconsumed_w};
        e["pad"] = {b.applied.top, b.applied.bottom, b.applied.left, b.applied.right};
        e["pad_consumed"] = {b.consumed_top, b.consumed_bottom, b.consumed_left,
                             b.consumed_right};
        e["even_h"] = b.even_h;
        e["even_w"] = b.even_w;
        e["eroding_h"] = b.eroding_h;
        e["eroding_w"] = b.eroding_w;
        j["downsampling_layers"].push_back(e);
    }
    j["shape_trace"] = nlohmann::json::array();
    for (const auto& s : audit.trace) j["shape_trace"].push_back({s.h, s.w});
    return j;
}

}  // namespace padlens

#endif
