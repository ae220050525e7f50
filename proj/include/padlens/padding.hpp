#ifndef PADLENS_PADDING_HPP
#define PADLENS_PADDING_HPP

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "padlens/tensor.hpp"

namespace padlens {

enum class PadMode {
    valid,
    zero,
    full_zero,
    circular,
    mirror_symmetric,
    mirror_reflect,
    replicate,
    partial_conv,
    distribution,
};

/// Config-file names for the modes.
inline const char* mode_name(PadMode m) {
    switch (m) {
        case PadMode::valid: return "valid";
        case PadMode::zero: return "zero";
        case PadMode::full_zero: return "full";
        case PadMode::circular: return "circular";
        case PadMode::mirror_symmetric: return "symmetric";
        case PadMode::mirror_reflect: return "reflect";
        case PadMode::replicate: return "replicate";
        case PadMode::partial_conv: return "partialconv";
        case PadMode::distribution: return "distribution";
    }
    return "?";
}

inline PadMode parse_mode(const std::string& name) {
    if (name == "valid") return PadMode::valid;
    if (name == "zero") return PadMode::zero;
    if (name == "full") return PadMode::full_zero;
    if (name == "circular") return PadMode::circular;
    if (name == "symmetric") return PadMode::mirror_symmetric;
    if (name == "reflect") return PadMode::mirror_reflect;
    if (name == "replicate") return PadMode::replicate;
    if (name == "partialconv") return PadMode::partial_conv;
    if (name == "distribution") return PadMode::distribution;
    throw std::invalid_argument("unknown padding mode \"" + name + "\"");
}

/// Per-side padding amounts in pixels.
struct PadAmounts {
    int top = 0;
    int bottom = 0;
    int left = 0;
    int right = 0;

    bool operator==(const PadAmounts&) const = default;
    bool all_zero() const { return top == 0 && bottom == 0 && left == 0 && right == 0; }
    int total_h() const { return top + bottom; }
    int total_w() const { return left + right; }
};

/// Padding as it appears on a layer: a mode plus either explicit amounts
/// or "same" (resolved against the layer geometry, see convarith).
struct PaddingSpec {
    PadMode mode = PadMode::valid;
    bool same = false;
    PadAmounts amounts;

    bool operator==(const PaddingSpec&) const = default;

    static PaddingSpec valid_pad() { return PaddingSpec{PadMode::valid, false, {}}; }
    static PaddingSpec same_pad(PadMode m) { return PaddingSpec{m, true, {}}; }
    static PaddingSpec explicit_pad(PadMode m, PadAmounts a) {
        return PaddingSpec{m, false, a};
    }
    /// Symmetric explicit amount, e.g. the fixed p=1 of ResNet 3x3 layers.
    static PaddingSpec explicit_pad(PadMode m, int p) {
        return PaddingSpec{m, false, PadAmounts{p, p, p, p}};
    }
};

/// One contributing input pixel of a padded cell, with its weight.
/// Value-reusing modes have a single weight-1 source; distribution cells
/// carry up to four bilinear sources; zero fills carry none.
struct PadSource {
    int y = 0;
    int x = 0;
    double weight = 1.0;
};

/// For each padded coordinate, the list of source pixels in the original
/// map. Spatial only; identical across channels.
struct PadSourceMap {
    int padded_h = 0;
    int padded_w = 0;
    int src_h = 0;
    int src_w = 0;
    std::vector<std::vector<PadSource>> cells;  // row-major over padded coords

    const std::vector<PadSource>& at(int y, int x) const {
        return cells[static_cast<std::size_t>(y) * padded_w + x];
    }
};

/// SAME amounts for a stride-1 layer: total d*(k-1) per dimension, the
/// odd pixel goes to the bottom/right side.
inline PadAmounts same_amounts(int kernel_h, int kernel_w, int dilation_h = 1,
                               int dilation_w = 1) {
    const int th = dilation_h * (kernel_h - 1);
    const int tw = dilation_w * (kernel_w - 1);
    return PadAmounts{th / 2, th - th / 2, tw / 2, tw - tw / 2};
}

namespace detail {

inline void check_amount_bound(PadMode mode, const char* dim_name, int amount,
                               int dim) {
    int bound = -1;  // -1: unbounded
    switch (mode) {
        case PadMode::mirror_reflect: bound = dim - 1; break;
        case PadMode::mirror_symmetric:
        case PadMode::replicate:
        case PadMode::circular: bound = dim; break;
        default: break;
    }
    if (amount < 0) {
        std::ostringstream os;
        os << "pad: negative amount " << amount << " on " << dim_name;
        throw std::invalid_argument(os.str());
    }
    if (bound >= 0 && amount > bound) {
        std::ostringstream os;
        os << "pad: mode " << mode_name(mode) << " allows at most " << bound
           << " on " << dim_name << " (extent " << dim << "), got " << amount;
        throw std::invalid_argument(os.str());
    }
}

/// 1-D index map for value-reusing modes; -1 marks a synthetic fill.
inline int map_index(PadMode mode, int padded_pos, int lo_amount, int dim) {
    const int orig = padded_pos - lo_amount;
    if (orig >= 0 && orig < dim) return orig;
    switch (mode) {
        case PadMode::circular: {
            int m = orig % dim;
            return m < 0 ? m + dim : m;
        }
        case PadMode::mirror_symmetric:
            return orig < 0 ? -orig - 1 : 2 * dim - 1 - orig;
        case PadMode::mirror_reflect:
            return orig < 0 ? -orig : 2 * (dim - 1) - orig;
        case PadMode::replicate:
            return orig < 0 ? 0 : dim - 1;
        default:
            return -1;
    }
}

/// Corner-aligned sample position for resizing in_len -> out_len: the
/// position, its floor cell and the fractional part.
struct ResizeTap {
    int lo = 0;
    int hi = 0;
    double frac = 0.0;
};

inline ResizeTap resize_tap(int i, int in_len, int out_len) {
    ResizeTap t;
    if (out_len <= 1 || in_len <= 1) {
        t.lo = t.hi = 0;
        t.frac = 0.0;
        return t;
    }
    const double pos = static_cast<double>(i) *
                       (static_cast<double>(in_len - 1) / (out_len - 1));
    t.lo = static_cast<int>(pos);
    if (t.lo > in_len - 2) t.lo = in_len - 2;
    t.hi = t.lo + 1;
    t.frac = pos - t.lo;
    return t;
}

}  // namespace detail

/// Build the padded-coordinate source map for a mode. All modes are
/// separable: a corner source composes the row and column 1-D maps.
inline PadSourceMap pad_sources(int src_h, int src_w, PadMode mode,
                                const PadAmounts& a) {
    if (mode == PadMode::valid && !a.all_zero()) {
        throw std::invalid_argument("pad: valid mode requires zero amounts");
    }
    detail::check_amount_bound(mode, "top", a.top, src_h);
    detail::check_amount_bound(mode, "bottom", a.bottom, src_h);
    detail::check_amount_bound(mode, "left", a.left, src_w);
    detail::check_amount_bound(mode, "right", a.right, src_w);

    PadSourceMap sm;
    sm.src_h = src_h;
    sm.src_w = src_w;
    sm.padded_h = src_h + a.top + a.bottom;
    sm.padded_w = src_w + a.left + a.right;
    sm.cells.resize(static_cast<std::size_t>(sm.padded_h) * sm.padded_w);

    if (mode == PadMode::distribution) {
        for (int py = 0; py < sm.padded_h; ++py) {
            const auto ty = detail::resize_tap(py, src_h, sm.padded_h);
            for (int px = 0; px < sm.padded_w; ++px) {
                auto& cell = sm.cells[static_cast<std::size_t>(py) * sm.padded_w + px];
                const int oy = py - a.top;
                const int ox = px - a.left;
                if (oy >= 0 && oy < src_h && ox >= 0 && ox < src_w) {
                    cell.push_back(PadSource{oy, ox, 1.0});  // original overwrites
                    continue;
                }
                const auto tx = detail::resize_tap(px, src_w, sm.padded_w);
                const double wy1 = ty.frac, wy0 = 1.0 - ty.frac;
                const double wx1 = tx.frac, wx0 = 1.0 - tx.frac;
                if (wy0 * wx0 != 0.0) cell.push_back(PadSource{ty.lo, tx.lo, wy0 * wx0});
                if (wy0 * wx1 != 0.0) cell.push_back(PadSource{ty.lo, tx.hi, wy0 * wx1});
                if (wy1 * wx0 != 0.0) cell.push_back(PadSource{ty.hi, tx.lo, wy1 * wx0});
                if (wy1 * wx1 != 0.0) cell.push_back(PadSource{ty.hi, tx.hi, wy1 * wx1});
            }
        }
        return sm;
    }

    for (int py = 0; py < sm.padded_h; ++py) {
        const int sy = detail::map_index(mode, py, a.top, src_h);
        for (int px = 0; px < sm.padded_w; ++px) {
            const int sx = detail::map_index(mode, px, a.left, src_w);
            if (sy >= 0 && sx >= 0) {
                sm.cells[static_cast<std::size_t>(py) * sm.padded_w + px].push_back(
                    PadSource{sy, sx, 1.0});
            }
            // else synthetic fill: no sources
        }
    }
    return sm;
}

/// Apply a prebuilt source map to a map, channel by channel. Cells with
/// no source take `synthetic_fill` (0 for zero padding; the engine uses
/// -inf when padding max-pool windows).
inline FeatureMap apply_pad_sources(const FeatureMap& map, const PadSourceMap& sm,
                                    double synthetic_fill = 0.0) {
    if (map.height != sm.src_h || map.width != sm.src_w) {
        throw std::invalid_argument("apply_pad_sources: map shape mismatch");
    }
    FeatureMap out(sm.padded_h, sm.padded_w, map.channels);
    for (int c = 0; c < map.channels; ++c) {
        for (int py = 0; py < sm.padded_h; ++py) {
            for (int px = 0; px < sm.padded_w; ++px) {
                const auto& sources = sm.at(py, px);
                double v;
                if (sources.empty()) {
                    v = synthetic_fill;
                } else if (sources.size() == 1 && sources[0].weight == 1.0) {
                    v = map.at(c, sources[0].y, sources[0].x);
                } else {
                    v = 0.0;
                    for (const auto& s : sources) {
                        v += s.weight * map.at(c, s.y, s.x);
                    }
                }
                out.at(c, py, px) = v;
            }
        }
    }
    return out;
}

inline FeatureMap pad(const FeatureMap& map, PadMode mode, const PadAmounts& a,
                      double synthetic_fill = 0.0) {
    return apply_pad_sources(map, pad_sources(map.height, map.width, mode, a),
                             synthetic_fill);
}

/// Distribution padding: the map is bilinearly resized (corner-aligned)
/// to the padded shape, then the original overwrites the central region,
/// leaving resized values in the surrounding ring.
inline FeatureMap distribution_pad(const FeatureMap& map, const PadAmounts& a) {
    return pad(map, PadMode::distribution, a);
}

}  // namespace padlens

#endif
