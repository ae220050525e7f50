#ifndef PADLENS_ENGINE_HPP
#define PADLENS_ENGINE_HPP

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "padlens/convarith.hpp"
#include "padlens/netspec.hpp"
#include "padlens/padding.hpp"
#include "padlens/tensor.hpp"

namespace padlens {

namespace detail {

inline void check_kernel_matches(const FeatureMap& map, const KernelSet& ks,
                                 const LayerSpec& layer) {
    const KernelSet want = kernel_shape_for(layer);
    if (want.out_channels != ks.out_channels || want.in_channels != ks.in_channels ||
        want.kernel_h != ks.kernel_h || want.kernel_w != ks.kernel_w) {
        std::ostringstream os;
        os << "kernel shape " << ks.out_channels << "x" << ks.in_channels << "x"
           << ks.kernel_h << "x" << ks.kernel_w << " does not match layer";
        throw std::invalid_argument(os.str());
    }
    const int expect_ch = layer.kind == LayerKind::depthwise_conv
                              ? ks.out_channels
                              : ks.in_channels;
    if (map.channels != expect_ch) {
        std::ostringstream os;
        os << "map has " << map.channels << " channels, layer expects " << expect_ch;
        throw std::invalid_argument(os.str());
    }
}

/// Number of kernel taps that land inside the unpadded image, for one
/// dimension of every output position.
inline std::vector<int> in_image_tap_counts(int out, int stride, int kernel,
                                            int dilation, int pad_lo, int in) {
    std::vector<int> counts(out, 0);
    for (int o = 0; o < out; ++o) {
        int n = 0;
        for (int t = 0; t < kernel; ++t) {
            const int pos = o * stride + t * dilation - pad_lo;
            if (pos >= 0 && pos < in) ++n;
        }
        counts[o] = n;
    }
    return counts;
}

/// Rescale factor of partial convolution. Kept as a single shared
/// expression so the engine and the foveation accumulator agree bitwise.
inline double partial_scale(int full_taps, int valid_taps) {
    return static_cast<double>(full_taps) / static_cast<double>(valid_taps);
}

}  // namespace detail

/// Cross-correlation with bias (no kernel flip), after applying the
/// layer's padding. Handles both regular and depthwise kernels.
inline FeatureMap conv2d(const FeatureMap& map, const KernelSet& kernels,
                         const LayerSpec& layer) {
    detail::check_kernel_matches(map, kernels, layer);
    const PadAmounts a = resolve_amounts(layer, map.height, map.width);
    const PadMode vmode =
        layer.padding.mode == PadMode::partial_conv ? PadMode::zero : layer.padding.mode;
    const FeatureMap padded = pad(map, vmode, a);

    const Extent2D out_shape = output_shape(layer, Extent2D{map.height, map.width});
    const bool depthwise = layer.kind == LayerKind::depthwise_conv;
    FeatureMap out(out_shape.h, out_shape.w, kernels.out_channels);

    const int kh = kernels.kernel_h, kw = kernels.kernel_w;
    const int sh = layer.stride_h, sw = layer.stride_w;
    const int dh = layer.dilation_h, dw = layer.dilation_w;
    for (int o = 0; o < kernels.out_channels; ++o) {
        for (int y = 0; y < out_shape.h; ++y) {
            for (int x = 0; x < out_shape.w; ++x) {
                double sum = 0.0;
                if (depthwise) {
                    for (int i = 0; i < kh; ++i) {
                        for (int j = 0; j < kw; ++j) {
                            sum += kernels.at(o, 0, i, j) *
                                   padded.at(o, y * sh + i * dh, x * sw + j * dw);
                        }
                    }
                } else {
                    for (int c = 0; c < kernels.in_channels; ++c) {
                        for (int i = 0; i < kh; ++i) {
                            for (int j = 0; j < kw; ++j) {
                                sum += kernels.at(o, c, i, j) *
                                       padded.at(c, y * sh + i * dh, x * sw + j * dw);
                            }
                        }
                    }
                }
                out.at(o, y, x) = kernels.biases[o] + sum;
            }
        }
    }
    return out;
}

/// Partial convolution: out-of-image taps are treated as missing and
/// the in-image sum is rescaled by full/valid tap count. The bias is
/// added after rescaling, unscaled.
inline FeatureMap partial_conv2d(const FeatureMap& map, const KernelSet& kernels,
                                 const LayerSpec& layer) {
    detail::check_kernel_matches(map, kernels, layer);
    const PadAmounts a = resolve_amounts(layer, map.height, map.width);
    const FeatureMap padded = pad(map, PadMode::zero, a);
    const Extent2D out_shape = output_shape(layer, Extent2D{map.height, map.width});
    const bool depthwise = layer.kind == LayerKind::depthwise_conv;

    const int kh = kernels.kernel_h, kw = kernels.kernel_w;
    const int sh = layer.stride_h, sw = layer.stride_w;
    const int dh = layer.dilation_h, dw = layer.dilation_w;
    const auto vh = detail::in_image_tap_counts(out_shape.h, sh, kh, dh, a.top, map.height);
    const auto vw = detail::in_image_tap_counts(out_shape.w, sw, kw, dw, a.left, map.width);
    const int full = kh * kw;

    FeatureMap out(out_shape.h, out_shape.w, kernels.out_channels);
    for (int o = 0; o < kernels.out_channels; ++o) {
        for (int y = 0; y < out_shape.h; ++y) {
            for (int x = 0; x < out_shape.w; ++x) {
                const int valid = vh[y] * vw[x];
                if (valid == 0) {
                    throw std::invalid_argument(
                        "partial_conv2d: window has no in-image tap");
                }
                // Zero-padded taps contribute exactly 0, so the padded sum
                // equals the in-image sum.
                double sum = 0.0;
                if (depthwise) {
                    for (int i = 0; i < kh; ++i) {
                        for (int j = 0; j < kw; ++j) {
                            sum += kernels.at(o, 0, i, j) *
                                   padded.at(o, y * sh + i * dh, x * sw + j * dw);
                        }
                    }
                } else {
                    for (int c = 0; c < kernels.in_channels; ++c) {
                        for (int i = 0; i < kh; ++i) {
                            for (int j = 0; j < kw; ++j) {
                                sum += kernels.at(o, c, i, j) *
                                       padded.at(c, y * sh + i * dh, x * sw + j * dw);
                            }
                        }
                    }
                }
                out.at(o, y, x) = sum * detail::partial_scale(full, valid) +
                                  kernels.biases[o];
            }
        }
    }
    return out;
}

/// Windowed maximum. Synthetic padding cells are filled with -inf so a
/// padded tap never wins; value-reusing modes pad normally. Trailing
/// rows/columns a strided window does not reach are dropped.
inline FeatureMap maxpool(const FeatureMap& map, const LayerSpec& layer) {
    const PadAmounts a = resolve_amounts(layer, map.height, map.width);
    const FeatureMap padded =
        pad(map, layer.padding.mode == PadMode::partial_conv ? PadMode::zero
                                                             : layer.padding.mode,
            a, -std::numeric_limits<double>::infinity());
    const Extent2D out_shape = output_shape(layer, Extent2D{map.height, map.width});

    FeatureMap out(out_shape.h, out_shape.w, map.channels);
    const int kh = layer.kernel_h, kw = layer.kernel_w;
    const int sh = layer.stride_h, sw = layer.stride_w;
    const int dh = layer.dilation_h, dw = layer.dilation_w;
    for (int c = 0; c < map.channels; ++c) {
        for (int y = 0; y < out_shape.h; ++y) {
            for (int x = 0; x < out_shape.w; ++x) {
                double m = -std::numeric_limits<double>::infinity();
                for (int i = 0; i < kh; ++i) {
                    for (int j = 0; j < kw; ++j) {
                        m = std::max(m, padded.at(c, y * sh + i * dh, x * sw + j * dw));
                    }
                }
                out.at(c, y, x) = m;
            }
        }
    }
    return out;
}

inline FeatureMap relu(const FeatureMap& map) {
    FeatureMap out = map;
    for (double& v : out.data) v = std::max(0.0, v);
    return out;
}

enum class Record { all, last };

/// Run the network on one input, resolving add_from junctions by
/// elementwise addition. Returns every layer output (Record::all) or
/// just the final one.
inline std::vector<FeatureMap> forward(const NetworkSpec& spec, const WeightSet& weights,
                                       const FeatureMap& input, Record record = Record::all) {
    if (input.channels != spec.input_channels) {
        std::ostringstream os;
        os << "input has " << input.channels << " channels, network expects "
           << spec.input_channels;
        throw std::invalid_argument(os.str());
    }
    std::vector<FeatureMap> outputs;
    outputs.reserve(spec.layers.size());
    const FeatureMap* cur = &input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        try {
            switch (l.kind) {
                case LayerKind::conv:
                case LayerKind::depthwise_conv:
                    if (l.padding.mode == PadMode::partial_conv) {
                        outputs.push_back(partial_conv2d(*cur, weights.at(static_cast<int>(i)), l));
                    } else {
                        outputs.push_back(conv2d(*cur, weights.at(static_cast<int>(i)), l));
                    }
                    break;
                case LayerKind::maxpool:
                    outputs.push_back(maxpool(*cur, l));
                    break;
                case LayerKind::relu:
                    outputs.push_back(relu(*cur));
                    break;
                case LayerKind::add_from: {
                    const FeatureMap& src = outputs[l.add_source];
                    if (!src.same_shape(*cur)) {
                        std::ostringstream os;
                        os << "add_from source shape " << src.height << "x" << src.width
                           << "x" << src.channels << " does not match " << cur->height
                           << "x" << cur->width << "x" << cur->channels;
                        throw std::invalid_argument(os.str());
                    }
                    FeatureMap sum = *cur;
                    for (std::size_t k = 0; k < sum.data.size(); ++k) {
                        sum.data[k] += src.data[k];
                    }
                    outputs.push_back(std::move(sum));
                    break;
                }
            }
        } catch (const std::invalid_argument& e) {
            std::ostringstream os;
            os << "layer " << i << ": " << e.what();
            throw std::invalid_argument(os.str());
        } catch (const std::out_of_range& e) {
            std::ostringstream os;
            os << "layer " << i << ": " << e.what();
            throw std::invalid_argument(os.str());
        }
        cur = &outputs.back();
    }
    if (record == Record::last) {
        return {outputs.back()};
    }
    return outputs;
}

/// Copy of a network with every conv/depthwise layer's padding replaced
/// by `mode` at SAME-equivalent amounts (valid and full keep their own
/// amount semantics). Pool layers are untouched.
inline NetworkSpec with_padding_override(const NetworkSpec& spec, PadMode mode) {
    NetworkSpec out = spec;
    for (auto& l : out.layers) {
        if (l.kind != LayerKind::conv && l.kind != LayerKind::depthwise_conv) continue;
        if (mode == PadMode::valid) {
            l.padding = PaddingSpec::valid_pad();
        } else if (mode == PadMode::full_zero) {
            l.padding = PaddingSpec{PadMode::full_zero, false, {}};
        } else {
            l.padding = PaddingSpec::same_pad(mode);
        }
    }
    return out;
}

}  // namespace padlens

#endif
