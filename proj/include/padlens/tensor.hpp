#ifndef PADLENS_TENSOR_HPP
#define PADLENS_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace padlens {

/// Dense H x W x C activation grid. Storage is channel-major, then
/// row-major within a channel: index = (c * height + y) * width + x.
/// Values are double throughout; path counts stay exact below 2^53.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    FeatureMap() = default;

    FeatureMap(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c) {
        if (h < 1 || w < 1 || c < 1) {
            std::ostringstream os;
            os << "FeatureMap dimensions must be >= 1, got " << h << "x" << w
               << "x" << c;
            throw std::invalid_argument(os.str());
        }
        data.assign(static_cast<std::size_t>(h) * w * c, fill);
    }

    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height + y) * width + x;
    }

    double& at(int c, int y, int x) { return data[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data[index(c, y, x)]; }

    bool same_shape(const FeatureMap& other) const {
        return height == other.height && width == other.width &&
               channels == other.channels;
    }

    bool all_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

/// Convolution weights for one layer: out x in x kh x kw, plus one bias
/// per output channel. Depthwise layers store in_channels = 1.
struct KernelSet {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    KernelSet() = default;

    KernelSet(int out, int in, int kh, int kw, double fill = 0.0)
        : out_channels(out), in_channels(in), kernel_h(kh), kernel_w(kw) {
        if (out < 1 || in < 1 || kh < 1 || kw < 1) {
            std::ostringstream os;
            os << "KernelSet dimensions must be >= 1, got " << out << "x" << in
               << "x" << kh << "x" << kw;
            throw std::invalid_argument(os.str());
        }
        weights.assign(static_cast<std::size_t>(out) * in * kh * kw, fill);
        biases.assign(static_cast<std::size_t>(out), 0.0);
    }

    std::size_t index(int o, int c, int i, int j) const {
        return ((static_cast<std::size_t>(o) * in_channels + c) * kernel_h + i) *
                   kernel_w +
               j;
    }

    double& at(int o, int c, int i, int j) { return weights[index(o, c, i, j)]; }
    double at(int o, int c, int i, int j) const {
        return weights[index(o, c, i, j)];
    }
};

/// Mean over channels; height and width are preserved.
inline FeatureMap channel_mean(const FeatureMap& map) {
    FeatureMap out(map.height, map.width, 1);
    const double inv = 1.0 / map.channels;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double sum = 0.0;
            for (int c = 0; c < map.channels; ++c) sum += map.at(c, y, x);
            out.at(0, y, x) = sum * inv;
        }
    }
    return out;
}

/// Elementwise arithmetic mean of a same-shape sequence. Summation is
/// left-to-right over the sequence, then one division.
inline FeatureMap accumulate_mean(const std::vector<FeatureMap>& maps) {
    if (maps.empty()) {
        throw std::invalid_argument("accumulate_mean: empty sequence");
    }
    FeatureMap acc = maps.front();
    for (std::size_t i = 1; i < maps.size(); ++i) {
        if (!maps[i].same_shape(acc)) {
            std::ostringstream os;
            os << "accumulate_mean: shape mismatch at index " << i << " ("
               << maps[i].height << "x" << maps[i].width << "x"
               << maps[i].channels << " vs " << acc.height << "x" << acc.width
               << "x" << acc.channels << ")";
            throw std::invalid_argument(os.str());
        }
        for (std::size_t k = 0; k < acc.data.size(); ++k) {
            acc.data[k] += maps[i].data[k];
        }
    }
    const double inv = 1.0 / static_cast<double>(maps.size());
    for (double& v : acc.data) v *= inv;
    return acc;
}

/// CSV for single-channel maps: one line per pixel row, comma-separated,
/// 17 significant digits, LF line endings.
inline void write_csv(const FeatureMap& map, std::ostream& os) {
    if (map.channels != 1) {
        throw std::invalid_argument("write_csv: map must have one channel");
    }
    char buf[40];
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            std::snprintf(buf, sizeof(buf), "%.17g", map.at(0, y, x));
            if (x) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

inline std::string to_csv(const FeatureMap& map) {
    std::ostringstream os;
    write_csv(map, os);
    return os.str();
}

}  // namespace padlens

#endif
