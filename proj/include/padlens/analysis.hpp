#ifndef PADLENS_ANALYSIS_HPP
#define PADLENS_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "padlens/convarith.hpp"
#include "padlens/engine.hpp"
#include "padlens/netspec.hpp"
#include "padlens/tensor.hpp"

namespace padlens {

/// Mirror-asymmetry of a kernel about its vertical axis (horizontal
/// component) and horizontal axis (vertical component). 0 means exact
/// mirror symmetry; scores are scale-invariant and bounded by 1.
struct AsymmetryScore {
    double horizontal = 0.0;
    double vertical = 0.0;
};

/// Average over out x in channels of the spatial kernel taps.
inline FeatureMap mean_kernel(const KernelSet& ks) {
    FeatureMap m(ks.kernel_h, ks.kernel_w, 1);
    const double inv = 1.0 / (static_cast<double>(ks.out_channels) * ks.in_channels);
    for (int i = 0; i < ks.kernel_h; ++i) {
        for (int j = 0; j < ks.kernel_w; ++j) {
            double sum = 0.0;
            for (int o = 0; o < ks.out_channels; ++o) {
                for (int c = 0; c < ks.in_channels; ++c) {
                    sum += ks.at(o, c, i, j);
                }
            }
            m.at(0, i, j) = sum * inv;
        }
    }
    return m;
}

inline FeatureMap mean_kernel(const WeightSet& ws, int layer_index) {
    return mean_kernel(ws.at(layer_index));
}

inline AsymmetryScore asymmetry(const FeatureMap& kernel) {
    if (kernel.channels != 1) {
        throw std::invalid_argument("asymmetry: kernel map must have one channel");
    }
    const int kh = kernel.height, kw = kernel.width;
    double total = 0.0;
    for (double v : kernel.data) total += std::abs(v);
    AsymmetryScore s;
    if (total == 0.0) return s;
    double dh = 0.0, dv = 0.0;
    for (int i = 0; i < kh; ++i) {
        for (int j = 0; j < kw; ++j) {
            dh += std::abs(kernel.at(0, i, j) - kernel.at(0, i, kw - 1 - j));
            dv += std::abs(kernel.at(0, i, j) - kernel.at(0, kh - 1 - i, j));
        }
    }
    s.horizontal = dh / (2.0 * total);
    s.vertical = dv / (2.0 * total);
    return s;
}

struct AsymmetryRow {
    int layer_index = 0;
    int kernel_h = 0, kernel_w = 0;
    AsymmetryScore score;
};

inline std::vector<AsymmetryRow> asymmetry_sweep(const WeightSet& ws,
                                                 const NetworkSpec& spec) {
    std::vector<AsymmetryRow> rows;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (!spec.layers[i].has_weights()) continue;
        const KernelSet& ks = ws.at(static_cast<int>(i));
        AsymmetryRow r;
        r.layer_index = static_cast<int>(i);
        r.kernel_h = ks.kernel_h;
        r.kernel_w = ks.kernel_w;
        r.score = asymmetry(mean_kernel(ks));
        rows.push_back(r);
    }
    return rows;
}

inline std::string asymmetry_table_csv(const std::vector<AsymmetryRow>& rows) {
    std::ostringstream os;
    os << "layer,kh,kw,horiz,vert\n";
    char buf[40];
    for (const auto& r : rows) {
        os << r.layer_index << ',' << r.kernel_h << ',' << r.kernel_w << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.score.horizontal);
        os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.score.vertical);
        os << buf << '\n';
    }
    return os.str();
}

struct LineFlag {
    int index = 0;
    double z = 0.0;
};

struct LineFlags {
    std::vector<LineFlag> rows;
    std::vector<LineFlag> cols;
    bool any() const { return !rows.empty() || !cols.empty(); }
};

/// Flag rows/columns whose mean deviates from the interior baseline by
/// more than z_threshold baseline standard deviations. The baseline is
/// the central region at `margin` pixels from the border, capped at a
/// quarter of the smaller extent; the stdev is floored at 1e-12.
inline LineFlags line_artifact_flags(const FeatureMap& mean_map, double z_threshold,
                                     int margin = 1 << 20) {
    if (mean_map.channels != 1) {
        throw std::invalid_argument("line_artifact_flags: map must have one channel");
    }
    const int h = mean_map.height, w = mean_map.width;
    const int cap = std::min(h, w) / 4;
    const int m = std::clamp(margin, 0, cap);

    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (int y = m; y < h - m; ++y) {
        for (int x = m; x < w - m; ++x) {
            const double v = mean_map.at(0, y, x);
            sum += v;
            sq += v * v;
            ++n;
        }
    }
    const double mu = sum / static_cast<double>(n);
    const double var = std::max(0.0, sq / static_cast<double>(n) - mu * mu);
    const double sigma = std::max(std::sqrt(var), 1e-12);

    // Row/column statistics use the central segment only, so a line
    // along one axis does not drag every crossing line over the
    // threshold.
    LineFlags flags;
    for (int y = 0; y < h; ++y) {
        double rs = 0.0;
        for (int x = m; x < w - m; ++x) rs += mean_map.at(0, y, x);
        const double z = (rs / (w - 2 * m) - mu) / sigma;
        if (std::abs(z) > z_threshold) flags.rows.push_back(LineFlag{y, z});
    }
    for (int x = 0; x < w; ++x) {
        double cs = 0.0;
        for (int y = m; y < h - m; ++y) cs += mean_map.at(0, y, x);
        const double z = (cs / (h - 2 * m) - mu) / sigma;
        if (std::abs(z) > z_threshold) flags.cols.push_back(LineFlag{x, z});
    }
    return flags;
}

/// Mean activation per Chebyshev distance-to-border ring.
inline std::vector<double> border_profile(const FeatureMap& mean_map) {
    const int h = mean_map.height, w = mean_map.width;
    const int len = std::min(h, w) / 2;
    std::vector<double> sums(len, 0.0);
    std::vector<std::size_t> counts(len, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int d = std::min(std::min(y, h - 1 - y), std::min(x, w - 1 - x));
            if (d < len) {
                sums[d] += mean_map.at(0, y, x);
                counts[d] += 1;
            }
        }
    }
    for (int d = 0; d < len; ++d) sums[d] /= static_cast<double>(counts[d]);
    return sums;
}

struct ProbeInput {
    enum class Mode { zeros, constant, random };
    Mode mode = Mode::zeros;
    double value = 0.0;
    std::uint64_t seed = 1;
    int samples = 30;

    static ProbeInput zeros() { return ProbeInput{}; }
    static ProbeInput constant(double c) {
        return ProbeInput{Mode::constant, c, 1, 1};
    }
    static ProbeInput random(std::uint64_t seed, int n = 30) {
        return ProbeInput{Mode::random, 0.0, seed, n};
    }
};

struct LayerArtifact {
    int layer_index = 0;
    FeatureMap mean_map;                 // channel-mean, sample-averaged
    std::vector<double> profile;         // mean activation vs border distance
    LineFlags flags;
};

struct ArtifactReport {
    std::vector<LayerArtifact> layers;

    bool any_flagged() const {
        for (const auto& l : layers) {
            if (l.flags.any()) return true;
        }
        return false;
    }
};

/// Run the network on probe inputs (zeros, a constant, or n uniform
/// [0,1) samples), channel-mean every layer output and average over
/// samples, then profile borders and flag deviating lines. Accumulation
/// is in sample order, then one division, so the n-sample report is the
/// exact mean of n single-sample reports.
inline ArtifactReport artifact_probe(const NetworkSpec& spec, const WeightSet& weights,
                                     ProbeInput input, Extent2D shape,
                                     std::optional<PadMode> padding_override = {},
                                     double z_threshold = 4.0) {
    const NetworkSpec net =
        padding_override ? with_padding_override(spec, *padding_override) : spec;
    const int n = input.mode == ProbeInput::Mode::random ? input.samples : 1;
    if (n < 1) throw std::invalid_argument("artifact_probe: sample count must be >= 1");

    std::mt19937_64 rng(input.seed);
    std::vector<FeatureMap> sums;
    for (int s = 0; s < n; ++s) {
        FeatureMap in(shape.h, shape.w, net.input_channels);
        switch (input.mode) {
            case ProbeInput::Mode::zeros:
                break;
            case ProbeInput::Mode::constant:
                for (double& v : in.data) v = input.value;
                break;
            case ProbeInput::Mode::random:
                for (double& v : in.data) v = detail::next_unit(rng);
                break;
        }
        const std::vector<FeatureMap> outs = forward(net, weights, in, Record::all);
        if (s == 0) {
            sums.reserve(outs.size());
            for (const auto& o : outs) sums.push_back(channel_mean(o));
        } else {
            for (std::size_t i = 0; i < outs.size(); ++i) {
                const FeatureMap m = channel_mean(outs[i]);
                for (std::size_t k = 0; k < m.data.size(); ++k) {
                    sums[i].data[k] += m.data[k];
                }
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& m : sums) {
        for (double& v : m.data) v *= inv;
    }

    const std::vector<int> rf = receptive_field_extents(net);
    ArtifactReport report;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        LayerArtifact la;
        la.layer_index = static_cast<int>(i);
        la.profile = border_profile(sums[i]);
        la.flags = line_artifact_flags(sums[i], z_threshold, (rf[i] - 1) / 2);
        la.mean_map = std::move(sums[i]);
        report.layers.push_back(std::move(la));
    }
    return report;
}

inline nlohmann::json flags_to_json(const ArtifactReport& report) {
    nlohmann::json j;
    j["any_flagged"] = report.any_flagged();
    j["layers"] = nlohmann::json::array();
    for (const auto& l : report.layers) {
        nlohmann::json e;
        e["layer"] = l.layer_index;
        e["height"] = l.mean_map.height;
        e["width"] = l.mean_map.width;
        e["flagged_rows"] = nlohmann::json::array();
        for (const auto& f : l.flags.rows) {
            e["flagged_rows"].push_back({{"index", f.index}, {"z", f.z}});
        }
        e["flagged_cols"] = nlohmann::json::array();
        for (const auto& f : l.flags.cols) {
            e["flagged_cols"].push_back({{"index", f.index}, {"z", f.z}});
        }
        j["layers"].push_back(e);
    }
    return j;
}

}  // namespace padlens

#endif
