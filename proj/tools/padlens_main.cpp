// padlens: audit padding arithmetic, compute foveation maps and probe
// feature-map artifacts of convolutional network descriptions.
//
// Exit codes: 0 ok, 2 usage/input error, 3 uneven padding or erosion
// found, 4 foveation oracle mismatch, 5 line artifacts flagged.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "padlens/padlens.hpp"

namespace fs = std::filesystem;
using namespace padlens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUneven = 3;
constexpr int kExitOracleMismatch = 4;
constexpr int kExitArtifacts = 5;

NetworkSpec resolve_network(const std::string& arg) {
    if (fs::exists(arg)) return load_network(arg);
    try {
        return preset(arg);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("\"" + arg +
                                    "\" is neither a config file nor a preset name");
    }
}

Extent2D parse_extent(const std::string& text) {
    const auto sep = text.find('x');
    if (sep == std::string::npos) {
        throw std::invalid_argument("expected HxW, got \"" + text + "\"");
    }
    Extent2D e;
    e.h = std::stoi(text.substr(0, sep));
    e.w = std::stoi(text.substr(sep + 1));
    if (e.h < 1 || e.w < 1) throw std::invalid_argument("extents must be >= 1");
    return e;
}

std::pair<int, int> parse_range(const std::string& text) {
    const auto sep = text.find("..");
    if (sep == std::string::npos) {
        throw std::invalid_argument("expected a..b, got \"" + text + "\"");
    }
    return {std::stoi(text.substr(0, sep)), std::stoi(text.substr(sep + 2))};
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PADLENS_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 1;
}

ProbeInput parse_probe_mode(const std::string& text, std::uint64_t seed) {
    if (text == "zeros") return ProbeInput::zeros();
    if (text.rfind("const:", 0) == 0) {
        return ProbeInput::constant(std::stod(text.substr(6)));
    }
    if (text.rfind("random:", 0) == 0) {
        const int n = std::stoi(text.substr(7));
        if (n < 1) throw std::invalid_argument("random sample count must be >= 1");
        return ProbeInput::random(seed + 1, n);
    }
    throw std::invalid_argument("mode must be zeros, const:<c> or random:<n>");
}

/// Buffered output: nothing touches the filesystem until the command
/// has fully computed its results.
struct OutputSet {
    fs::path dir;
    std::vector<std::pair<std::string, std::string>> files;

    void add(const std::string& name, std::string bytes) {
        files.emplace_back(name, std::move(bytes));
    }
    void flush() {
        fs::create_directories(dir);
        for (const auto& [name, bytes] : files) {
            spit_file((dir / name).string(), bytes);
        }
    }
};

std::string pgm_and_sidecar(const FeatureMap& map, nlohmann::json& sidecar) {
    std::ostringstream os;
    const PgmScale scale = write_pgm16(map, os);
    sidecar["min"] = scale.min;
    sidecar["max"] = scale.max;
    sidecar["height"] = map.height;
    sidecar["width"] = map.width;
    return os.str();
}

// ---------------------------------------------------------------------------

int run_check(const std::string& net_arg, const std::string& input_arg,
              const std::string& json_path) {
    const NetworkSpec spec = resolve_network(net_arg);
    const Extent2D in = parse_extent(input_arg);
    const EvenPaddingAudit audit = check_even_padding(spec, in);

    std::cout << "network " << spec.name << ", input " << in.h << "x" << in.w
              << "\n";
    std::cout << std::left << std::setw(6) << "layer" << std::setw(16) << "kind"
              << std::setw(12) << "in" << std::setw(12) << "padded" << std::setw(12)
              << "consumed" << std::setw(12) << "unconsumed" << std::setw(20)
              << "pad used t/b/l/r" << "verdict\n";
    for (const auto& b : audit.layers) {
        std::ostringstream in_s, pad_s, con_s, unc_s, side_s;
        in_s << b.in.h << "x" << b.in.w;
        pad_s << b.padded_h << "x" << b.padded_w;
        con_s << b.consumed_h << "x" << b.consumed_w;
        unc_s << b.unconsumed_h << "x" << b.unconsumed_w;
        side_s << b.consumed_top << "/" << b.consumed_bottom << "/" << b.consumed_left
               << "/" << b.consumed_right;
        const char* verdict = b.even() ? "even" : (b.eroding() ? "eroding" : "uneven");
        std::cout << std::left << std::setw(6) << b.layer_index << std::setw(16)
                  << kind_name(b.kind) << std::setw(12) << in_s.str() << std::setw(12)
                  << pad_s.str() << std::setw(12) << con_s.str() << std::setw(12)
                  << unc_s.str() << std::setw(20) << side_s.str() << verdict << "\n";
    }
    std::cout << (audit.all_even ? "all downsampling layers even\n"
                                 : "uneven padding or erosion found\n");
    if (!json_path.empty()) {
        spit_file(json_path, audit_to_json(audit).dump(2) + "\n");
    }
    return audit.all_even ? kExitOk : kExitUneven;
}

int run_suggest(const std::string& net_arg, const std::string& input_arg,
                const std::string& range_arg) {
    const NetworkSpec spec = resolve_network(net_arg);
    if (!range_arg.empty()) {
        const auto [lo, hi] = parse_range(range_arg);
        const std::vector<int> sizes = admissible_sizes(spec, lo, hi);
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            std::cout << (i ? "," : "") << sizes[i];
        }
        std::cout << "\n";
    }
    if (!input_arg.empty()) {
        const Extent2D in = parse_extent(input_arg);
        for (const auto& [label, desired] :
             std::vector<std::pair<std::string, int>>{{"height", in.h}, {"width", in.w}}) {
            const SizeSuggestion s = suggest_size(spec, desired);
            std::cout << label << " " << desired;
            if (s.admissible()) {
                std::cout << ": admissible (delta 0)\n";
                continue;
            }
            std::cout << ": resize_to";
            if (s.nearest_le > 0) std::cout << " " << s.nearest_le << " (" << s.nearest_le - desired << ")";
            if (s.nearest_ge > 0) std::cout << " or " << s.nearest_ge << " (+" << s.nearest_ge - desired << ")";
            if (s.pad_to() > 0) std::cout << "; pad_to " << s.pad_to() << " (+" << s.pad_to() - desired << ")";
            std::cout << "\n";
        }
    }
    return kExitOk;
}

int run_foveation(const std::string& net_arg, const std::string& input_arg,
                  const std::string& padding_arg, bool oracle,
                  const std::string& out_arg) {
    const NetworkSpec spec = resolve_network(net_arg);
    const Extent2D in = parse_extent(input_arg);
    std::optional<PadMode> override_mode;
    if (!padding_arg.empty()) override_mode = parse_mode(padding_arg);

    const FoveationMap fmap = foveation_map(spec, in, override_mode);
    bool mismatch = false;
    if (oracle) {
        const FoveationMap omap = oracle_foveation(spec, in, override_mode);
        const bool exact = exact_integer_counts(fmap) && exact_integer_counts(omap);
        for (std::size_t k = 0; k < fmap.counts.size(); ++k) {
            const double a = fmap.counts[k], b = omap.counts[k];
            if (exact ? (a != b)
                      : (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))) {
                mismatch = true;
                break;
            }
        }
    }

    const FeatureMap map = to_feature_map(fmap);
    const UniformityStats stats = uniformity_stats(fmap);
    nlohmann::json sidecar;
    OutputSet out;
    out.dir = out_arg;
    out.add("fmap.pgm", pgm_and_sidecar(map, sidecar));
    sidecar["exact_integer_counts"] = exact_integer_counts(fmap);
    sidecar["mean"] = stats.mean;
    sidecar["relative_spread"] = stats.relative_spread;
    if (oracle) sidecar["oracle_match"] = !mismatch;
    out.add("fmap.csv", to_csv(map));
    out.add("fmap.json", sidecar.dump(2) + "\n");
    out.flush();

    std::cout << "foveation map " << fmap.height << "x" << fmap.width << ": min "
              << stats.min << ", max " << stats.max << ", spread "
              << stats.relative_spread << "\n";
    if (oracle) {
        std::cout << (mismatch ? "oracle MISMATCH\n" : "oracle match\n");
    }
    return mismatch ? kExitOracleMismatch : kExitOk;
}

int run_probe(const std::string& net_arg, const std::string& weights_arg,
              std::optional<std::uint64_t> seed_arg, const std::string& input_arg,
              const std::string& mode_arg, const std::string& padding_arg,
              const std::string& out_arg, double z_threshold) {
    const NetworkSpec spec = resolve_network(net_arg);
    const Extent2D in = parse_extent(input_arg);
    const std::uint64_t seed = seed_arg ? *seed_arg : default_seed();

    WeightSet ws;
    if (!weights_arg.empty()) {
        ws = load_weights(weights_arg, &spec);
    } else {
        ws = random_weights(spec, seed);
    }
    std::optional<PadMode> override_mode;
    if (!padding_arg.empty()) override_mode = parse_mode(padding_arg);
    const ProbeInput probe = parse_probe_mode(mode_arg, seed);

    const ArtifactReport report =
        artifact_probe(spec, ws, probe, in, override_mode, z_threshold);

    nlohmann::json j = flags_to_json(report);
    OutputSet out;
    out.dir = out_arg;
    for (std::size_t i = 0; i < report.layers.size(); ++i) {
        const LayerArtifact& la = report.layers[i];
        char stem[32];
        std::snprintf(stem, sizeof(stem), "layer_%03d_mean", la.layer_index);
        nlohmann::json& e = j["layers"][i];
        out.add(std::string(stem) + ".pgm", pgm_and_sidecar(la.mean_map, e["pgm"]));
        out.add(std::string(stem) + ".csv", to_csv(la.mean_map));
        e["border_profile"] = la.profile;
    }
    out.add("flags.json", j.dump(2) + "\n");
    out.flush();

    int flagged_layers = 0;
    for (const auto& l : report.layers) flagged_layers += l.flags.any() ? 1 : 0;
    std::cout << "probed " << report.layers.size() << " layers, " << flagged_layers
              << " with line artifacts\n";
    return report.any_flagged() ? kExitArtifacts : kExitOk;
}

int run_kernels(const std::string& net_arg, const std::string& weights_arg,
                std::optional<std::uint64_t> seed_arg, const std::string& out_arg) {
    const NetworkSpec spec = resolve_network(net_arg);
    WeightSet ws;
    if (!weights_arg.empty()) {
        ws = load_weights(weights_arg, &spec);
    } else {
        ws = random_weights(spec, seed_arg ? *seed_arg : default_seed());
    }
    const std::vector<AsymmetryRow> rows = asymmetry_sweep(ws, spec);

    OutputSet out;
    out.dir = out_arg;
    nlohmann::json sidecars = nlohmann::json::array();
    for (const auto& r : rows) {
        const FeatureMap mk = mean_kernel(ws, r.layer_index);
        char stem[32];
        std::snprintf(stem, sizeof(stem), "kernel_%03d", r.layer_index);
        nlohmann::json sc;
        sc["layer"] = r.layer_index;
        out.add(std::string(stem) + ".pgm", pgm_and_sidecar(mk, sc));
        out.add(std::string(stem) + ".csv", to_csv(mk));
        sidecars.push_back(sc);
    }
    out.add("asymmetry.csv", asymmetry_table_csv(rows));
    out.add("kernels.json", sidecars.dump(2) + "\n");
    out.flush();

    std::cout << "wrote " << rows.size() << " mean kernels\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"padding bias analysis for convolutional networks"};
    app.require_subcommand(1);

    std::string net_arg, input_arg, range_arg, padding_arg, out_arg, weights_arg;
    std::string mode_arg = "zeros";
    std::string json_arg;
    std::optional<std::uint64_t> seed_arg;
    double z_threshold = 4.0;
    bool oracle = false;

    auto add_net = [&](CLI::App* cmd) {
        cmd->add_option("network", net_arg, "config file or preset name")->required();
    };

    CLI::App* check = app.add_subcommand("check", "audit even application of padding");
    add_net(check);
    check->add_option("--input", input_arg, "input size HxW")->required();
    check->add_option("--json", json_arg, "also write the report as JSON");

    CLI::App* suggest = app.add_subcommand("suggest", "admissible input sizes");
    add_net(suggest);
    suggest->add_option("--input", input_arg, "desired size HxW");
    suggest->add_option("--range", range_arg, "list admissible sizes in a..b");

    CLI::App* fove = app.add_subcommand("foveation", "per-pixel input-output path counts");
    add_net(fove);
    fove->add_option("--input", input_arg, "input size HxW")->required();
    fove->add_option("--padding", padding_arg, "override conv padding mode");
    fove->add_flag("--oracle", oracle, "verify against the one-hot brute force");
    fove->add_option("--out", out_arg, "output directory")->required();

    CLI::App* probe = app.add_subcommand("probe", "feature-map artifact probe");
    add_net(probe);
    probe->add_option("--weights", weights_arg, "PADW weight file");
    probe->add_option("--random-seed", seed_arg, "random weights from this seed");
    probe->add_option("--input", input_arg, "input size HxW")->default_val("64x64");
    probe->add_option("--mode", mode_arg, "zeros | const:<c> | random:<n>");
    probe->add_option("--padding", padding_arg, "override conv padding mode");
    probe->add_option("--z-threshold", z_threshold, "line artifact z-score threshold");
    probe->add_option("--out", out_arg, "output directory")->required();

    CLI::App* kernels = app.add_subcommand("kernels", "mean kernels and asymmetry table");
    add_net(kernels);
    kernels->add_option("--weights", weights_arg, "PADW weight file");
    kernels->add_option("--random-seed", seed_arg, "random weights from this seed");
    kernels->add_option("--out", out_arg, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (app.got_subcommand(check)) return run_check(net_arg, input_arg, json_arg);
        if (app.got_subcommand(suggest)) return run_suggest(net_arg, input_arg, range_arg);
        if (app.got_subcommand(fove)) {
            return run_foveation(net_arg, input_arg, padding_arg, oracle, out_arg);
        }
        if (app.got_subcommand(probe)) {
            return run_probe(net_arg, weights_arg, seed_arg, input_arg, mode_arg,
                             padding_arg, out_arg, z_threshold);
        }
        if (app.got_subcommand(kernels)) {
            return run_kernels(net_arg, weights_arg, seed_arg, out_arg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
