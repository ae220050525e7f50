#ifndef PADLENS_IO_HPP
#define PADLENS_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "padlens/tensor.hpp"

namespace padlens {

struct PgmScale {
    double min = 0.0;
    double max = 0.0;
};

/// Binary 16-bit PGM (P5, maxval 65535), min-max normalized per map.
/// Samples are written most-significant byte first per the format.
/// Returns the (min, max) used, for the sidecar record.
inline PgmScale write_pgm16(const FeatureMap& map, std::ostream& os) {
    if (map.channels != 1) {
        throw std::invalid_argument("write_pgm16: map must have one channel");
    }
    PgmScale scale{map.data[0], map.data[0]};
    for (double v : map.data) {
        scale.min = std::min(scale.min, v);
        scale.max = std::max(scale.max, v);
    }
    const double span = scale.max - scale.min;
    os << "P5\n" << map.width << " " << map.height << "\n65535\n";
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const double v = map.at(0, y, x);
            const double norm = span > 0.0 ? (v - scale.min) / span : 0.0;
            const auto q = static_cast<std::uint16_t>(std::lround(norm * 65535.0));
            os.put(static_cast<char>((q >> 8) & 0xff));
            os.put(static_cast<char>(q & 0xff));
        }
    }
    return scale;
}

inline std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace padlens

#endif
