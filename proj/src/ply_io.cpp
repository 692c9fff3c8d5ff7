#include "gsplit/ply_io.hpp"
#include "gsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gsplit {

namespace {

constexpr double kTwoPiPow32 = 15.749609945722419; // (2*pi)^{3/2}

// Canonical property order of the de-facto splat format for `rest` = number
// of f_rest properties (3 * ((L+1)^2 - 1)).
std::vector<std::string> canonical_properties(std::size_t rest) {
    std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    for (std::size_t i = 0; i < rest; ++i) names.push_back("f_rest_" + std::to_string(i));
    for (const char* n : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
        names.emplace_back(n);
    return names;
}

int degree_from_rest(std::size_t rest) {
    for (int degree = 0; degree <= 3; ++degree) {
        if (rest == 3u * static_cast<std::size_t>((degree + 1) * (degree + 1) - 1)) return degree;
    }
    throw FormatError("ply: f_rest property count " + std::to_string(rest) +
                      " matches no SH degree in [0,3]");
}

PlyHeaderInfo parse_header(std::istream& in, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
        throw FormatError(path.string() + ": not a PLY file");
    }
    PlyHeaderInfo info;
    bool in_vertex_element = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "comment") continue;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian") {
                throw FormatError(path.string() + ": unsupported encoding '" + fmt +
                                  "' (expected binary_little_endian)");
            }
            info.binary_little_endian = true;
        } else if (word == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name != "vertex") {
                throw FormatError(path.string() + ": unexpected element '" + name + "'");
            }
            info.vertex_count = count;
            in_vertex_element = true;
        } else if (word == "property") {
            if (!in_vertex_element) throw FormatError(path.string() + ": property outside element");
            std::string type, name;
            ls >> type >> name;
            if (type != "float") {
                throw FormatError(path.string() + ": property " + name + " has type '" + type +
                                  "' (expected float)");
            }
            info.property_names.push_back(name);
        } else if (word == "end_header") {
            break;
        } else if (word.empty()) {
            continue;
        } else {
            throw FormatError(path.string() + ": unexpected header line '" + line + "'");
        }
    }
    if (!info.binary_little_endian) {
        throw FormatError(path.string() + ": missing format line");
    }
    return info;
}

// Index of `name` in the property list, or FormatError naming the gap.
std::size_t property_index(const PlyHeaderInfo& info, const std::string& name,
                           const std::filesystem::path& path) {
    const auto it = std::find(info.property_names.begin(), info.property_names.end(), name);
    if (it == info.property_names.end()) {
        throw FormatError(path.string() + ": missing property '" + name + "'");
    }
    return static_cast<std::size_t>(it - info.property_names.begin());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

void write_f32(std::ostream& out, float v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(float));
}

} // namespace

PlyHeaderInfo read_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    PlyHeaderInfo info = parse_header(in, path);
    std::size_t rest = 0;
    for (const std::string& n : info.property_names) {
        if (n.rfind("f_rest_", 0) == 0) ++rest;
    }
    // Presence check doubles as the structural validation.
    for (const std::string& n : canonical_properties(0)) {
        if (n.rfind("f_rest_", 0) != 0) property_index(info, n, path);
    }
    info.sh_degree = degree_from_rest(rest);
    return info;
}

SplatModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const PlyHeaderInfo info = parse_header(in, path);

    std::size_t rest = 0;
    for (const std::string& n : info.property_names) {
        if (n.rfind("f_rest_", 0) == 0) ++rest;
    }
    const int degree = degree_from_rest(rest);

    const std::size_t stride = info.property_names.size();
    std::vector<std::size_t> idx;
    for (const std::string& n : canonical_properties(rest)) idx.push_back(property_index(info, n, path));

    std::vector<float> row(stride);
    SplatModel model;
    model.sh_degree = degree;
    model.gaussians.reserve(info.vertex_count);
    for (std::size_t v = 0; v < info.vertex_count; ++v) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(stride * sizeof(float)));
        if (!in) throw FormatError(path.string() + ": truncated vertex block at vertex " + std::to_string(v));
        std::size_t k = 0;
        const auto next = [&] {
            const double val = static_cast<double>(row[idx[k++]]);
            if (!std::isfinite(val)) {
                throw ValueError(path.string() + ": non-finite value in vertex " + std::to_string(v));
            }
            return val;
        };
        // Reads must stay sequenced: never nest next() calls in one expression.
        Gaussian g;
        for (int i = 0; i < 3; ++i) g.position[i] = next();
        next(); next(); next(); // nx, ny, nz carry no information
        g.sh_coeffs.resize(3 + rest);
        for (std::size_t i = 0; i < 3 + rest; ++i) g.sh_coeffs[i] = next();
        const double peak = sigmoid(next());
        for (int i = 0; i < 3; ++i) g.scales[i] = std::exp(next());
        const double qw = next();
        const double qx = next();
        const double qy = next();
        const double qz = next();
        const Quat q(qw, qx, qy, qz);
        if (!(q.norm() > 0.0)) throw ValueError(path.string() + ": zero quaternion in vertex " + std::to_string(v));
        g.rotation = q.normalized();
        // Stored value is the peak amplitude; interior formulas want the
        // weight on a normalized density. |Sigma|^{1/2} = prod(scales).
        g.opacity_mass = peak * kTwoPiPow32 * g.scales.prod();
        model.gaussians.push_back(std::move(g));
    }
    return model;
}

SaveStats save_model(const SplatModel& m, const std::filesystem::path& path) {
    validate(m);
    const std::size_t rest = Gaussian::sh_size(m.sh_degree) - 3;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << m.gaussians.size() << "\n";
    for (const std::string& n : canonical_properties(rest)) out << "property float " << n << "\n";
    out << "end_header\n";

    SaveStats stats;
    for (const Gaussian& g : m.gaussians) {
        double peak = g.opacity_mass / (kTwoPiPow32 * g.scales.prod());
        if (peak < 1e-6 || peak > 1.0 - 1e-6) {
            peak = std::clamp(peak, 1e-6, 1.0 - 1e-6);
            ++stats.clamped_opacities;
        }
        for (int i = 0; i < 3; ++i) write_f32(out, static_cast<float>(g.position[i]));
        for (int i = 0; i < 3; ++i) write_f32(out, 0.0f); // nx, ny, nz
        for (const double c : g.sh_coeffs) write_f32(out, static_cast<float>(c));
        write_f32(out, static_cast<float>(logit(peak)));
        for (int i = 0; i < 3; ++i) write_f32(out, static_cast<float>(std::log(g.scales[i])));
        write_f32(out, static_cast<float>(g.rotation.w()));
        write_f32(out, static_cast<float>(g.rotation.x()));
        write_f32(out, static_cast<float>(g.rotation.y()));
        write_f32(out, static_cast<float>(g.rotation.z()));
    }
    if (!out) throw IoError("failed while writing " + path.string());
    return stats;
}

void export_points(const SplatModel& m, const std::filesystem::path& path) {
    constexpr double kShC0 = 0.2820947918; // Y_0^0, maps f_dc to linear color
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << m.gaussians.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    for (const Gaussian& g : m.gaussians) {
        for (int i = 0; i < 3; ++i) write_f32(out, static_cast<float>(g.position[i]));
        for (int c = 0; c < 3; ++c) {
            const double dc = g.sh_coeffs.size() >= 3 ? g.sh_coeffs[static_cast<std::size_t>(c)] : 0.0;
            const double lin = std::clamp(0.5 + kShC0 * dc, 0.0, 1.0);
            const auto byte = static_cast<std::uint8_t>(std::lround(lin * 255.0));
            out.write(reinterpret_cast<const char*>(&byte), 1);
        }
    }
    if (!out) throw IoError("failed while writing " + path.string());
}

} // namespace gsplit
