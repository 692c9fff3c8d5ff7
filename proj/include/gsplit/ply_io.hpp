#pragma once

#include "gsplit/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gsplit {

/// Parsed splat-PLY header.
struct PlyHeaderInfo {
    std::size_t vertex_count = 0;
    std::vector<std::string> property_names;
    bool binary_little_endian = false;
    int sh_degree = 0;
};

/// Counters reported by save_model.
struct SaveStats {
    std::size_t clamped_opacities = 0;
};

/// Read and validate a splat-PLY header without loading the vertex block.
/// Throws FormatError on structural problems.
PlyHeaderInfo read_header(const std::filesystem::path& path);

/// Load a binary-little-endian splat PLY. Stored fields are mapped to the
/// in-memory convention: scales = exp(scale_i), rotation normalized from
/// (rot_0..3) as (w,x,y,z), and opacity_mass = sigmoid(opacity) *
/// (2 pi)^{3/2} |Sigma|^{1/2} so that interior formulas see a weight on a
/// normalized density. Throws FormatError / ValueError / IoError.
SplatModel load_model(const std::filesystem::path& path);

/// Inverse of load_model, bit-exact under round trip up to float32. Peak
/// opacities are clamped to [1e-6, 1 - 1e-6] before the logit; the number of
/// clamped splats is returned.
SaveStats save_model(const SplatModel& m, const std::filesystem::path& path);

/// Plain point-cloud PLY: one vertex per splat at its position, 8-bit color
/// from the DC SH coefficients.
void export_points(const SplatModel& m, const std::filesystem::path& path);

} // namespace gsplit
