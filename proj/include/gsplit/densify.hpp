#pragma once

#include "gsplit/core.hpp"

#include <array>
#include <cstddef>
#include <utility>

namespace gsplit {

/// Outcome of a homogenization / densification pass. gamma_max and the
/// histogram describe the structural inhomogeneity gamma = max scale over
/// second-largest scale of the FINAL model.
struct InhomogeneityReport {
    static constexpr std::array<double, 6> kHistogramEdges = {1.25, 1.5, 2.0, 3.0, 5.0, 10.0};

    double gamma_max = 1.0;
    std::array<std::size_t, 7> histogram{}; // buckets split at kHistogramEdges
    int split_rounds = 0;
    std::size_t final_count = 0;
    bool rounds_exhausted = false;
};

/// Structural inhomogeneity: largest principal scale over the second
/// largest. 1 for isotropic splats and for two-way ties at the maximum.
double gamma(const Gaussian& g);

/// Histogram/gamma_max summary of a model (rounds fields left zero).
InhomogeneityReport gamma_summary(const SplatModel& m);

/// Pairwise inhomogeneity degrees Tri[i] / (Tri[j] + r_m) for (i,j) in
/// {(0,1),(1,2),(0,2)} with principal scales sorted descending, plus the
/// principal index i of the largest pair.
struct GammaPairs {
    std::array<double, 3> values{};
    int split_component = 0; // i of the largest pair: 0, 1 or 0
};

GammaPairs gamma_ij(const Gaussian& g, double r_m);

/// Round-synchronous training-style pass: every splat with gamma > eta_gamma
/// is split through its own center along its widest principal direction
/// (the simplified d0 = 0 formulas) until all gammas fit or max_rounds runs
/// out. Total zero/first/second moments are conserved.
std::pair<SplatModel, InhomogeneityReport> homogenize(const SplatModel& m, double eta_gamma,
                                                      int max_rounds = 8);

/// Point-cloud extraction pass: R_m (mean of per-splat max scale) is
/// recomputed each round; splats with any gamma_ij > eta_gamma are split at
/// principal component i with the plane offset so d0 = 2 Tri[i].
std::pair<SplatModel, InhomogeneityReport> densify_for_points(const SplatModel& m, double eta_gamma,
                                                              int max_rounds = 8);

} // namespace gsplit
