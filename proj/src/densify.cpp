#include "gsplit/densify.hpp"
#include "gsplit/parallel.hpp"
#include "gsplit/split.hpp"

#include <algorithm>
#include <cmath>

namespace gsplit {

namespace {

// Principal scales sorted descending together with their axis indices.
struct SortedScales {
    std::array<double, 3> value;
    std::array<int, 3> axis;
};

SortedScales sorted_scales(const Gaussian& g) {
    SortedScales s{{g.scales[0], g.scales[1], g.scales[2]}, {0, 1, 2}};
    for (int i = 0; i < 2; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (s.value[j] > s.value[i]) {
                std::swap(s.value[i], s.value[j]);
                std::swap(s.axis[i], s.axis[j]);
            }
        }
    }
    return s;
}

Vec3 principal_direction(const Gaussian& g, int axis) {
    return g.rotation.toRotationMatrix().col(axis);
}

void fill_summary(const SplatModel& m, InhomogeneityReport& report) {
    report.final_count = m.gaussians.size();
    report.gamma_max = 1.0;
    report.histogram.fill(0);
    for (const Gaussian& g : m.gaussians) {
        const double y = gamma(g);
        report.gamma_max = std::max(report.gamma_max, y);
        std::size_t bucket = 0;
        while (bucket < InhomogeneityReport::kHistogramEdges.size() &&
               y >= InhomogeneityReport::kHistogramEdges[bucket]) {
            ++bucket;
        }
        ++report.histogram[bucket];
    }
}

// Replace each flagged splat by its two children, children in place of the
// parent (left then right) so output ordering stays deterministic.
template <typename SplitFn>
SplatModel split_flagged(const SplatModel& m, const std::vector<char>& flagged, SplitFn&& split_one) {
    std::vector<std::pair<Gaussian, Gaussian>> pairs(m.gaussians.size());
    parallel_for(m.gaussians.size(), [&](std::size_t i) {
        if (flagged[i]) pairs[i] = split_one(m.gaussians[i]);
    });
    SplatModel next;
    next.sh_degree = m.sh_degree;
    next.gaussians.reserve(m.gaussians.size() * 2);
    for (std::size_t i = 0; i < m.gaussians.size(); ++i) {
        if (flagged[i]) {
            next.gaussians.push_back(std::move(pairs[i].first));
            next.gaussians.push_back(std::move(pairs[i].second));
        } else {
            next.gaussians.push_back(m.gaussians[i]);
        }
    }
    return next;
}

} // namespace

double gamma(const Gaussian& g) {
    const SortedScales s = sorted_scales(g);
    return s.value[0] / s.value[1];
}

InhomogeneityReport gamma_summary(const SplatModel& m) {
    InhomogeneityReport report;
    fill_summary(m, report);
    return report;
}

GammaPairs gamma_ij(const Gaussian& g, double r_m) {
    const SortedScales s = sorted_scales(g);
    GammaPairs out;
    out.values[0] = s.value[0] / (s.value[1] + r_m); // (0,1)
    out.values[1] = s.value[1] / (s.value[2] + r_m); // (1,2)
    out.values[2] = s.value[0] / (s.value[2] + r_m); // (0,2)
    static constexpr int kPairFirst[3] = {0, 1, 0};
    int best = 0;
    for (int k = 1; k < 3; ++k) {
        if (out.values[k] > out.values[best]) best = k;
    }
    out.split_component = kPairFirst[best];
    return out;
}

std::pair<SplatModel, InhomogeneityReport> homogenize(const SplatModel& m, double eta_gamma,
                                                      int max_rounds) {
    SplatModel current = m;
    InhomogeneityReport report;
    for (int round = 0; round < max_rounds; ++round) {
        std::vector<char> flagged(current.gaussians.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i < current.gaussians.size(); ++i) {
            if (gamma(current.gaussians[i]) > eta_gamma) {
                flagged[i] = 1;
                any = true;
            }
        }
        if (!any) break;
        current = split_flagged(current, flagged, [](const Gaussian& g) {
            const int axis = sorted_scales(g).axis[0];
            return split_centered(g, principal_direction(g, axis));
        });
        ++report.split_rounds;
    }
    fill_summary(current, report);
    report.rounds_exhausted = report.gamma_max > eta_gamma;
    return {std::move(current), report};
}

std::pair<SplatModel, InhomogeneityReport> densify_for_points(const SplatModel& m, double eta_gamma,
                                                              int max_rounds) {
    SplatModel current = m;
    InhomogeneityReport report;
    for (;;) {
        double r_m = 0.0;
        for (const Gaussian& g : current.gaussians) r_m += g.scales.maxCoeff();
        if (!current.gaussians.empty()) r_m /= static_cast<double>(current.gaussians.size());

        std::vector<char> flagged(current.gaussians.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i < current.gaussians.size(); ++i) {
            const GammaPairs pairs = gamma_ij(current.gaussians[i], r_m);
            if (*std::max_element(pairs.values.begin(), pairs.values.end()) > eta_gamma) {
                flagged[i] = 1;
                any = true;
            }
        }
        if (!any || report.split_rounds >= max_rounds) {
            report.rounds_exhausted = any;
            break;
        }
        current = split_flagged(current, flagged, [r_m](const Gaussian& g) {
            const GammaPairs pairs = gamma_ij(g, r_m);
            const SortedScales s = sorted_scales(g);
            const int axis = s.axis[pairs.split_component];
            const Vec3 n = principal_direction(g, axis);
            // Offset the plane so d0 = 2 Tri[i], toward the positive side.
            const Plane plane{n, 2.0 * s.value[pairs.split_component] - n.dot(g.position)};
            return split_ungated(g, plane);
        });
        ++report.split_rounds;
    }
    fill_summary(current, report);
    return {std::move(current), report};
}

} // namespace gsplit
