#include "gsplit/metrics.hpp"
#include "gsplit/errors.hpp"
#include "gsplit/parallel.hpp"
#include "gsplit/split.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace gsplit {

namespace {

double reduce_mean(std::span<const SplitRecord> records, double (*term)(const SplitRecord&)) {
    if (records.empty()) {
        throw EmptyInputError("metrics: no records to evaluate");
    }
    std::vector<double> terms(records.size());
    parallel_for(records.size(), [&](std::size_t i) { terms[i] = term(records[i]); });
    double sum = 0.0;
    for (const double t : terms) sum += t; // sequential for determinism
    return sum / static_cast<double>(records.size());
}

} // namespace

double interval_error(std::span<const SplitRecord> records) {
    return reduce_mean(records, [](const SplitRecord& r) {
        const double child_mass = halfspace_moments(r.child, r.plane, r.side).mass;
        const double parent_mass = halfspace_moments(r.parent, r.plane, r.side).mass;
        return std::abs(child_mass - parent_mass);
    });
}

double external_excess(std::span<const SplitRecord> records) {
    return reduce_mean(records, [](const SplitRecord& r) {
        return halfspace_moments(r.child, r.plane, opposite(r.side)).mass;
    });
}

McEstimate mc_halfspace_mass(const Gaussian& g, const Plane& p, std::size_t samples,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit;
    const Mat3 rot = g.rotation.toRotationMatrix();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec3 z(unit(rng), unit(rng), unit(rng));
        const Vec3 x = g.position + rot * (g.scales.array() * z.array()).matrix();
        if (signed_distance(p, x) < 0.0) ++hits;
    }
    const double n = static_cast<double>(samples);
    const double frac = static_cast<double>(hits) / n;
    McEstimate out;
    out.estimate = g.opacity_mass * frac;
    out.std_error = g.opacity_mass * std::sqrt(frac * (1.0 - frac) / n);
    return out;
}

std::string to_json(const EditReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"e_i\":" << report.e_i << ",\"e_e\":" << report.e_e
       << ",\"W\":" << report.split_count << ",\"removed\":" << report.removed_count
       << ",\"passthrough\":" << report.passthrough_count << "}";
    return os.str();
}

} // namespace gsplit
