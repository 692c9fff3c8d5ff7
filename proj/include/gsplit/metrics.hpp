#pragma once

#include "gsplit/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gsplit {

/// One evaluated Gaussian of an edit: `child` lives on `side` of `plane`
/// and is compared against `parent` (itself for untouched baselines; the
/// Gaussian that was split for our children; a zero-mass copy marks a
/// baseline deletion).
struct SplitRecord {
    Gaussian child;
    Gaussian parent;
    Side side = Side::Negative;
    Plane plane;
};

/// Per-edit quality numbers. split_count is the number of Gaussians produced
/// by splitting (0 for baselines); e_i/e_e are normalized by the record count.
struct EditReport {
    double e_i = 0.0;
    double e_e = 0.0;
    std::size_t split_count = 0;
    std::size_t removed_count = 0;
    std::size_t passthrough_count = 0;
};

/// Mean absolute difference between child and parent opacity mass restricted
/// to each record's half-space. Throws EmptyInputError on no records.
double interval_error(std::span<const SplitRecord> records);

/// Mean opacity mass each record leaks into the half-space opposite its own.
/// Throws EmptyInputError on no records.
double external_excess(std::span<const SplitRecord> records);

/// Monte-Carlo estimate of the negative-side mass of alpha * pdf with its
/// binomial standard error. Deterministic for a fixed seed.
struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

McEstimate mc_halfspace_mass(const Gaussian& g, const Plane& p, std::size_t samples,
                             std::uint64_t seed);

/// Single-line JSON {e_i, e_e, W, removed, passthrough}.
std::string to_json(const EditReport& report);

} // namespace gsplit
