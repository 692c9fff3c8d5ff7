#pragma once

#include "gsplit/core.hpp"

#include <utility>

namespace gsplit {

/// Scalars of the closed-form split. c_left/c_right are the mass fractions
/// of the two half-spaces, d_amp the update amplitude, l0 = Sigma n the
/// covariance-projected normal, tau the standard deviation of the directed
/// distance, and d0 the directed distance of the center to the plane.
/// c_left, c_right and d_amp carry the 1e-20 offset that keeps later
/// divisions finite, so c_left + c_right = 1 + 1e-20.
struct SplitAuxiliaries {
    double c_left = 0.0;
    double c_right = 0.0;
    double d_amp = 0.0;
    Vec3 l0 = Vec3::Zero();
    double tau = 0.0;
    double d0 = 0.0;
};

SplitAuxiliaries split_aux(const Gaussian& g, const Plane& p);

/// Result of splitting: either a (left, right) pair of children or the
/// untouched original when the plane is outside the influence range.
struct SplitOutcome {
    enum class Kind { Split, PassThrough };
    Kind kind = Kind::PassThrough;
    Gaussian left;     // negative-side child, set when kind == Split
    Gaussian right;    // positive-side child, set when kind == Split
    Gaussian original; // set when kind == PassThrough

    bool did_split() const { return kind == Kind::Split; }
};

/// Split `g` at plane `p` conserving zero-, first- and second-order moments.
/// Passes through when |d0| >= influence_threshold(g, p.normal). Children
/// inherit the parent's SH coefficients and are re-sanitized through
/// decompose(). Throws DegenerateChildError if a child covariance collapses
/// entirely to the scale floor.
SplitOutcome split_at_plane(const Gaussian& g, const Plane& p);

/// The closed-form split with no influence-range gate. Used by passes that
/// pick their own thresholds; plane must still be valid.
std::pair<Gaussian, Gaussian> split_ungated(const Gaussian& g, const Plane& p);

/// Fast path for a plane through the splat center along unit direction
/// `dir` (d0 = 0): mass halves exactly, the mean shifts by sqrt(2/pi)
/// along +-L0/tau and the covariance loses (2/pi) L0 L0^T / tau^2.
std::pair<Gaussian, Gaussian> split_centered(const Gaussian& g, const Vec3& dir);

/// Inverse of the split under the same conservation laws. SH coefficients
/// are averaged with opacity-mass weights. Throws ZeroMassError when the
/// combined mass is not positive.
Gaussian merge(const Gaussian& left, const Gaussian& right);

/// Raw truncated moments of alpha * pdf over one half-space:
/// mass = integral of alpha pdf, first = integral of x alpha pdf,
/// second = integral of x x^T alpha pdf.
struct HalfspaceMoments {
    double mass = 0.0;
    Vec3 first = Vec3::Zero();
    Mat3 second = Mat3::Zero();
};

HalfspaceMoments halfspace_moments(const Gaussian& g, const Plane& p, Side side = Side::Negative);

} // namespace gsplit
