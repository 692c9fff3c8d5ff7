#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace gsplit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// 3x3 symmetric positive semi-definite matrix in scene-units^2.
using Covariance = Eigen::Matrix3d;

/// Which side of a plane, by sign of the directed distance n.x + d.
enum class Side { Negative, Positive };

inline Side opposite(Side s) { return s == Side::Negative ? Side::Positive : Side::Negative; }

/// One anisotropic splat. `scales` are per-axis standard deviations in the
/// splat's own frame (strictly positive); `opacity_mass` is the weight on a
/// normalized pdf, not the peak amplitude stored in splat files.
struct Gaussian {
    Vec3 position = Vec3::Zero();
    Quat rotation = Quat::Identity(); // unit, stored (w,x,y,z)
    Vec3 scales = Vec3::Ones();
    double opacity_mass = 1.0;
    std::vector<double> sh_coeffs; // 3*(L+1)^2 values, dc first then rest

    /// Number of SH coefficients expected for degree L.
    static std::size_t sh_size(int degree) {
        return 3u * static_cast<std::size_t>((degree + 1) * (degree + 1));
    }
};

/// Ordered collection of splats sharing one SH degree.
struct SplatModel {
    std::vector<Gaussian> gaussians;
    int sh_degree = 0;

    std::size_t size() const { return gaussians.size(); }
};

/// Oriented plane {x : normal.x + offset = 0}; `normal` must be unit length.
struct Plane {
    Vec3 normal = Vec3::UnitX();
    double offset = 0.0;
};

/// Directed distance from x to the plane (positive on the normal side).
inline double signed_distance(const Plane& p, const Vec3& x) {
    return p.normal.dot(x) + p.offset;
}

/// Plane with the given unit normal passing through `point`.
inline Plane plane_through(const Vec3& unit_normal, const Vec3& point) {
    return Plane{unit_normal, -unit_normal.dot(point)};
}

/// Sigma = R diag(scales^2) R^T. Symmetric positive definite by construction.
Covariance covariance(const Gaussian& g);

/// Result of sanitizing eigendecomposition: descending scales, proper rotation.
struct Decomposition {
    Quat rotation;
    Vec3 scales; // sorted descending, all >= scale floor
};

/// Eigendecompose a symmetric covariance into rotation + principal scales.
/// Negative eigenvalues are clamped to zero, scales floored at `scale_floor`,
/// and an improper eigenvector matrix (det = -1) is fixed by R <- R det(R).
/// Among the sign choices left free by the decomposition, the one closest to
/// the identity rotation is picked so repeated calls are deterministic.
/// Throws NonSymmetricError when relative asymmetry exceeds 1e-9.
Decomposition decompose(const Covariance& c, double scale_floor = 1e-12);

/// Gaussian with the same position/mass/color but (rotation, scales) rebuilt
/// from `cov` through decompose().
Gaussian with_covariance(const Gaussian& g, const Covariance& cov, double scale_floor = 1e-12);

/// Normalized density (2pi)^{-3/2} |Sigma|^{-1/2} exp(-0.5 (x-mu)^T Sigma^{-1} (x-mu)).
/// Throws SingularCovarianceError when |Sigma| < 1e-300.
double pdf_at(const Gaussian& g, const Vec3& x);

/// Influence-range threshold of `g` along unit direction `dir`:
/// 3 * max(|R^T dir| .* scales). Splits are gated on |d0| < eta.
double influence_threshold(const Gaussian& g, const Vec3& dir);

/// Throws ValueError when a Gaussian violates its invariants (unit rotation
/// within 1e-9, positive scales, non-negative mass, finite fields).
void validate(const Gaussian& g);

/// Validates every splat and the SH coefficient length implied by sh_degree.
void validate(const SplatModel& m);

/// Throws ValueError unless the plane normal is unit within 1e-12.
void validate(const Plane& p);

} // namespace gsplit
