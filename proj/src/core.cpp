#include "gsplit/core.hpp"
#include "gsplit/errors.hpp"

#include <cmath>
#include <limits>

namespace gsplit {

namespace {

constexpr double kTwoPiPow3 = 248.05021344239853; // (2*pi)^3

bool all_finite(const Vec3& v) { return v.allFinite(); }

} // namespace

Covariance covariance(const Gaussian& g) {
    const Mat3 r = g.rotation.toRotationMatrix();
    return r * g.scales.array().square().matrix().asDiagonal() * r.transpose();
}

Decomposition decompose(const Covariance& c, double scale_floor) {
    const double magnitude = c.cwiseAbs().maxCoeff();
    const double asymmetry = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > 1e-9 * std::max(magnitude, 1e-300)) {
        throw NonSymmetricError("decompose: matrix asymmetry " + std::to_string(asymmetry) +
                                " exceeds 1e-9 relative");
    }

    Eigen::SelfAdjointEigenSolver<Mat3> solver((c + c.transpose()) / 2.0);
    if (solver.info() != Eigen::Success) {
        throw NonSymmetricError("decompose: eigensolver failed");
    }

    // Solver returns ascending eigenvalues; reorder descending.
    Vec3 lambda;
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        lambda[i] = solver.eigenvalues()[2 - i];
        r.col(i) = solver.eigenvectors().col(2 - i);
    }

    if (r.determinant() < 0.0) r = -r; // R <- R det(R)

    // Column signs are free; flipping two keeps det = +1. Take the variant
    // with the largest trace, i.e. the smallest rotation from the identity.
    static constexpr int kFlips[4][3] = {{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}};
    int best = 0;
    double best_trace = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        const double trace = kFlips[k][0] * r(0, 0) + kFlips[k][1] * r(1, 1) + kFlips[k][2] * r(2, 2);
        if (trace > best_trace) {
            best_trace = trace;
            best = k;
        }
    }
    for (int i = 0; i < 3; ++i) r.col(i) *= kFlips[best][i];

    Decomposition out;
    for (int i = 0; i < 3; ++i) {
        const double clamped = std::max(lambda[i], 0.0); // ReLU fix for round-off
        out.scales[i] = std::max(std::sqrt(clamped), scale_floor);
    }
    out.rotation = Quat(r).normalized();
    // Quaternions double-cover rotations; fix the sign for determinism.
    if (out.rotation.w() < 0.0 ||
        (out.rotation.w() == 0.0 &&
         (out.rotation.x() < 0.0 ||
          (out.rotation.x() == 0.0 && (out.rotation.y() < 0.0 ||
                                       (out.rotation.y() == 0.0 && out.rotation.z() < 0.0)))))) {
        out.rotation.coeffs() = -out.rotation.coeffs();
    }
    return out;
}

Gaussian with_covariance(const Gaussian& g, const Covariance& cov, double scale_floor) {
    const Decomposition d = decompose(cov, scale_floor);
    Gaussian out = g;
    out.rotation = d.rotation;
    out.scales = d.scales;
    return out;
}

double pdf_at(const Gaussian& g, const Vec3& x) {
    const double det = std::pow(g.scales[0] * g.scales[1] * g.scales[2], 2.0);
    if (!(det >= 1e-300)) {
        throw SingularCovarianceError("pdf_at: |Sigma| = " + std::to_string(det));
    }
    // Quadratic form in the splat's own frame avoids building Sigma^{-1}.
    const Vec3 local = g.rotation.conjugate() * (x - g.position);
    const double quad = (local.array() / g.scales.array()).square().sum();
    return std::exp(-0.5 * quad) / std::sqrt(kTwoPiPow3 * det);
}

double influence_threshold(const Gaussian& g, const Vec3& dir) {
    const Vec3 local = g.rotation.conjugate() * dir;
    return 3.0 * (local.cwiseAbs().array() * g.scales.array()).maxCoeff();
}

void validate(const Gaussian& g) {
    if (!all_finite(g.position) || !all_finite(g.scales) ||
        !g.rotation.coeffs().allFinite() || !std::isfinite(g.opacity_mass)) {
        throw ValueError("gaussian: non-finite field");
    }
    if (std::abs(g.rotation.norm() - 1.0) > 1e-9) {
        throw ValueError("gaussian: rotation norm " + std::to_string(g.rotation.norm()) +
                         " not unit within 1e-9");
    }
    if (!(g.scales.minCoeff() > 0.0)) {
        throw ValueError("gaussian: scales must be strictly positive");
    }
    if (g.opacity_mass < 0.0) {
        throw ValueError("gaussian: opacity_mass must be non-negative");
    }
    for (const double c : g.sh_coeffs) {
        if (!std::isfinite(c)) throw ValueError("gaussian: non-finite sh coefficient");
    }
}

void validate(const SplatModel& m) {
    if (m.sh_degree < 0 || m.sh_degree > 3) {
        throw ValueError("model: sh_degree must be in [0,3]");
    }
    const std::size_t want = Gaussian::sh_size(m.sh_degree);
    for (const Gaussian& g : m.gaussians) {
        validate(g);
        if (g.sh_coeffs.size() != want) {
            throw ValueError("model: sh_coeffs length " + std::to_string(g.sh_coeffs.size()) +
                             " does not match degree " + std::to_string(m.sh_degree));
        }
    }
}

void validate(const Plane& p) {
    if (!all_finite(p.normal) || !std::isfinite(p.offset)) {
        throw ValueError("plane: non-finite field");
    }
    if (std::abs(p.normal.norm() - 1.0) > 1e-12) {
        throw ValueError("plane: normal must be unit within 1e-12");
    }
}

} // namespace gsplit
