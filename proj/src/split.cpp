#include "gsplit/split.hpp"
#include "gsplit/errors.hpp"

#include <cmath>

namespace gsplit {

namespace {

constexpr double kEps = 1e-20;
constexpr double kInvSqrt2Pi = 0.3989422804014327; // 1/sqrt(2*pi)
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kScaleFloor = 1e-12;

bool at_floor(const Vec3& scales) { return scales.maxCoeff() <= kScaleFloor; }

// Children keep everything from the parent except the second moment, which
// is rebuilt from the (possibly indefinite) closed-form covariance.
Gaussian make_child(const Gaussian& parent, double mass, const Vec3& mean, const Covariance& cov) {
    Gaussian child = with_covariance(parent, cov, kScaleFloor);
    child.position = mean;
    child.opacity_mass = mass;
    if (at_floor(child.scales)) {
        throw DegenerateChildError("split: child covariance collapsed to the scale floor");
    }
    return child;
}

} // namespace

SplitAuxiliaries split_aux(const Gaussian& g, const Plane& p) {
    const Covariance sigma = covariance(g);
    SplitAuxiliaries aux;
    aux.l0 = sigma * p.normal;
    aux.tau = std::sqrt(p.normal.dot(aux.l0));
    aux.d0 = signed_distance(p, g.position);
    const double u = aux.d0 / (kSqrt2 * aux.tau);
    aux.c_left = 0.5 * (1.0 - std::erf(u) + kEps);
    aux.c_right = 0.5 * (1.0 + std::erf(u) + kEps);
    aux.d_amp = kInvSqrt2Pi * (std::exp(-aux.d0 * aux.d0 / (2.0 * aux.tau * aux.tau)) + kEps);
    return aux;
}

std::pair<Gaussian, Gaussian> split_ungated(const Gaussian& g, const Plane& p) {
    const Covariance sigma = covariance(g);
    const SplitAuxiliaries aux = split_aux(g, p);
    const Vec3 shift = aux.l0 / aux.tau; // tau * regression direction
    const Mat3 outer = aux.l0 * aux.l0.transpose() / (aux.tau * aux.tau);
    const double ratio_l = aux.d_amp / aux.c_left;
    const double ratio_r = aux.d_amp / aux.c_right;

    const Vec3 mean_l = g.position - shift * ratio_l;
    const Vec3 mean_r = g.position + shift * ratio_r;
    const Covariance cov_l = sigma + outer * (aux.d0 * ratio_l / aux.tau - ratio_l * ratio_l);
    const Covariance cov_r = sigma - outer * (aux.d0 * ratio_r / aux.tau + ratio_r * ratio_r);

    return {make_child(g, g.opacity_mass * aux.c_left, mean_l, cov_l),
            make_child(g, g.opacity_mass * aux.c_right, mean_r, cov_r)};
}

SplitOutcome split_at_plane(const Gaussian& g, const Plane& p) {
    SplitOutcome out;
    const double d0 = signed_distance(p, g.position);
    if (std::abs(d0) >= influence_threshold(g, p.normal)) {
        out.kind = SplitOutcome::Kind::PassThrough;
        out.original = g;
        return out;
    }
    auto [left, right] = split_ungated(g, p);
    out.kind = SplitOutcome::Kind::Split;
    out.left = std::move(left);
    out.right = std::move(right);
    return out;
}

std::pair<Gaussian, Gaussian> split_centered(const Gaussian& g, const Vec3& dir) {
    const Covariance sigma = covariance(g);
    const Vec3 l0 = sigma * dir;
    const double tau = std::sqrt(dir.dot(l0));
    // d0 = 0: C_l = C_r = 1/2, D = 1/sqrt(2*pi), first covariance term drops.
    const double two_over_pi = 4.0 * kInvSqrt2Pi * kInvSqrt2Pi; // D^2 / C^2
    const Vec3 shift = (2.0 * kInvSqrt2Pi / tau) * l0;          // sqrt(2/pi) L0 / tau
    const Covariance cov = sigma - (two_over_pi / (tau * tau)) * (l0 * l0.transpose());
    const double mass = 0.5 * g.opacity_mass;
    return {make_child(g, mass, g.position - shift, cov),
            make_child(g, mass, g.position + shift, cov)};
}

Gaussian merge(const Gaussian& left, const Gaussian& right) {
    const double mass = left.opacity_mass + right.opacity_mass;
    if (!(mass > 0.0)) {
        throw ZeroMassError("merge: combined opacity mass must be positive");
    }
    if (left.sh_coeffs.size() != right.sh_coeffs.size()) {
        throw ValueError("merge: children carry different SH coefficient counts");
    }
    const double w_l = left.opacity_mass / mass;
    const double w_r = right.opacity_mass / mass;

    Gaussian out = left;
    out.opacity_mass = mass;
    out.position = w_l * left.position + w_r * right.position;
    const Covariance second = w_l * (covariance(left) + left.position * left.position.transpose()) +
                              w_r * (covariance(right) + right.position * right.position.transpose());
    const Covariance cov = second - out.position * out.position.transpose();
    for (std::size_t i = 0; i < out.sh_coeffs.size(); ++i) {
        out.sh_coeffs[i] = w_l * left.sh_coeffs[i] + w_r * right.sh_coeffs[i];
    }
    return with_covariance(out, cov, kScaleFloor);
}

HalfspaceMoments halfspace_moments(const Gaussian& g, const Plane& p, Side side) {
    const Covariance sigma = covariance(g);
    const Vec3 l0 = sigma * p.normal;
    const double tau = std::sqrt(p.normal.dot(l0));
    const double d0 = signed_distance(p, g.position);
    const double u = d0 / (kSqrt2 * tau);
    const double cdf = side == Side::Negative ? 0.5 * (1.0 - std::erf(u)) : 0.5 * (1.0 + std::erf(u));
    const double dens = kInvSqrt2Pi * std::exp(-d0 * d0 / (2.0 * tau * tau));
    const double sgn = side == Side::Negative ? -1.0 : 1.0;

    // Written so no term divides by the (possibly vanishing) mass fraction.
    const Mat3 cross = (g.position * l0.transpose() + l0 * g.position.transpose()) / tau -
                       (d0 / (tau * tau * tau)) * (l0 * l0.transpose());
    HalfspaceMoments m;
    m.mass = g.opacity_mass * cdf;
    m.first = g.opacity_mass * (cdf * g.position + sgn * (dens / tau) * l0);
    m.second = g.opacity_mass *
               (cdf * (sigma + g.position * g.position.transpose()) + sgn * dens * cross);
    return m;
}

} // namespace gsplit
