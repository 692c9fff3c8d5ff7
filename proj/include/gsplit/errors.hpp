#pragma once

#include <stdexcept>
#include <string>

namespace gsplit {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported file structure (bad PLY header, wrong encoding).
struct FormatError : Error {
    using Error::Error;
};

/// A value violates a domain invariant (non-finite field, bad quaternion...).
struct ValueError : Error {
    using Error::Error;
};

/// Filesystem-level failure while reading or writing.
struct IoError : Error {
    using Error::Error;
};

/// Matrix handed to decompose() is not symmetric within tolerance.
struct NonSymmetricError : Error {
    using Error::Error;
};

/// Covariance determinant too small to evaluate a density.
struct SingularCovarianceError : Error {
    using Error::Error;
};

/// A split produced a child whose covariance collapsed to the scale floor.
struct DegenerateChildError : Error {
    using Error::Error;
};

/// merge() called with non-positive total opacity mass.
struct ZeroMassError : Error {
    using Error::Error;
};

/// Metric evaluated over an empty record set.
struct EmptyInputError : Error {
    using Error::Error;
};

/// Prism with a zero-area triangle or an axis parallel to the triangle plane.
struct DegeneratePrismError : Error {
    using Error::Error;
};

/// Closest-point iteration on a generic implicit surface failed to converge.
struct ProjectionDivergedError : Error {
    using Error::Error;
};

} // namespace gsplit
