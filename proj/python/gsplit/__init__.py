"""Moment-conserving splitting, editing and densification of 3D Gaussian splat models."""

from ._gsplit import (  # noqa: F401
    DegenerateChildError,
    DegeneratePrismError,
    EmptyInputError,
    FormatError,
    Gaussian,
    GsplitError,
    InvalidValueError,
    IoError,
    NonSymmetricError,
    Plane,
    ProjectionDivergedError,
    SingularCovarianceError,
    SplatModel,
    ZeroMassError,
    apply_edit,
    densify_for_points,
    export_points,
    gamma,
    gamma_ij,
    halfspace_moments,
    homogenize,
    influence_threshold,
    load_model,
    mc_halfspace_mass,
    merge,
    save_model,
    split_at_plane,
    split_centered,
    translate_side,
)

__all__ = [
    "Gaussian",
    "SplatModel",
    "Plane",
    "apply_edit",
    "densify_for_points",
    "export_points",
    "gamma",
    "gamma_ij",
    "halfspace_moments",
    "homogenize",
    "influence_threshold",
    "load_model",
    "mc_halfspace_mass",
    "merge",
    "save_model",
    "split_at_plane",
    "split_centered",
    "translate_side",
    "GsplitError",
    "FormatError",
    "InvalidValueError",
    "IoError",
    "NonSymmetricError",
    "SingularCovarianceError",
    "DegenerateChildError",
    "ZeroMassError",
    "EmptyInputError",
    "DegeneratePrismError",
    "ProjectionDivergedError",
]

__version__ = "0.1.0"
