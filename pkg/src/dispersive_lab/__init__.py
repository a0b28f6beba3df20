"""Numerical laboratory for one-dimensional dispersive estimates.

Subpackages cover the periodic-box spectral substrate, dyadic Morrey and
hat-Morrey norms, Whitney frequency regions with their almost-orthogonal
enlargements, Strichartz-exponent arithmetic, the Airy propagator, a
pseudo-spectral gKdV solver, and the scaling/translation/time-shift
deformation group with bubble extraction.
"""

from .airy import (
    CutoffSpec,
    MultiplierBoundSpec,
    RawBand,
    airy_field,
    airy_flow,
    apply_band_multiplier,
    evaluate_cutoff,
    make_cutoff,
    mollifier,
    multiplier_bound_ratio,
    wraparound_horizon,
)
from .dyadic import (
    BilinearRegion,
    DyadicInterval,
    EnlargedRegion,
    FrequencyPoint,
    OverlapCount,
    canonical_margin,
    enumerate_overlaps,
    interval_bounds,
    locate_whitney,
    overlap_count,
    overlap_counts_bulk,
    region_contains,
    whitney_cover_matches,
    whitney_related,
    write_overlap_audit,
)
from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DispersiveLabError,
    HorizonError,
    HorizonWarning,
    InstabilityError,
    ParameterError,
    ResolutionError,
    ZeroFrequencySingularity,
)
from .exponents import (
    ClassicalPair,
    LwpParams,
    SpaceOuterRefinement,
    TimeOuterRefinement,
    classical_exponents,
    lwp_params,
    refine_space_outer,
    refine_time_outer,
    space_norm_spec,
)
from .families import FAMILY_KINDS, SUPPORT_TAIL_TOL, TestFamily, box_support_tail
from .gkdv import (
    DIAGNOSTIC_NAMES,
    INTEGRATORS,
    SolverConfig,
    Trajectory,
    conserved_report,
    duhamel_residual,
    evolve,
    scattering_profile,
    sds_threshold,
    solver_config_from_mapping,
    soliton_profile,
    soliton_residual,
    stability_experiment,
    stability_scaling,
    trajectory_field,
)
from .inequality import (
    BandBoundContext,
    BandInterpolationContext,
    EvalDomain,
    InequalitySpec,
    OverlapAuditConfig,
    RatioReport,
    build_spec,
    builtin_catalog,
    dyadic_projection,
    overlap_audit,
    ratio,
    sweep,
)
from .morrey import (
    LatticeTruncation,
    MorreyParams,
    embedding_gap,
    hat_lebesgue_norm,
    hat_morrey_norm,
    morrey_norm,
    norm_report,
)
from .spectral import (
    FrequencyFunction,
    GridFunction,
    MixedNormSpec,
    SpaceTimeField,
    fractional_derivative,
    inverse_transform,
    lebesgue_norm,
    mixed_spacetime_norm,
    transform,
    transform_pair,
)

__version__ = "0.1.0"

__all__ = [
    "BandBoundContext",
    "BandInterpolationContext",
    "BilinearRegion",
    "DyadicInterval",
    "ClassicalPair",
    "ConfigurationError",
    "CutoffSpec",
    "DIAGNOSTIC_NAMES",
    "DegenerateDataError",
    "DispersiveLabError",
    "EnlargedRegion",
    "EvalDomain",
    "FAMILY_KINDS",
    "FrequencyPoint",
    "FrequencyFunction",
    "GridFunction",
    "HorizonError",
    "HorizonWarning",
    "INTEGRATORS",
    "InequalitySpec",
    "InstabilityError",
    "MultiplierBoundSpec",
    "OverlapAuditConfig",
    "RatioReport",
    "RawBand",
    "LatticeTruncation",
    "LwpParams",
    "MixedNormSpec",
    "MorreyParams",
    "OverlapCount",
    "ParameterError",
    "ResolutionError",
    "SUPPORT_TAIL_TOL",
    "SolverConfig",
    "SpaceOuterRefinement",
    "SpaceTimeField",
    "TestFamily",
    "TimeOuterRefinement",
    "Trajectory",
    "ZeroFrequencySingularity",
    "__version__",
    "airy_field",
    "airy_flow",
    "apply_band_multiplier",
    "box_support_tail",
    "build_spec",
    "builtin_catalog",
    "canonical_margin",
    "conserved_report",
    "duhamel_residual",
    "enumerate_overlaps",
    "classical_exponents",
    "dyadic_projection",
    "evaluate_cutoff",
    "evolve",
    "embedding_gap",
    "fractional_derivative",
    "hat_lebesgue_norm",
    "hat_morrey_norm",
    "interval_bounds",
    "inverse_transform",
    "lebesgue_norm",
    "locate_whitney",
    "lwp_params",
    "make_cutoff",
    "mixed_spacetime_norm",
    "mollifier",
    "morrey_norm",
    "multiplier_bound_ratio",
    "norm_report",
    "overlap_audit",
    "overlap_count",
    "overlap_counts_bulk",
    "ratio",
    "refine_space_outer",
    "refine_time_outer",
    "region_contains",
    "scattering_profile",
    "sds_threshold",
    "solver_config_from_mapping",
    "soliton_profile",
    "soliton_residual",
    "space_norm_spec",
    "stability_experiment",
    "stability_scaling",
    "sweep",
    "trajectory_field",
    "transform",
    "transform_pair",
    "whitney_cover_matches",
    "whitney_related",
    "wraparound_horizon",
    "write_overlap_audit",
]
