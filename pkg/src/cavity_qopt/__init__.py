"""Resonances of one-dimensional layered cavities and their optimization.

The package computes quasi-normal frequencies of a string/slab with
piecewise-constant coefficient ``B`` on a finite interval with radiating
ends, and optimizes the decay rate over all structures confined between
two constraint profiles.  The main building blocks:

* :mod:`cavity_qopt.model` — intervals, step functions, boundary data,
  admissible families.
* :mod:`cavity_qopt.spectrum` — transfer-matrix propagation, the
  characteristic function and its zeros, closed forms for uniform
  structures, turning intervals.
* :mod:`cavity_qopt.perturbation` — resonance sensitivities and
  branch-splitting predictions with finite-difference cross-checks.
* :mod:`cavity_qopt.bangbang` — the sign-switching field whose
  eigenpairs carry every locally optimal resonance, with structure
  recovery.
* :mod:`cavity_qopt.optimize` — spectral-curve scans, minimal decay at
  fixed frequency, Pareto sweeps, zero-frequency closed forms, and
  guaranteed-frequency thresholds.
* :mod:`cavity_qopt.config` / :mod:`cavity_qopt.cli` — JSON problem
  descriptions and the ``cavity-qopt`` command.
"""

from .errors import (
    AmbiguousBranch,
    CavityError,
    CaseNotCovered,
    ConfigError,
    ConstraintOrderViolation,
    ContourTooCloseToZero,
    DegenerateDenominator,
    EmptyConstraintGap,
    HypothesisViolated,
    JacobianSingular,
    MasslessNeumann,
    MismatchedInterval,
    NewtonDivergence,
    NoConvergence,
    NoRootFound,
    NotAResonance,
    NotBangbangReady,
    RoundTripFailure,
    UpperHalfPlaneZ,
    ZeroDenominator,
)
from .model import (
    AdmissibleFamily,
    BoundaryParams,
    Interval,
    PiecewiseConstant,
    ResonatorConfig,
    StepFunction,
    WaveState,
    check_constraint_order,
    merge_equal_pieces,
    refine_breakpoints,
    validate_family,
)
from .spectrum import (
    HomogeneousSpectrumParams,
    Rect,
    Resonance,
    SpectrumKind,
    TurningInterval,
    char_F,
    char_F_grid,
    classify_homogeneous,
    count_zeros_winding,
    dF_dz,
    find_resonances,
    homogeneous_spectrum,
    propagate_layer,
    theta_at,
    theta_eval,
    turning_interval,
)
from .perturbation import (
    Direction,
    PerturbationPrediction,
    SweepRow,
    dF_dB,
    hausdorff,
    perturbation_sweep,
    perturbed_profile,
    splitting_K,
)
from .bangbang import (
    BoundaryKind,
    F_nl,
    NlEigenpair,
    RegionKind,
    RegionTrace,
    recover_structure,
    solve_bangbang_ivp,
    theta_nl,
)
from .optimize import (
    DEFAULT_TOL,
    ParetoPoint,
    RefinedRoot,
    ScanCluster,
    ScanGrid,
    ScanPoint,
    ScanResult,
    Statistic,
    ThresholdCase,
    admissible_thresholds,
    beta_min,
    beta_min_zero,
    cluster_scan_points,
    homogeneous_witness,
    pareto_sweep,
    refine_nl_root,
    scan_nl_spectrum,
    verify_pareto_point,
)
from .config import LoadedConfig, ScanSettings, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "AmbiguousBranch", "CavityError", "CaseNotCovered", "ConfigError",
    "ConstraintOrderViolation", "ContourTooCloseToZero",
    "DegenerateDenominator", "EmptyConstraintGap", "HypothesisViolated",
    "JacobianSingular", "MasslessNeumann", "MismatchedInterval",
    "NewtonDivergence", "NoConvergence", "NoRootFound", "NotAResonance",
    "NotBangbangReady", "RoundTripFailure", "UpperHalfPlaneZ",
    "ZeroDenominator",
    "AdmissibleFamily", "BoundaryParams", "Interval", "PiecewiseConstant",
    "ResonatorConfig", "StepFunction", "WaveState", "check_constraint_order",
    "merge_equal_pieces", "refine_breakpoints", "validate_family",
    "HomogeneousSpectrumParams", "Rect", "Resonance", "SpectrumKind",
    "TurningInterval", "char_F", "char_F_grid", "classify_homogeneous",
    "count_zeros_winding", "dF_dz", "find_resonances",
    "homogeneous_spectrum", "propagate_layer", "theta_at", "theta_eval",
    "turning_interval",
    "Direction", "PerturbationPrediction", "SweepRow", "dF_dB", "hausdorff",
    "perturbation_sweep", "perturbed_profile", "splitting_K",
    "BoundaryKind", "F_nl", "NlEigenpair", "RegionKind", "RegionTrace",
    "recover_structure", "solve_bangbang_ivp", "theta_nl",
    "DEFAULT_TOL", "ParetoPoint", "RefinedRoot", "ScanCluster", "ScanGrid",
    "ScanPoint", "ScanResult", "Statistic", "ThresholdCase",
    "admissible_thresholds", "beta_min", "beta_min_zero",
    "cluster_scan_points", "homogeneous_witness", "pareto_sweep",
    "refine_nl_root", "scan_nl_spectrum", "verify_pareto_point",
    "LoadedConfig", "ScanSettings", "load_config", "parse_config",
    "__version__",
]
