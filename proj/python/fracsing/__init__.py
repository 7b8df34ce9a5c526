"""Singular fractional p-Laplacian problems on uniform grids."""

from ._core import (
    AssumptionPolicy,
    CheckResult,
    ConfigError,
    ExponentTable,
    Field,
    FixedPointMethod,
    GridDomain,
    Hyperplane,
    KernelWeights,
    ProblemSpec,
    RunConfig,
    SolveReport,
    SolverConfig,
    apply_operator,
    ball,
    exponents,
    interval,
    known_checks,
    load_config,
    parse_config,
    power_gap_check,
    rectangle,
    seminorm_p,
    solve,
    sup_distance,
    verify,
)

__version__ = "0.1.0"
