"""Multitransition solver for generalized Frenkel-Kontorova chains.

Computes uniform ground states and their gaps, basic front profiles
between adjacent ground states, pinned front levels, and constrained
multitransition profiles (homoclinic and heteroclinic), together with
structural diagnostics of every solution.
"""

from .archive import SCHEMA_VERSION, SolutionArchive
from .boxmin import (
    ConstraintBox,
    NoConvergence,
    SolveReport,
    gauss_seidel_sweep,
    minimize,
)
from .chains import (
    ChainConfig,
    GapPair,
    Ordering,
    compare,
    pointwise_min_max,
    shift,
)
from .diagnostics import (
    DiagnosticsReport,
    EnergyLevels,
    MissingLevel,
    TailNotInGap,
    aligned_distance,
    asymptotics_check,
    birkhoff_check,
    birkhoff_ok,
    level_summary,
    run_diagnostics,
    submodularity_audit,
)
from .energy import (
    EnergyReport,
    GroundLevel,
    TailNotMinimal,
    J1_total,
    J1_window,
    compute_c0,
    el_residual,
    gradient,
)
from .problems import (
    DegenerateFront,
    GapConditionFailed,
    HeteroclinicFamily,
    PatternWindowMismatch,
    RhoSelectionFailed,
    TransitionKind,
    TransitionPattern,
    build_constraints,
    choose_rho,
    concatenate_fronts,
    default_window,
    find_heteroclinic,
    find_periodic_and_gap,
    solve_multitransition,
    solve_pinned,
    solve_pinned_level,
)
from .stencil import (
    HypothesisReport,
    StencilIndex,
    StencilPotential,
    check_hypotheses,
    make_fk_example,
    make_table_example,
)

__version__ = "0.1.0"

__all__ = [
    "SCHEMA_VERSION",
    "SolutionArchive",
    "ConstraintBox",
    "NoConvergence",
    "SolveReport",
    "gauss_seidel_sweep",
    "minimize",
    "ChainConfig",
    "GapPair",
    "Ordering",
    "compare",
    "pointwise_min_max",
    "shift",
    "DiagnosticsReport",
    "EnergyLevels",
    "MissingLevel",
    "TailNotInGap",
    "aligned_distance",
    "asymptotics_check",
    "birkhoff_check",
    "birkhoff_ok",
    "level_summary",
    "run_diagnostics",
    "submodularity_audit",
    "EnergyReport",
    "GroundLevel",
    "TailNotMinimal",
    "J1_total",
    "J1_window",
    "compute_c0",
    "el_residual",
    "gradient",
    "DegenerateFront",
    "GapConditionFailed",
    "HeteroclinicFamily",
    "PatternWindowMismatch",
    "RhoSelectionFailed",
    "TransitionKind",
    "TransitionPattern",
    "build_constraints",
    "choose_rho",
    "concatenate_fronts",
    "default_window",
    "find_heteroclinic",
    "find_periodic_and_gap",
    "solve_multitransition",
    "solve_pinned",
    "solve_pinned_level",
    "HypothesisReport",
    "StencilIndex",
    "StencilPotential",
    "check_hypotheses",
    "make_fk_example",
    "make_table_example",
]
