"""Post-solve structural checks on stored profiles.

Every check here is a pure function of stored artifacts: rerunning on a
loaded archive reproduces the stored verdicts bitwise.  The checks realize
the qualitative structure expected of solutions: translate ordering (or its
failure for multitransition profiles), asymptotic approach to the correct
ground state per side, lattice submodularity of the energy, and the strict
ordering of the computed energy levels.

Translate-ordering passing is a necessary condition for minimality only;
it cannot certify minimality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxmin import SolveReport
from .chains import ChainConfig, GapPair, Ordering, compare, pointwise_min_max, shift
from .energy import GroundLevel, J1_total, J1_window, el_residual
from .problems import TransitionPattern, constraint_slack
from .stencil import StencilPotential

KRANGE_CAP = 512
TAIL_ID_TOL = 1e-9
LEVEL_MARGIN = 1e-6


class TailNotInGap(Exception):
    """A tail constant matches neither gap endpoint."""


class MissingLevel(Exception):
    """A required energy level is absent from the report collection."""


def birkhoff_check(
    u: ChainConfig, k_range: int, eps_ord: float = 1e-9
) -> dict[int, Ordering]:
    """Trichotomy verdict of every translate against the profile.

    Returns compare(shift(u, k), u) for k in [-k_range, k_range] without 0.
    The profile is translate-ordered iff no verdict is CROSSING.
    """
    if k_range < 1:
        raise ValueError("k_range must be >= 1")
    k_range = min(k_range, KRANGE_CAP)
    out: dict[int, Ordering] = {}
    for k in range(-k_range, k_range + 1):
        if k == 0:
            continue
        out[k] = compare(shift(u, k), u, eps_ord)
    return out


def birkhoff_ok(verdicts: dict[int, Ordering]) -> bool:
    return all(v is not Ordering.CROSSING for v in verdicts.values())


@dataclass
class AsymptoticsResult:
    left_target: str
    right_target: str
    left_decay: float
    right_decay: float


def asymptotics_check(
    u: ChainConfig, gap: GapPair, r: int = 1
) -> AsymptoticsResult:
    """Identify the ground state each side approaches, with decay levels.

    The tail constants must coincide with a gap endpoint; the reported
    decay is the worst deviation from that endpoint over the outermost 4r
    window sites of the side.
    """
    def target(tail: float) -> str:
        if abs(tail - gap.v0) <= TAIL_ID_TOL:
            return "v0"
        if abs(tail - gap.w0) <= TAIL_ID_TOL:
            return "w0"
        raise TailNotInGap(f"tail {tail} is neither endpoint of the gap")

    left = target(u.left_tail)
    right = target(u.right_tail)
    phi = {"v0": gap.v0, "w0": gap.w0}
    m = min(4 * r, u.hi - u.lo + 1)
    left_dev = float(np.max(np.abs(u.values[:m] - phi[left])))
    right_dev = float(np.max(np.abs(u.values[-m:] - phi[right])))
    return AsymptoticsResult(left, right, left_dev, right_dev)


def submodularity_audit(
    pot: StencilPotential,
    gap: GapPair,
    trials: int,
    seed: int,
    width: int = 30,
) -> float:
    """Worst lattice-submodularity margin over random in-gap pairs.

    Draws pairs uniform in the order interval on a width-`width` window and
    returns the maximum of J(min) + J(max) - J(u) - J(v) over finite window
    sums; nonpositivity (up to roundoff) is the submodularity of the
    energy.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    r = pot.r
    worst = -np.inf
    for _ in range(trials):
        a = rng.uniform(gap.v0, gap.w0, width)
        b = rng.uniform(gap.v0, gap.w0, width)
        u = ChainConfig(0, width - 1, a, a[0], a[-1])
        v = ChainConfig(0, width - 1, b, b[0], b[-1])
        mn, mx = pointwise_min_max(u, v)
        # The ground level cancels between the two sides of the margin.
        p, q = -2 * r, width - 1 + 2 * r
        margin = (
            J1_window(mn, p, q, pot, 0.0)
            + J1_window(mx, p, q, pot, 0.0)
            - J1_window(u, p, q, pot, 0.0)
            - J1_window(v, p, q, pot, 0.0)
        )
        worst = max(worst, margin)
    return float(worst)


def aligned_distance(
    u: ChainConfig, v: ChainConfig, max_shift: int = 256
) -> float:
    """Sup distance after the best integer translate alignment of u to v."""
    best = np.inf
    for k in range(-max_shift, max_shift + 1):
        w = shift(u, k)
        a = min(w.lo, v.lo) - 2
        b = max(w.hi, v.hi) + 2
        d = float(np.max(np.abs(w.window(a, b) - v.window(a, b))))
        best = min(best, d)
    return best


@dataclass
class DiagnosticsReport:
    """Structural verdicts recomputable from the stored profile."""

    birkhoff_ok: bool
    crossing_shifts: list[int]
    ordering_vs: list[tuple[str, str]]
    submodularity_pass: bool
    submodularity_margin: float
    residual_sup: float
    tail_decay: float
    asymptotic_left: str
    asymptotic_right: str
    min_slack: float | None = None
    strict_constraints: bool | None = None

    def to_dict(self) -> dict:
        return {
            "birkhoff_ok": self.birkhoff_ok,
            "crossing_shifts": list(self.crossing_shifts),
            "ordering_vs": [list(t) for t in self.ordering_vs],
            "submodularity_pass": self.submodularity_pass,
            "submodularity_margin": self.submodularity_margin,
            "residual_sup": self.residual_sup,
            "tail_decay": self.tail_decay,
            "asymptotic_left": self.asymptotic_left,
            "asymptotic_right": self.asymptotic_right,
            "min_slack": self.min_slack,
            "strict_constraints": self.strict_constraints,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiagnosticsReport":
        return cls(
            birkhoff_ok=d["birkhoff_ok"],
            crossing_shifts=[int(k) for k in d["crossing_shifts"]],
            ordering_vs=[tuple(t) for t in d["ordering_vs"]],
            submodularity_pass=d["submodularity_pass"],
            submodularity_margin=d["submodularity_margin"],
            residual_sup=d["residual_sup"],
            tail_decay=d["tail_decay"],
            asymptotic_left=d["asymptotic_left"],
            asymptotic_right=d["asymptotic_right"],
            min_slack=d.get("min_slack"),
            strict_constraints=d.get("strict_constraints"),
        )


def run_diagnostics(
    report: SolveReport,
    gap: GapPair,
    pot: StencilPotential,
    ground: GroundLevel,
    seed: int,
    pattern: TransitionPattern | None = None,
    others: list[SolveReport] | None = None,
    k_range: int | None = None,
    eps_ord: float = 1e-9,
    trials: int = 200,
) -> DiagnosticsReport:
    """Assemble the per-solution diagnostics block."""
    u = report.profile
    if k_range is None:
        k_range = min(2 * (u.hi - u.lo + 1), KRANGE_CAP)
    verdicts = birkhoff_check(u, k_range, eps_ord)
    crossings = sorted(k for k, v in verdicts.items() if v is Ordering.CROSSING)

    asym = asymptotics_check(u, gap, pot.r)

    margin = submodularity_audit(pot, gap, trials, seed)

    res = el_residual(u, pot)
    # Pinned sites carry the constraint force; their residual is reported
    # by the solver, not counted against stationarity.
    pin_sites = set(report.pinned_sites)
    idx = [
        i
        for i, site in enumerate(range(u.lo - pot.r, u.hi + pot.r + 1))
        if site not in pin_sites
    ]
    residual_sup = float(np.max(np.abs(res[idx])))

    er = J1_total(u, pot, ground)
    m = 2 * pot.r
    tail_decay = float(
        max(np.max(np.abs(er.per_site[:m])), np.max(np.abs(er.per_site[-m:])))
    )

    ordering_vs = []
    for other in others or []:
        verdict = compare(u, other.profile, eps_ord)
        ordering_vs.append((other.label, verdict.value))

    min_slack, strict = (None, None)
    if pattern is not None:
        min_slack, strict = constraint_slack(u, pattern, gap)

    return DiagnosticsReport(
        birkhoff_ok=not crossings,
        crossing_shifts=crossings,
        ordering_vs=ordering_vs,
        submodularity_pass=margin <= 1e-12,
        submodularity_margin=margin,
        residual_sup=residual_sup,
        tail_decay=tail_decay,
        asymptotic_left=asym.left_target,
        asymptotic_right=asym.right_target,
        min_slack=min_slack,
        strict_constraints=strict,
    )


@dataclass
class EnergyLevels:
    """Tabulated energy levels with their strict-ordering checks."""

    c1_up: float
    c1_down: float
    d1_up: float | None
    d1_down: float | None
    b_levels: dict[str, float] = field(default_factory=dict)
    b_bounds: dict[str, float] = field(default_factory=dict)
    checks: list[tuple[str, bool, float]] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def to_dict(self) -> dict:
        return {
            "c1_up": self.c1_up,
            "c1_down": self.c1_down,
            "d1_up": self.d1_up,
            "d1_down": self.d1_down,
            "b_levels": dict(self.b_levels),
            "b_bounds": dict(self.b_bounds),
            "checks": [list(c) for c in self.checks],
        }


def level_summary(reports: list[SolveReport]) -> EnergyLevels:
    """Tabulate front, pinned and multitransition levels; check ordering.

    Requires both basic front levels.  Asserted with margin: the front
    level sum is strictly positive, each pinned level strictly exceeds its
    front level, and each multitransition level stays at or below its
    concatenation bound while dominating the larger front level.
    """
    by_label: dict[str, SolveReport] = {}
    b_reports: list[SolveReport] = []
    for rep in reports:
        if rep.label.startswith("b:"):
            b_reports.append(rep)
        elif rep.label in ("c1_up", "c1_down", "d1_up", "d1_down"):
            by_label.setdefault(rep.label, rep)

    for need in ("c1_up", "c1_down"):
        if need not in by_label:
            raise MissingLevel(f"missing level {need}")
    c1_up = by_label["c1_up"].energy
    c1_down = by_label["c1_down"].energy
    d1_up = by_label["d1_up"].energy if "d1_up" in by_label else None
    d1_down = by_label["d1_down"].energy if "d1_down" in by_label else None

    checks: list[tuple[str, bool, float]] = []
    s = c1_up + c1_down
    checks.append(("front_level_sum_positive", s >= LEVEL_MARGIN, s))
    if d1_up is not None:
        margin = d1_up - c1_up
        checks.append(("pinned_up_exceeds_front", margin >= LEVEL_MARGIN, margin))
    if d1_down is not None:
        margin = d1_down - c1_down
        checks.append(("pinned_down_exceeds_front", margin >= LEVEL_MARGIN, margin))

    b_levels: dict[str, float] = {}
    b_bounds: dict[str, float] = {}
    for rep in b_reports:
        b_levels[rep.label] = rep.energy
        if rep.init_energy is not None:
            b_bounds[rep.label] = rep.init_energy
            margin = rep.init_energy - rep.energy
            checks.append(
                (f"{rep.label}:below_concat_bound", margin >= -1e-12, margin)
            )
        margin = rep.energy - max(c1_up, c1_down)
        checks.append(
            (f"{rep.label}:dominates_front_level", margin >= -1e-9, margin)
        )

    return EnergyLevels(
        c1_up=c1_up,
        c1_down=c1_down,
        d1_up=d1_up,
        d1_down=d1_down,
        b_levels=b_levels,
        b_bounds=b_bounds,
        checks=checks,
    )
