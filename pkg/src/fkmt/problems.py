"""Named variational problems over the gap between adjacent ground states.

Builds and solves, in order of dependency: detection of an adjacent pair of
uniform ground states (the gap), the two basic front profiles connecting
them (ascending and descending), selection of constraint radii avoided by
every computed front translate, pinned variants whose minimal energy
strictly exceeds the free front level, and multitransition profiles whose
admissible set is the order interval tightened on marker-indexed regions.

Multitransition minimizers are found by descending from a concatenation of
shifted basic fronts, which also furnishes the reference upper bound for
the constrained level.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .boxmin import (
    ConstraintBox,
    NoConvergence,
    SolveReport,
    minimize,
)
from .chains import ChainConfig, GapPair, shift
from .energy import GroundLevel, compute_c0, el_residual
from .stencil import StencilPotential

EL_CONST_TOL = 1e-10
RHO_CLEARANCE = 1e-6
FRONT_WINDOW = (-60, 60)


class GapConditionFailed(Exception):
    """No adjacent pair of isolated uniform ground states exists."""


class DegenerateFront(Exception):
    """A front solve collapsed to a constant profile."""


class RhoSelectionFailed(Exception):
    """Sampled front values are too dense to place a constraint radius."""


class PatternWindowMismatch(Exception):
    """Solve window does not cover the constraint regions with margin."""


class TransitionKind(Enum):
    HOMOCLINIC_V0_2K = "homoclinic_v0_2k"
    HOMOCLINIC_W0_2K = "homoclinic_w0_2k"
    HETEROCLINIC_V0_W0_2K1 = "heteroclinic_v0_w0_2k1"
    HETEROCLINIC_W0_V0_2K1 = "heteroclinic_w0_v0_2k1"
    BASIC_HETEROCLINIC = "basic_heteroclinic"


_HOMOCLINIC = (TransitionKind.HOMOCLINIC_V0_2K, TransitionKind.HOMOCLINIC_W0_2K)
_HETEROCLINIC_MULTI = (
    TransitionKind.HETEROCLINIC_V0_W0_2K1,
    TransitionKind.HETEROCLINIC_W0_V0_2K1,
)


@dataclass(frozen=True)
class TransitionPattern:
    """Marker vector, constraint length and radii of one admissible set.

    Markers must be strictly increasing, with a 2l separation after every
    even-position marker (1-based), so consecutive constraint regions stay
    disjoint.  Homoclinic kinds take 4k markers, multitransition
    heteroclinic kinds 4k+2; the basic heteroclinic has none.
    """

    kind: TransitionKind
    l: int
    m: tuple[int, ...] | None = None
    rho: tuple[float, float, float, float] | None = None
    direction: str = "ascending"

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"constraint length must be >= 1, got {self.l}")
        if self.direction not in ("ascending", "descending"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.kind is TransitionKind.BASIC_HETEROCLINIC:
            if self.m is not None:
                raise ValueError("basic heteroclinic takes no marker vector")
            return
        if self.m is None:
            raise ValueError(f"{self.kind.value} requires a marker vector")
        m = tuple(int(v) for v in self.m)
        object.__setattr__(self, "m", m)
        if self.kind in _HOMOCLINIC:
            if len(m) < 4 or len(m) % 4 != 0:
                raise ValueError(
                    f"{self.kind.value} needs 4k markers, got {len(m)}"
                )
        else:
            if len(m) < 6 or (len(m) - 2) % 4 != 0:
                raise ValueError(
                    f"{self.kind.value} needs 4k+2 markers, got {len(m)}"
                )
        for i in range(len(m) - 1):
            if not m[i] < m[i + 1]:
                raise ValueError(f"markers must increase: m[{i}]={m[i]}, "
                                 f"m[{i+1}]={m[i+1]}")
            if i % 2 == 1 and not m[i] + 2 * self.l < m[i + 1]:
                raise ValueError(
                    f"need m[{i}]+2l < m[{i+1}]: "
                    f"{m[i]}+{2 * self.l} >= {m[i+1]}"
                )

    @property
    def k(self) -> int:
        if self.kind is TransitionKind.BASIC_HETEROCLINIC:
            return 0
        if self.kind in _HOMOCLINIC:
            return len(self.m) // 4
        return (len(self.m) - 2) // 4

    def tails(self, gap: GapPair) -> tuple[float, float]:
        if self.kind is TransitionKind.HOMOCLINIC_V0_2K:
            return gap.v0, gap.v0
        if self.kind is TransitionKind.HOMOCLINIC_W0_2K:
            return gap.w0, gap.w0
        if self.kind is TransitionKind.HETEROCLINIC_V0_W0_2K1:
            return gap.v0, gap.w0
        if self.kind is TransitionKind.HETEROCLINIC_W0_V0_2K1:
            return gap.w0, gap.v0
        if self.direction == "ascending":
            return gap.v0, gap.w0
        return gap.w0, gap.v0

    def constraint_regions(self) -> list[tuple[int, int, str, int]]:
        """Tightening table: (first site, last site, side, radius index).

        Side "minus" caps the distance from the lower ground state (an upper
        bound v0 + rho on the value); side "plus" caps the distance from the
        upper one (a lower bound w0 - rho).  Radius indices are 0-based.
        """
        if self.kind is TransitionKind.BASIC_HETEROCLINIC:
            return []
        m, l = self.m, self.l
        cycle_v0 = (("minus", 0), ("plus", 1), ("plus", 2), ("minus", 3))
        cycle_w0 = (("plus", 2), ("minus", 3), ("minus", 0), ("plus", 1))
        cycle = (
            cycle_v0
            if self.kind in (TransitionKind.HOMOCLINIC_V0_2K,
                             TransitionKind.HETEROCLINIC_V0_W0_2K1)
            else cycle_w0
        )
        out = []
        for pos, marker in enumerate(m):
            side, ridx = cycle[pos % 4]
            if pos % 2 == 0:
                out.append((marker - l, marker - 1, side, ridx))
            else:
                out.append((marker, marker + l - 1, side, ridx))
        return out

    def transitions(self) -> list[tuple[int, str]]:
        """(center, direction) of each phase transition, in order."""
        if self.kind is TransitionKind.BASIC_HETEROCLINIC:
            return [(0, self.direction)]
        first_up = self.kind in (
            TransitionKind.HOMOCLINIC_V0_2K,
            TransitionKind.HETEROCLINIC_V0_W0_2K1,
        )
        out = []
        for t in range(len(self.m) // 2):
            center = (self.m[2 * t] + self.m[2 * t + 1]) // 2
            up = (t % 2 == 0) == first_up
            out.append((center, "ascending" if up else "descending"))
        return out


@dataclass
class HeteroclinicFamily:
    """A converged basic front and the radii attained by its translates."""

    direction: str
    base: ChainConfig
    energy: float
    report: SolveReport
    rho_minus_values: np.ndarray
    rho_plus_values: np.ndarray


def default_window(pattern: TransitionPattern, r: int) -> tuple[int, int]:
    """Symmetric solve window: markers plus 2l plus 8r of margin per side."""
    if pattern.kind is TransitionKind.BASIC_HETEROCLINIC or pattern.m is None:
        return FRONT_WINDOW
    margin = 2 * pattern.l + 8 * r
    return pattern.m[0] - margin, pattern.m[-1] + margin


def find_periodic_and_gap(
    pot: StencilPotential, ground: GroundLevel | None = None
) -> GapPair:
    """Detect adjacent uniform ground states v0 < w0.

    The minimizing constants of the ground level, extended by periodicity,
    must form a discrete set; the first two consecutive members give the
    gap.  Degenerate or continuum-valued minima fail.
    """
    if ground is None:
        ground = compute_c0(pot)
    if ground.continuum:
        raise GapConditionFailed(
            "ground level is attained on a continuum of constants"
        )
    if not ground.minima:
        raise GapConditionFailed("no minimizing constant located")
    if len(ground.minima) == 1:
        v0 = ground.minima[0]
        w0 = v0 + 1.0
    else:
        v0, w0 = ground.minima[0], ground.minima[1]
    for c in (v0, w0):
        cfg = ChainConfig.constant(c)
        worst = float(np.max(np.abs(el_residual(cfg, pot))))
        if worst > EL_CONST_TOL:
            raise GapConditionFailed(
                f"constant {c} is not an equilibrium (residual {worst:.2e})"
            )
    return GapPair(v0=float(v0), w0=float(w0), rho_bar=float(w0 - v0))


def _ramp_init(
    window: tuple[int, int], tails: tuple[float, float], phase: float
) -> ChainConfig:
    """Linear ramp over the middle third of the window, plateaus outside.

    `phase` offsets the ramp by a fraction of a site, selecting whether the
    half-way value falls on a site or between two sites.
    """
    lo, hi = window
    width = hi - lo + 1
    s0 = lo + width // 3
    s1 = hi - width // 3
    i = np.arange(lo, hi + 1)
    frac = np.clip((i - s0 - phase) / max(s1 - s0, 1), 0.0, 1.0)
    vals = tails[0] + (tails[1] - tails[0]) * frac
    return ChainConfig(lo, hi, vals, tails[0], tails[1])


def _sample_family(
    base: ChainConfig, gap: GapPair
) -> tuple[np.ndarray, np.ndarray]:
    vals = base.window(base.lo - 1, base.hi + 1)
    rho_minus = np.abs(vals - gap.v0)
    rho_plus = np.abs(gap.w0 - vals)
    return rho_minus, rho_plus


def find_heteroclinic(
    gap: GapPair,
    direction: str,
    window: tuple[int, int],
    pot: StencilPotential,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    algorithm: str = "hybrid",
    ground: GroundLevel | None = None,
) -> HeteroclinicFamily:
    """Solve for the minimal basic front between the gap endpoints.

    The admissible set is the plain order interval with the two ground
    states as tails.  Relaxation runs from a site-anchored and from a
    bond-anchored ramp; the lower-energy converged profile is kept, since
    the two anchorings relax to distinct stationary profiles and only the
    lower one realizes the minimal front level.
    """
    if direction not in ("ascending", "descending"):
        raise ValueError(f"unknown direction {direction!r}")
    lo, hi = window
    if hi - lo + 1 < 40 * pot.r:
        raise ValueError(
            f"front window [{lo}, {hi}] narrower than 40r = {40 * pot.r}"
        )
    if ground is None:
        ground = compute_c0(pot)
    tails = (gap.v0, gap.w0) if direction == "ascending" else (gap.w0, gap.v0)
    box = ConstraintBox.uniform(lo, hi, gap.v0, gap.w0)
    label = "c1_up" if direction == "ascending" else "c1_down"

    best: SolveReport | None = None
    last: SolveReport | None = None
    for phase in (0.0, 0.5):
        report = minimize(
            _ramp_init(window, tails, phase), box, pot,
            tol=tol, max_iter=max_iter, algorithm=algorithm,
            ground=ground, label=label,
        )
        last = report
        if report.converged and (best is None or report.energy < best.energy):
            best = report
    if best is None:
        raise NoConvergence(last)

    profile = best.profile
    spread = float(np.max(profile.values) - np.min(profile.values))
    if spread <= 1e-6 or best.energy <= 0.0:
        raise DegenerateFront(
            f"front collapsed (spread {spread:.2e}, energy {best.energy:.2e})"
        )
    rho_minus, rho_plus = _sample_family(profile, gap)
    return HeteroclinicFamily(
        direction=direction,
        base=profile,
        energy=best.energy,
        report=best,
        rho_minus_values=rho_minus,
        rho_plus_values=rho_plus,
    )


def _pick_radius(values: np.ndarray, rho_bar: float) -> float:
    """Midpoint of the widest gap between sampled values in (0, rho_bar)."""
    vals = np.unique(np.clip(values, 0.0, rho_bar))
    vals = np.concatenate(([0.0], vals, [rho_bar]))
    vals = np.unique(vals)
    gaps = np.diff(vals)
    widest = float(np.max(gaps))
    # Exact ties resolve toward the center of the gap interval.
    tie_idx = np.flatnonzero(gaps == widest)
    mids = 0.5 * (vals[tie_idx] + vals[tie_idx + 1])
    pick = int(np.argmin(np.abs(mids - 0.5 * rho_bar)))
    candidate = float(mids[pick])
    clearance = float(np.min(np.abs(vals - candidate)))
    if clearance < RHO_CLEARANCE:
        raise RhoSelectionFailed(
            f"sampled radii are {clearance:.1e}-dense near {candidate:.6f}"
        )
    return candidate


def choose_rho(
    fam_up: HeteroclinicFamily,
    fam_down: HeteroclinicFamily,
    gap: GapPair,
) -> tuple[float, float, float, float]:
    """Constraint radii avoided by every sampled front translate.

    Radii 1 and 2 dodge the distances-to-ground attained by the ascending
    family at the origin; radii 3 and 4 dodge the descending family's.
    Midpoints of the widest unattained gaps maximize clearance.
    """
    rho1 = _pick_radius(fam_up.rho_minus_values, gap.rho_bar)
    rho2 = _pick_radius(fam_up.rho_plus_values, gap.rho_bar)
    rho3 = _pick_radius(fam_down.rho_plus_values, gap.rho_bar)
    rho4 = _pick_radius(fam_down.rho_minus_values, gap.rho_bar)
    return rho1, rho2, rho3, rho4


def build_constraints(
    pattern: TransitionPattern,
    gap: GapPair,
    window: tuple[int, int],
    r: int = 1,
) -> ConstraintBox:
    """Order-interval box tightened on the pattern's constraint regions."""
    lo, hi = window
    if pattern.kind is not TransitionKind.BASIC_HETEROCLINIC:
        if pattern.rho is None:
            raise ValueError("pattern has no constraint radii set")
        for rho_i in pattern.rho:
            if not 0.0 < rho_i < gap.rho_bar:
                raise ValueError(
                    f"radius {rho_i} outside (0, {gap.rho_bar})"
                )
        need_lo = pattern.m[0] - pattern.l - 4 * r
        need_hi = pattern.m[-1] + pattern.l + 4 * r
        if lo > need_lo or hi < need_hi:
            raise PatternWindowMismatch(
                f"window [{lo}, {hi}] must cover [{need_lo}, {need_hi}]"
            )
    n = hi - lo + 1
    lower = np.full(n, gap.v0)
    upper = np.full(n, gap.w0)
    for first, last, side, ridx in pattern.constraint_regions():
        rho_i = pattern.rho[ridx]
        sl = slice(first - lo, last - lo + 1)
        if side == "minus":
            upper[sl] = np.minimum(upper[sl], gap.v0 + rho_i)
        else:
            lower[sl] = np.maximum(lower[sl], gap.w0 - rho_i)
    return ConstraintBox(lo, lower, upper)


def _front_anchor(front: ChainConfig, gap: GapPair, direction: str) -> int:
    """Site of the half-gap crossing: last site on the starting side."""
    mid = 0.5 * (gap.v0 + gap.w0)
    vals = front.values
    if direction == "ascending":
        below = np.flatnonzero(vals <= mid)
    else:
        below = np.flatnonzero(vals >= mid)
    if below.size == 0:
        return front.lo
    return int(front.lo + below[-1])


def concatenate_fronts(
    pattern: TransitionPattern,
    gap: GapPair,
    fam_up: HeteroclinicFamily,
    fam_down: HeteroclinicFamily,
    window: tuple[int, int],
) -> ChainConfig:
    """Glue shifted basic fronts, one per transition of the pattern.

    Piecewise segments split midway between consecutive transition pairs;
    within each segment the profile follows the matching front translate.
    The result is the canonical feasible comparison configuration and the
    minimizer's starting point.
    """
    lo, hi = window
    tails = pattern.tails(gap)
    trans = pattern.transitions()
    fam = {"ascending": fam_up, "descending": fam_down}
    shifted = []
    for center, dirn in trans:
        base = fam[dirn].base
        anchor = _front_anchor(base, gap, dirn)
        shifted.append(shift(base, anchor - center))

    splits = []
    for t in range(len(trans) - 1):
        splits.append((pattern.m[2 * t + 1] + pattern.m[2 * t + 2]) // 2)

    vals = np.empty(hi - lo + 1)
    start = lo
    for t, cfg in enumerate(shifted):
        end = splits[t] if t < len(splits) else hi
        vals[start - lo : end - lo + 1] = cfg.window(start, end)
        start = end + 1
    return ChainConfig(lo, hi, vals, tails[0], tails[1])


def solve_multitransition(
    pattern: TransitionPattern,
    gap: GapPair,
    pot: StencilPotential,
    window: tuple[int, int] | None = None,
    fam_up: HeteroclinicFamily | None = None,
    fam_down: HeteroclinicFamily | None = None,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    algorithm: str = "hybrid",
    ground: GroundLevel | None = None,
) -> SolveReport:
    """Minimize over the tightened order interval of a transition pattern.

    Starts from the concatenation of shifted basic fronts (whose energy is
    recorded as `init_energy`, an upper bound for the constrained level).
    The report flags whether every tightening stayed strictly inactive;
    active tightenings are expected for small marker separations and are
    report content, not errors.
    """
    if ground is None:
        ground = compute_c0(pot)
    if window is None:
        window = default_window(pattern, pot.r)
    if fam_up is None:
        fam_up = find_heteroclinic(
            gap, "ascending", FRONT_WINDOW, pot,
            tol=tol, max_iter=max_iter, algorithm=algorithm, ground=ground,
        )
    if fam_down is None:
        fam_down = find_heteroclinic(
            gap, "descending", FRONT_WINDOW, pot,
            tol=tol, max_iter=max_iter, algorithm=algorithm, ground=ground,
        )

    box = build_constraints(pattern, gap, window, r=pot.r)
    init = concatenate_fronts(pattern, gap, fam_up, fam_down, window)
    init = init.with_values(np.clip(init.values, box.lower, box.upper))

    mtag = ",".join(str(v) for v in pattern.m) if pattern.m else ""
    label = f"b:{pattern.kind.value}:m={mtag}:l={pattern.l}"
    report = minimize(
        init, box, pot, tol=tol, max_iter=max_iter,
        algorithm=algorithm, ground=ground, label=label,
    )
    report.min_slack, report.strict_constraints = constraint_slack(
        report.profile, pattern, gap
    )
    if not report.converged:
        raise NoConvergence(report)
    return report


def constraint_slack(
    profile: ChainConfig, pattern: TransitionPattern, gap: GapPair
) -> tuple[float | None, bool | None]:
    """Minimal slack of the tightened bounds over the constraint regions."""
    regions = pattern.constraint_regions()
    if not regions or pattern.rho is None:
        return None, None
    slack = np.inf
    for first, last, side, ridx in regions:
        rho_i = pattern.rho[ridx]
        vals = profile.window(first, last)
        if side == "minus":
            slack = min(slack, float(np.min(gap.v0 + rho_i - vals)))
        else:
            slack = min(slack, float(np.min(vals - (gap.w0 - rho_i))))
    return float(slack), bool(slack > 1e-9)


def solve_pinned(
    gap: GapPair,
    pin_value: float,
    direction: str,
    pot: StencilPotential,
    window: tuple[int, int],
    fam: HeteroclinicFamily,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    algorithm: str = "hybrid",
    ground: GroundLevel | None = None,
    label: str = "pinned",
) -> SolveReport:
    """Front problem with the origin value pinned exactly to `pin_value`.

    The starting profile is the basic front translated so its origin value
    sits closest to the pin.
    """
    if not gap.v0 <= pin_value <= gap.w0:
        raise ValueError(f"pin {pin_value} outside [{gap.v0}, {gap.w0}]")
    if ground is None:
        ground = compute_c0(pot)
    lo, hi = window
    tails = (gap.v0, gap.w0) if direction == "ascending" else (gap.w0, gap.v0)
    k = int(np.argmin(np.abs(fam.base.values - pin_value)))
    anchor = fam.base.lo + k
    moved = shift(fam.base, anchor)  # moved(0) = base(anchor)
    vals = moved.window(lo, hi)
    init = ChainConfig(lo, hi, vals, tails[0], tails[1])
    box = ConstraintBox.uniform(lo, hi, gap.v0, gap.w0, pinned={0: pin_value})
    report = minimize(
        init, box, pot, tol=tol, max_iter=max_iter,
        algorithm=algorithm, ground=ground, label=label,
    )
    if not report.converged:
        raise NoConvergence(report)
    return report


def solve_pinned_level(
    gap: GapPair,
    rho: tuple[float, float, float, float],
    direction: str,
    pot: StencilPotential,
    window: tuple[int, int],
    fam: HeteroclinicFamily,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    algorithm: str = "hybrid",
    ground: GroundLevel | None = None,
) -> SolveReport:
    """Pinned front level: best of the two single-pin problems.

    The ascending direction pins the origin to v0 + rho1 and, separately,
    to w0 - rho2; the descending direction uses rho4 and rho3.  The smaller
    converged energy is the pinned level candidate.
    """
    if direction == "ascending":
        pins = (gap.v0 + rho[0], gap.w0 - rho[1])
        label = "d1_up"
    elif direction == "descending":
        pins = (gap.v0 + rho[3], gap.w0 - rho[2])
        label = "d1_down"
    else:
        raise ValueError(f"unknown direction {direction!r}")
    reports = [
        solve_pinned(
            gap, pin, direction, pot, window, fam,
            tol=tol, max_iter=max_iter, algorithm=algorithm,
            ground=ground, label=label,
        )
        for pin in pins
    ]
    return min(reports, key=lambda rep: rep.energy)
