"""Renormalized chain energy, its gradient, and the ground level.

The per-site energy of a chain is the stencil potential centered at that
site, evaluated on the transversally periodic reduction (each offset reads
the chain value of its first coordinate).  Subtracting the ground level c0,
attained by the best uniform constant, renormalizes the sum so that
profiles with ground-state tails have finite total energy.  Because stored
configurations are exactly constant beyond their windows, the renormalized
total is an exact finite sum over a fixed evaluation range; no tail
truncation error enters any comparison downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .chains import ChainConfig
from .stencil import StencilPotential

C0_GRID = 1024
C0_WELL_MERGE = 1e-3
TAIL_MATCH_TOL = 1e-9


class TailNotMinimal(Exception):
    """A tail constant is not a ground state, so the total energy diverges."""


@dataclass(frozen=True)
class GroundLevel:
    """Ground level c0 with its minimizing constants in [0, 1)."""

    value: float
    minima: tuple[float, ...]
    continuum: bool
    # Worst |f(m) - c0| over stored minima; bounds the per-site energy of a
    # pure-tail stencil, exactly 0 when all wells evaluate identically.
    well_spread: float

    def tail_distance(self, x: float) -> float:
        """Circular distance from x to the nearest minimizing constant."""
        if not self.minima:
            return float("inf")
        d = min(abs((x - m + 0.5) % 1.0 - 0.5) for m in self.minima)
        return float(d)


@dataclass
class EnergyReport:
    """Per-site renormalized energies over the evaluation window."""

    c0: float
    start: int
    per_site: np.ndarray
    total: float
    tail_bound: float

    def to_dict(self) -> dict:
        return {
            "c0": self.c0,
            "start": self.start,
            "per_site": [float(v) for v in self.per_site],
            "total": self.total,
            "tail_bound": self.tail_bound,
        }


def constant_energy(pot: StencilPotential, x) -> np.ndarray:
    """Stencil energy of uniform constants (vectorized in x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rows = np.repeat(x[:, None], 2 * pot.r + 1, axis=1)
    return pot.row_energies(rows)


def constant_residual(pot: StencilPotential, x: float) -> float:
    """Derivative of the constant-stencil energy (all sites move together)."""
    row = np.full((1, 2 * pot.r + 1), float(x))
    return float(np.sum(pot.row_gradients(row)))


def _golden_refine(f, xl: float, xr: float, x_best: float, f_best: float):
    """Golden-section minimum on [xl, xr], keeping the best sampled point."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = xl, xr
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a < 1e-13:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        for x, fx in ((c, fc), (d, fd)):
            if fx < f_best:
                x_best, f_best = x, fx
    return x_best, f_best


def compute_c0(pot: StencilPotential, grid: int = C0_GRID) -> GroundLevel:
    """Ground level over uniform constants in one period.

    Scans `grid` points of [0, 1), then refines each candidate well by
    golden section.  Wells closer than ~1e-3 are merged (with a warning);
    a flat valley wider than the grid resolution marks a continuum of
    minimizers, which downstream gap detection must reject.
    """
    xs = np.arange(grid) / grid
    fs = constant_energy(pot, xs)
    fmin = float(np.min(fs))
    flat_eps = 1e-12 * max(1.0, abs(fmin))
    low = fs <= fmin + flat_eps

    # Group circularly adjacent near-minimal grid points into clusters.
    idx = np.flatnonzero(low)
    clusters: list[list[int]] = []
    for i in idx:
        if clusters and (i - clusters[-1][-1]) == 1:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    if len(clusters) > 1 and clusters[0][0] == 0 and clusters[-1][-1] == grid - 1:
        clusters[0] = clusters.pop() + clusters[0]

    continuum = any(len(c) >= 3 for c in clusters)

    def f1(x: float) -> float:
        return float(constant_energy(pot, x % 1.0)[0])

    candidates: list[tuple[float, float]] = []
    for cl in clusters:
        i_best = min(cl, key=lambda i: fs[i])
        x0 = i_best / grid
        xl = (cl[0] - 1) / grid
        xr = (cl[-1] + 1) / grid
        if cl[0] > cl[-1]:  # wrapped cluster
            xl = (cl[0] - grid - 1) / grid
            xr = (cl[-1] + 1) / grid
            x0 = i_best / grid if i_best <= cl[-1] else (i_best - grid) / grid
        x_best, f_best = _golden_refine(f1, xl, xr, x0, float(fs[i_best]))
        # Golden section cannot localize past the flat fp-noise basin of a
        # quadratic well (~1e-9 wide); Newton on the analytic derivative
        # pins the well to machine precision.
        x_n = x_best
        for _ in range(50):
            res = constant_residual(pot, x_n % 1.0)
            h = 1e-6
            slope = (
                constant_residual(pot, (x_n + h) % 1.0)
                - constant_residual(pot, (x_n - h) % 1.0)
            ) / (2.0 * h)
            if slope <= 1e-12 or not xl <= x_n <= xr:
                break
            step = res / slope
            x_n -= step
            if abs(step) < 1e-15:
                break
        if xl <= x_n <= xr:
            f_n = f1(x_n)
            if f_n <= f_best + 1e-12 * (1.0 + abs(f_best)) and abs(
                constant_residual(pot, x_n % 1.0)
            ) < abs(constant_residual(pot, x_best % 1.0)):
                x_best, f_best = x_n, f_n
        candidates.append((x_best % 1.0, f_best))

    c0 = min(fb for _, fb in candidates)
    minima = sorted(x for x, fb in candidates if fb <= c0 + 1e-12)

    merged: list[float] = []
    for x in minima:
        if merged and min(abs(x - merged[-1]), abs(x - merged[-1] - 1.0)) < C0_WELL_MERGE:
            warnings.warn(
                f"ground wells at {merged[-1]:.6f} and {x:.6f} are closer than "
                f"{C0_WELL_MERGE}; merged at grid resolution"
            )
            continue
        merged.append(x)
    if len(merged) > 1 and (merged[0] + 1.0) - merged[-1] < C0_WELL_MERGE:
        warnings.warn("ground wells merge across the period boundary")
        merged.pop()

    spread = max(abs(f1(m) - c0) for m in merged)
    return GroundLevel(
        value=float(c0),
        minima=tuple(float(m) for m in merged),
        continuum=continuum,
        well_spread=float(spread),
    )


def stencil_rows(u: ChainConfig, p: int, q: int, r: int) -> np.ndarray:
    """Reduced rows feeding the stencils centered at sites p..q."""
    ext = u.window(p - r, q + r)
    return sliding_window_view(ext, 2 * r + 1)


def J1_window(
    u: ChainConfig, p: int, q: int, pot: StencilPotential, c0: float
) -> float:
    """Sum of renormalized per-site energies over sites p..q."""
    if p > q:
        raise ValueError(f"empty window [{p}, {q}]")
    rows = stencil_rows(u, p, q, pot.r)
    return float(np.sum(pot.row_energies(rows) - c0))


def J1_total(
    u: ChainConfig, pot: StencilPotential, ground: GroundLevel
) -> EnergyReport:
    """Total renormalized energy of a tail-constant configuration.

    Both tails must be ground-state constants; otherwise the infinite sum
    this finite evaluation stands for diverges and TailNotMinimal is
    raised.  Sites outside [lo-2r, hi+2r] see only tail constants and
    contribute nothing beyond `tail_bound`.
    """
    for tail in (u.left_tail, u.right_tail):
        if ground.tail_distance(tail) > TAIL_MATCH_TOL:
            raise TailNotMinimal(
                f"tail value {tail} is not within {TAIL_MATCH_TOL} of a "
                "ground-state constant"
            )
    r = pot.r
    p, q = u.lo - 2 * r, u.hi + 2 * r
    rows = stencil_rows(u, p, q, r)
    per_site = pot.row_energies(rows) - ground.value
    return EnergyReport(
        c0=ground.value,
        start=p,
        per_site=per_site,
        total=float(np.sum(per_site)),
        tail_bound=ground.well_spread,
    )


def el_residual(u: ChainConfig, pot: StencilPotential) -> np.ndarray:
    """Equilibrium residual at each site of [lo-r, hi+r].

    Entry i is the partial of the total energy with respect to the value at
    site (lo - r) + i, i.e. the sum of the neighbouring stencil gradients.
    Zero residual at a site means the equilibrium equation holds there.
    """
    r = pot.r
    n_sites = (u.hi - u.lo + 1) + 2 * r
    rows = stencil_rows(u, u.lo - 2 * r, u.hi + 2 * r, r)
    G = pot.row_gradients(rows)
    res = np.zeros(n_sites)
    for c in range(2 * r + 1):
        res += G[2 * r - c : 2 * r - c + n_sites, c]
    return res


def gradient(
    u: ChainConfig, pot: StencilPotential, active: tuple[int, int] | None = None
) -> np.ndarray:
    """Energy gradient restricted to the site range `active` (inclusive).

    Identical to the equilibrium residual on those sites; packaged so the
    minimizer can request exactly its free coordinates.
    """
    a, b = active if active is not None else (u.lo, u.hi)
    if a > b:
        raise ValueError(f"empty active range [{a}, {b}]")
    if a < u.lo - pot.r or b > u.hi + pot.r:
        raise ValueError("active range must lie within [lo-r, hi+r]")
    res = el_residual(u, pot)
    off = u.lo - pot.r
    return res[a - off : b - off + 1]
