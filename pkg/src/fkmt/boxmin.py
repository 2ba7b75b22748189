"""Box-constrained minimization of the renormalized chain energy.

Minimizes the energy over a finite window subject to per-site interval
bounds and optional equality pins.  The primary scheme is projected
gradient descent with Armijo backtracking; a projected Gauss-Seidel sweep
(single-site Newton with bisection fallback) is available standalone and as
a periodic accelerator in the hybrid mode.  Sites within r of the window
edge are frozen to the boundary data, so a converged profile is stationary
against every perturbation supported inside the window.

All schemes are deterministic: identical inputs produce bitwise-identical
iterate sequences.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .chains import ChainConfig
from .energy import GroundLevel, J1_total, compute_c0, el_residual
from .stencil import StencilPotential

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200_000
ARMIJO_SLOPE = 1e-4
ARMIJO_SHRINK = 0.5
ACTIVE_TOL = 1e-9
SWEEP_EVERY = 10


class NoConvergence(Exception):
    """Raised by callers that require a converged report."""

    def __init__(self, report: "SolveReport"):
        super().__init__(
            f"no convergence after {report.iterations} iterations "
            f"(residual {report.residual_sup:.3e})"
        )
        self.report = report


@dataclass(frozen=True)
class ConstraintBox:
    """Per-site interval bounds over a window, plus equality pins."""

    lo: int
    lower: np.ndarray
    upper: np.ndarray
    pinned: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower/upper must be equal-length 1-D arrays")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound somewhere")
        for site, val in self.pinned.items():
            j = site - self.lo
            if not 0 <= j < lower.size:
                raise ValueError(f"pinned site {site} outside box window")
            if not lower[j] <= val <= upper[j]:
                raise ValueError(f"pin {val} at site {site} violates bounds")
        lower = lower.copy()
        upper = upper.copy()
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def hi(self) -> int:
        return self.lo + self.lower.size - 1

    @classmethod
    def uniform(
        cls, lo: int, hi: int, lower: float, upper: float,
        pinned: dict[int, float] | None = None,
    ) -> "ConstraintBox":
        m = hi - lo + 1
        return cls(lo, np.full(m, lower), np.full(m, upper), pinned or {})

    def tightened(self, site: int, lower: float | None = None,
                  upper: float | None = None) -> "ConstraintBox":
        j = site - self.lo
        lo_arr = np.array(self.lower)
        up_arr = np.array(self.upper)
        if lower is not None:
            lo_arr[j] = max(lo_arr[j], lower)
        if upper is not None:
            up_arr[j] = min(up_arr[j], upper)
        return ConstraintBox(self.lo, lo_arr, up_arr, dict(self.pinned))


@dataclass
class SolveReport:
    """Outcome of one constrained minimization run."""

    profile: ChainConfig
    energy: float
    residual_sup: float
    iterations: int
    active_sites: list[int]
    converged: bool
    wall_time: float
    label: str = ""
    init_energy: float | None = None
    pinned_sites: list[int] = field(default_factory=list)
    pinned_residual_sup: float | None = None
    min_slack: float | None = None
    strict_constraints: bool | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "profile": self.profile.to_dict(),
            "energy": self.energy,
            "residual_sup": self.residual_sup,
            "iterations": self.iterations,
            "active_sites": list(self.active_sites),
            "converged": self.converged,
            "wall_time": self.wall_time,
            "init_energy": self.init_energy,
            "pinned_sites": list(self.pinned_sites),
            "pinned_residual_sup": self.pinned_residual_sup,
            "min_slack": self.min_slack,
            "strict_constraints": self.strict_constraints,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        return cls(
            profile=ChainConfig.from_dict(d["profile"]),
            energy=d["energy"],
            residual_sup=d["residual_sup"],
            iterations=d["iterations"],
            active_sites=[int(s) for s in d["active_sites"]],
            converged=d["converged"],
            wall_time=d["wall_time"],
            label=d.get("label", ""),
            init_energy=d.get("init_energy"),
            pinned_sites=[int(s) for s in d.get("pinned_sites", [])],
            pinned_residual_sup=d.get("pinned_residual_sup"),
            min_slack=d.get("min_slack"),
            strict_constraints=d.get("strict_constraints"),
        )


class _Problem:
    """Window-aligned work arrays shared by the iteration schemes."""

    def __init__(self, init: ChainConfig, box: ConstraintBox,
                 pot: StencilPotential, ground: GroundLevel):
        if (box.lo, box.hi) != (init.lo, init.hi):
            raise ValueError("init window and box window must coincide")
        self.pot = pot
        self.ground = ground
        self.lo, self.hi = init.lo, init.hi
        self.template = init
        r = pot.r
        self.r = r
        n = init.hi - init.lo + 1
        if n < 2 * r + 1:
            raise ValueError("window too narrow for the interaction range")
        self.n = n

        free = np.ones(n, dtype=bool)
        free[:r] = False
        free[n - r:] = False
        self.pin_idx = np.array(
            sorted(s - self.lo for s in box.pinned), dtype=np.intp
        )
        free[self.pin_idx] = False
        self.free = free

        self.lower = box.lower
        self.upper = box.upper
        x = np.array(init.values, dtype=float)
        # The edge bands carry the boundary data: exactly the tail values,
        # regardless of what the start profile put there.
        x[:r] = init.left_tail
        x[n - r:] = init.right_tail
        band = slice(r, n - r)
        x[band] = np.clip(x[band], self.lower[band], self.upper[band])
        for s, v in box.pinned.items():
            x[s - self.lo] = v
        self.x0 = x

    def config(self, x: np.ndarray) -> ChainConfig:
        return self.template.with_values(x)

    def energy(self, x: np.ndarray) -> float:
        return J1_total(self.config(x), self.pot, self.ground).total

    def residual(self, x: np.ndarray) -> np.ndarray:
        """Raw equilibrium residual aligned to the window sites."""
        res = el_residual(self.config(x), self.pot)
        return res[self.r: self.r + self.n]

    def proj_grad_sup(self, x: np.ndarray, g: np.ndarray) -> float:
        step = x - np.clip(x - g, self.lower, self.upper)
        step[~self.free] = 0.0
        return float(np.max(np.abs(step))) if step.size else 0.0

    # Single-site helpers.  The stencils reading site j have centers within
    # r of it, hence depend only on the chain values in [j-2r, j+2r]; a
    # tail-padded copy of the iterate makes that slice a plain view.

    def padded(self, x: np.ndarray) -> np.ndarray:
        r = self.r
        xpad = np.empty(self.n + 4 * r)
        xpad[: 2 * r] = self.template.left_tail
        xpad[2 * r : 2 * r + self.n] = x
        xpad[2 * r + self.n :] = self.template.right_tail
        return xpad

    def site_energy(self, xpad: np.ndarray, j: int, val: float) -> float:
        r = self.r
        old = xpad[j + 2 * r]
        xpad[j + 2 * r] = val
        rows = sliding_window_view(xpad[j : j + 4 * r + 1], 2 * r + 1)
        e = float(np.sum(self.pot.row_energies(rows)))
        xpad[j + 2 * r] = old
        return e

    def site_residual(self, xpad: np.ndarray, j: int, val: float) -> float:
        r = self.r
        old = xpad[j + 2 * r]
        xpad[j + 2 * r] = val
        rows = sliding_window_view(xpad[j : j + 4 * r + 1], 2 * r + 1)
        G = self.pot.row_gradients(rows)
        xpad[j + 2 * r] = old
        return float(sum(G[m, 2 * r - m] for m in range(2 * r + 1)))


def _pg_step(prob: _Problem, x, e, g, t_start):
    """One Armijo-backtracked projected gradient step; returns (x, e, t)."""
    # Acceptance carries a roundoff allowance so that descent can proceed
    # down to energy differences at the accumulation noise floor.
    slack = 1e-16 * (1.0 + abs(e))
    t = t_start
    for _ in range(60):
        cand = np.clip(x - t * g, prob.lower, prob.upper)
        cand[~prob.free] = x[~prob.free]
        delta = cand - x
        e_cand = prob.energy(cand)
        if e_cand <= e + ARMIJO_SLOPE * float(np.dot(g, delta)) + slack:
            return cand, e_cand, t
        t *= ARMIJO_SHRINK
    return x, e, t


def _sweep_inplace(prob: _Problem, x: np.ndarray) -> None:
    """Ascending projected Gauss-Seidel pass over the free sites of x.

    Each site moves to a constrained critical point of its own coordinate:
    Newton on the site residual with a finite-difference slope, projected
    into the interval, with endpoint and bisection fallbacks.  A move is
    kept only if it does not raise the local energy, so the pass is
    monotone in the total energy.
    """
    xpad = prob.padded(x)
    off = 2 * prob.r
    for j in np.flatnonzero(prob.free):
        lo_j, up_j = prob.lower[j], prob.upper[j]
        x0 = float(x[j])
        e0 = prob.site_energy(xpad, j, x0)
        g0 = prob.site_residual(xpad, j, x0)
        best, e_best = x0, e0
        # Below this resolution, local energies compare equal in floating
        # point; the critical point wins such ties or the sweep stagnates
        # with residuals far above the energy noise floor.
        slack = 1e-16 * (1.0 + abs(e0))

        xn, gn = x0, g0
        h = 1e-7 * (1.0 + abs(x0))
        newton_ok = False
        for _ in range(30):
            slope = (
                prob.site_residual(xpad, j, xn + h)
                - prob.site_residual(xpad, j, xn - h)
            ) / (2.0 * h)
            if slope <= 1e-14:
                break
            step = gn / slope
            xn = min(max(xn - step, lo_j), up_j)
            gn = prob.site_residual(xpad, j, xn)
            if abs(step) < 1e-13:
                newton_ok = True
                break
        if abs(gn) <= 1e-12:
            newton_ok = True
        e_n = prob.site_energy(xpad, j, xn)
        if e_n < e_best or (newton_ok and abs(gn) < abs(g0) and e_n <= e0 + slack):
            best, e_best = xn, e_n

        if not newton_ok:
            g_lo = prob.site_residual(xpad, j, lo_j)
            g_up = prob.site_residual(xpad, j, up_j)
            if g_lo >= 0.0:
                e_lo = prob.site_energy(xpad, j, lo_j)
                if e_lo < e_best:
                    best, e_best = lo_j, e_lo
            if g_up <= 0.0:
                e_up = prob.site_energy(xpad, j, up_j)
                if e_up < e_best:
                    best, e_best = up_j, e_up
            if g_lo < 0.0 < g_up:
                a, b = lo_j, up_j
                for _ in range(60):
                    m = 0.5 * (a + b)
                    if prob.site_residual(xpad, j, m) < 0.0:
                        a = m
                    else:
                        b = m
                m = 0.5 * (a + b)
                e_m = prob.site_energy(xpad, j, m)
                if e_m < e_best:
                    best, e_best = m, e_m

        x[j] = best
        xpad[j + off] = best


def gauss_seidel_sweep(
    u: ChainConfig,
    box: ConstraintBox,
    pot: StencilPotential,
    ground: GroundLevel | None = None,
) -> ChainConfig:
    """One ascending projected Gauss-Seidel sweep over the window of u."""
    if ground is None:
        ground = compute_c0(pot)
    prob = _Problem(u, box, pot, ground)
    x = prob.x0.copy()
    _sweep_inplace(prob, x)
    return u.with_values(x)


def minimize(
    init: ChainConfig,
    box: ConstraintBox,
    pot: StencilPotential,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    algorithm: str = "hybrid",
    ground: GroundLevel | None = None,
    label: str = "",
) -> SolveReport:
    """Minimize the renormalized energy of `init` within `box`.

    The energy is nonincreasing across iterations (up to accumulation
    roundoff) and every iterate is feasible.  Convergence is declared when
    the sup-norm of the projected gradient over the free sites drops to
    `tol`; exhausting `max_iter` returns a report with converged=False.
    Pinned sites never move; their raw residual is reported separately as
    information only.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if algorithm not in ("projected_gradient", "gauss_seidel", "hybrid"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if ground is None:
        ground = compute_c0(pot)

    t0 = time.perf_counter()
    prob = _Problem(init, box, pot, ground)
    x = prob.x0.copy()
    e = prob.energy(x)
    init_energy = e
    n_free = int(np.count_nonzero(prob.free))

    iterations = 0
    converged = False
    res_sup = 0.0
    t_mem = 1.0
    # Running curvature estimate from observed gradient differences.  Near
    # machine-precision energy plateaus the backtracking test degenerates
    # (all steps look flat), so the step must stay inside the stability
    # region 2/L on its own or gradient noise is amplified instead of
    # damped.
    lip = 0.0
    seen: tuple[np.ndarray, np.ndarray] | None = None

    if n_free == 0:
        converged = True
    else:
        stalled_pg = False
        while True:
            g = prob.residual(x)
            g[~prob.free] = 0.0
            res_sup = prob.proj_grad_sup(x, g)
            if res_sup <= tol:
                converged = True
                break
            if iterations >= max_iter:
                break
            if seen is not None:
                dx = float(np.max(np.abs(x - seen[0])))
                dg = float(np.max(np.abs(g - seen[1])))
                if dx > 0.0 and np.isfinite(dg / dx):
                    lip = max(lip, dg / dx)
            seen = (x.copy(), g)
            iterations += 1
            use_sweep = algorithm == "gauss_seidel" or (
                algorithm == "hybrid"
                and (iterations % SWEEP_EVERY == 0 or stalled_pg)
            )
            if use_sweep:
                x_prev = x.copy()
                _sweep_inplace(prob, x)
                e = prob.energy(x)
                swept_nothing = np.array_equal(x, x_prev)
                if swept_nothing and (stalled_pg or algorithm == "gauss_seidel"):
                    break  # no move class makes progress at this tol
                stalled_pg = False
            else:
                t_start = t_mem if lip <= 0.0 else min(t_mem, 0.95 / lip)
                x_new, e, t_used = _pg_step(prob, x, e, g, t_start)
                stalled_pg = np.array_equal(x_new, x)
                if stalled_pg and algorithm == "projected_gradient":
                    break
                x = x_new
                t_mem = min(1.0, 2.0 * t_used)

    profile = prob.config(x)
    energy = J1_total(profile, pot, ground).total
    raw = prob.residual(x)

    active = [
        int(j + prob.lo)
        for j in np.flatnonzero(prob.free)
        if x[j] - prob.lower[j] <= ACTIVE_TOL
        or prob.upper[j] - x[j] <= ACTIVE_TOL
    ]

    pinned_res = None
    if prob.pin_idx.size:
        pinned_res = float(np.max(np.abs(raw[prob.pin_idx])))

    return SolveReport(
        profile=profile,
        energy=energy,
        residual_sup=res_sup,
        iterations=iterations,
        active_sites=active,
        converged=converged,
        wall_time=time.perf_counter() - t0,
        label=label,
        init_energy=init_energy,
        pinned_sites=[int(j + prob.lo) for j in prob.pin_idx],
        pinned_residual_sup=pinned_res,
    )
