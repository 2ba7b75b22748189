"""Local interaction potentials on finite lattice stencils.

A chain model on Z^n is defined by a single local potential acting on the
values of a configuration over the l1-ball of radius r around the origin.
Translates of this potential over the lattice sum to the (formal) total
energy.  This module holds the stencil geometry, the potential record with
its gradient, the built-in example families (cosine on-site well plus
nearest-neighbour quadratic coupling, and tabulated on-site wells), and
samplers that screen the structural hypotheses every admissible potential
must satisfy:

  (H1) invariance under adding the constant 1 to all stencil values,
  (H2) coercivity in the nearest-neighbour differences (analytic property,
       not sampled; recorded as a note),
  (H3) nonpositive mixed second partials, strictly negative between the
       origin and each nearest neighbour (ferromagnetic coupling).

Configurations that are 1-periodic transversally reduce to functions of the
first coordinate; `row_energies`/`row_gradients` evaluate the potential on
such reduced rows of width 2r+1, which is the form every chain-level
computation in this package consumes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping

import numpy as np

TWO_PI = 2.0 * np.pi

# Finite-difference steps: 1e-5 for first derivatives, 1e-4 for mixed second
# partials; chosen to balance truncation against double-precision roundoff.
FD_STEP_GRAD = 1e-5
FD_STEP_MIXED = 1e-4

# Nonpositivity of sampled mixed partials is certified only up to the
# finite-difference noise floor.
MIXED_PARTIAL_TOL = 1e-7


@dataclass(frozen=True)
class StencilIndex:
    """Enumeration of the l1-ball {k in Z^n : |k|_1 <= r} in fixed order."""

    n: int
    r: int
    offsets: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, n: int, r: int) -> "StencilIndex":
        if n < 2:
            raise ValueError(f"lattice dimension must be >= 2, got {n}")
        if r < 1:
            raise ValueError(f"interaction range must be >= 1, got {r}")
        offs = sorted(
            k
            for k in itertools.product(range(-r, r + 1), repeat=n)
            if sum(abs(c) for c in k) <= r
        )
        return cls(n=n, r=r, offsets=tuple(offs))

    def __len__(self) -> int:
        return len(self.offsets)

    @cached_property
    def center(self) -> int:
        return self.offsets.index((0,) * self.n)

    @cached_property
    def nearest(self) -> tuple[int, ...]:
        """Indices of the 2n offsets at l1-distance exactly 1."""
        return tuple(
            i for i, k in enumerate(self.offsets) if sum(abs(c) for c in k) == 1
        )

    @cached_property
    def row_map(self) -> np.ndarray:
        """Column (first coordinate + r) each offset reads in a reduced row."""
        return np.array([k[0] + self.r for k in self.offsets], dtype=np.intp)


@dataclass(frozen=True)
class StencilPotential:
    """A C^2 local potential on a stencil, with its gradient.

    `eval_fn` maps a value assignment (array indexed like `index.offsets`)
    to a real energy; `grad_fn` returns the vector of partials in the same
    indexing.  Optional vectorized row kernels accelerate chain evaluation;
    when absent, rows are expanded through `index.row_map` and fed to the
    generic callables.
    """

    index: StencilIndex
    params: Mapping[str, float]
    eval_fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    row_eval_vec: Callable[[np.ndarray], np.ndarray] | None = None
    row_grad_vec: Callable[[np.ndarray], np.ndarray] | None = None
    coercivity_note: str = "unverified for user-supplied potential"
    name: str = "custom"

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def r(self) -> int:
        return self.index.r

    def eval(self, values: np.ndarray) -> float:
        return float(self.eval_fn(np.asarray(values, dtype=float)))

    def grad(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(self.grad_fn(np.asarray(values, dtype=float)), dtype=float)

    def row_energies(self, rows: np.ndarray) -> np.ndarray:
        """Energies of stacked reduced rows, shape (m, 2r+1) -> (m,)."""
        rows = np.asarray(rows, dtype=float)
        if self.row_eval_vec is not None:
            return np.asarray(self.row_eval_vec(rows), dtype=float)
        rm = self.index.row_map
        return np.array([self.eval_fn(row[rm]) for row in rows], dtype=float)

    def row_gradients(self, rows: np.ndarray) -> np.ndarray:
        """Row-wise gradients, shape (m, 2r+1) -> (m, 2r+1).

        Column c is the partial with respect to the chain value at offset
        c - r from the row center; partials of offsets sharing a first
        coordinate are summed, which is the exact chain rule for the
        transversally periodic reduction.
        """
        rows = np.asarray(rows, dtype=float)
        if self.row_grad_vec is not None:
            return np.asarray(self.row_grad_vec(rows), dtype=float)
        rm = self.index.row_map
        width = 2 * self.index.r + 1
        out = np.zeros((rows.shape[0], width))
        for i, row in enumerate(rows):
            out[i] = np.bincount(rm, weights=self.grad_fn(row[rm]), minlength=width)
        return out


@dataclass
class HypothesisReport:
    """Sampler verdicts for the structural hypotheses of a potential."""

    samples: int
    seed: int
    shift_pass: bool
    shift_worst: float
    coercivity_note: str
    coupling_pass: bool
    coupling_worst_offdiag: float
    coupling_worst_nn: float
    gradient_pass: bool
    gradient_worst_rel: float

    @property
    def all_pass(self) -> bool:
        return self.shift_pass and self.coupling_pass and self.gradient_pass


def _cosine_well(lam: float):
    def V(x):
        return lam * (1.0 - np.cos(TWO_PI * x)) / TWO_PI**2

    def dV(x):
        return lam * np.sin(TWO_PI * x) / TWO_PI

    return V, dV


def _quadratic_coupling_example(
    n: int, V, dV, params: dict, name: str
) -> StencilPotential:
    """On-site well V plus (1/8n) * sum of squared nearest-neighbour jumps."""
    index = StencilIndex.build(n, 1)
    center = index.center
    nearest = np.array(index.nearest, dtype=np.intp)
    w = 1.0 / (8.0 * n)

    def eval_fn(vals: np.ndarray) -> float:
        x0 = vals[center]
        d = vals[nearest] - x0
        return float(V(x0) + w * np.dot(d, d))

    def grad_fn(vals: np.ndarray) -> np.ndarray:
        x0 = vals[center]
        d = vals[nearest] - x0
        g = np.zeros(len(index))
        g[nearest] = 2.0 * w * d
        g[center] = dV(x0) - 2.0 * w * np.sum(d)
        return g

    # Reduced rows are (u(-1), u(0), u(1)); transverse neighbours carry the
    # center value, so only the two longitudinal jumps contribute.
    def row_eval_vec(rows: np.ndarray) -> np.ndarray:
        x0 = rows[:, 1]
        dl = rows[:, 0] - x0
        dr = rows[:, 2] - x0
        return V(x0) + w * (dl * dl + dr * dr)

    def row_grad_vec(rows: np.ndarray) -> np.ndarray:
        x0 = rows[:, 1]
        dl = rows[:, 0] - x0
        dr = rows[:, 2] - x0
        out = np.empty_like(rows)
        out[:, 0] = 2.0 * w * dl
        out[:, 2] = 2.0 * w * dr
        out[:, 1] = dV(x0) - 2.0 * w * (dl + dr)
        return out

    return StencilPotential(
        index=index,
        params=params,
        eval_fn=eval_fn,
        grad_fn=grad_fn,
        row_eval_vec=row_eval_vec,
        row_grad_vec=row_grad_vec,
        coercivity_note="analytic: quadratic nearest-neighbour coupling",
        name=name,
    )


def make_fk_example(n: int, lam: float) -> StencilPotential:
    """Cosine-well chain potential with range 1.

    The on-site well lam*(1-cos 2*pi*x)/(2*pi)^2 has its minima exactly at
    the integers with value 0, so the uniform ground states are the integer
    constants and adjacent ground states sit one unit apart.
    """
    if lam <= 0:
        raise ValueError(f"coupling lambda must be positive, got {lam}")
    V, dV = _cosine_well(lam)
    return _quadratic_coupling_example(n, V, dV, {"lambda": float(lam)}, "fk_cosine")


def make_table_example(n: int, table) -> StencilPotential:
    """Chain potential whose on-site well interpolates tabulated samples.

    `table` holds samples of a 1-periodic well on the uniform grid j/m,
    j = 0..m-1.  Trigonometric interpolation gives the smooth periodic
    extension and an analytic derivative.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 1 or table.size < 2:
        raise ValueError("table must be a 1-D array with at least 2 samples")
    m = table.size
    coef = np.fft.rfft(table) / m
    ks = np.arange(1, coef.size)
    # Nyquist mode of an even-length table appears once, all others twice.
    wts = np.where(2 * ks == m, 1.0, 2.0)
    a = wts * coef[1:].real
    b = -wts * coef[1:].imag

    def V(x):
        x = np.asarray(x, dtype=float)
        ang = TWO_PI * np.multiply.outer(x, ks)
        out = coef[0].real + np.cos(ang) @ a + np.sin(ang) @ b
        return out if out.shape else float(out)

    def dV(x):
        x = np.asarray(x, dtype=float)
        ang = TWO_PI * np.multiply.outer(x, ks)
        out = (-np.sin(ang) * (TWO_PI * ks)) @ a + (np.cos(ang) * (TWO_PI * ks)) @ b
        return out if out.shape else float(out)

    return _quadratic_coupling_example(
        n, V, dV, {"table_size": float(m)}, "user_table"
    )


def check_hypotheses(
    pot: StencilPotential, samples: int, seed: int
) -> HypothesisReport:
    """Screen (H1)/(H3) and gradient consistency on random stencil data.

    Draws `samples` assignments uniform in [-2, 2] per stencil site.  Shift
    invariance is checked directly; mixed partials come from central
    differences of the gradient; the gradient itself is checked against
    central differences of the energy.  Failures are report content.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    size = len(pot.index)
    ones = np.ones(size)
    center = pot.index.center
    nearest = set(pot.index.nearest)

    shift_worst = 0.0
    grad_worst = 0.0
    worst_offdiag = -np.inf
    worst_nn = -np.inf

    for _ in range(samples):
        u = rng.uniform(-2.0, 2.0, size)

        shift_worst = max(shift_worst, abs(pot.eval(u + ones) - pot.eval(u)))

        g = pot.grad(u)
        scale = max(1.0, float(np.max(np.abs(g))))
        for k in range(size):
            e = np.zeros(size)
            e[k] = FD_STEP_GRAD
            fd = (pot.eval(u + e) - pot.eval(u - e)) / (2.0 * FD_STEP_GRAD)
            grad_worst = max(grad_worst, abs(fd - g[k]) / scale)

        for k in range(size):
            e = np.zeros(size)
            e[k] = FD_STEP_MIXED
            mixed = (pot.grad(u + e) - pot.grad(u - e)) / (2.0 * FD_STEP_MIXED)
            for j in range(size):
                if j == k:
                    continue
                worst_offdiag = max(worst_offdiag, float(mixed[j]))
            if k == center:
                for j in nearest:
                    worst_nn = max(worst_nn, float(mixed[j]))

    return HypothesisReport(
        samples=samples,
        seed=seed,
        shift_pass=shift_worst <= 1e-12,
        shift_worst=shift_worst,
        coercivity_note=pot.coercivity_note,
        coupling_pass=(worst_offdiag <= MIXED_PARTIAL_TOL)
        and (worst_nn < -MIXED_PARTIAL_TOL),
        coupling_worst_offdiag=worst_offdiag,
        coupling_worst_nn=worst_nn,
        gradient_pass=grad_worst <= 1e-6,
        gradient_worst_rel=grad_worst,
    )
