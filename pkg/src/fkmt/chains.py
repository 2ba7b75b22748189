"""Chain configurations: finite windows with constant tails.

A configuration assigns a real value to every integer site.  Profiles of
interest here are eventually constant, so a window of explicit values plus
two tail constants represents the whole chain exactly; every operation
(shifting, ordering, lattice min/max) is then exact as well.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Sites past both windows carry constant tails, so a fixed pad suffices to
# expose every tail relation to the comparison scan.
TAIL_PAD = 2

ORDER_EPS = 1e-9


class Ordering(Enum):
    LESS = "LESS"
    EQUAL = "EQUAL"
    GREATER = "GREATER"
    CROSSING = "CROSSING"


@dataclass(frozen=True, eq=False)
class ChainConfig:
    """Values on the window [lo, hi] with constant tails on both sides."""

    lo: int
    hi: int
    values: np.ndarray
    left_tail: float
    right_tail: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.lo > self.hi:
            raise ValueError(f"window start {self.lo} exceeds end {self.hi}")
        if vals.shape != (self.hi - self.lo + 1,):
            raise ValueError(
                f"values length {vals.shape} does not match window "
                f"[{self.lo}, {self.hi}]"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("configuration values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float, lo: int = 0, hi: int = 0) -> "ChainConfig":
        return cls(lo, hi, np.full(hi - lo + 1, float(value)), value, value)

    def at(self, i: int) -> float:
        if i < self.lo:
            return self.left_tail
        if i > self.hi:
            return self.right_tail
        return float(self.values[i - self.lo])

    def window(self, a: int, b: int) -> np.ndarray:
        """Values on the inclusive site range [a, b], tails filled in."""
        if a > b:
            raise ValueError(f"empty range [{a}, {b}]")
        out = np.empty(b - a + 1)
        idx = np.arange(a, b + 1)
        out[idx < self.lo] = self.left_tail
        out[idx > self.hi] = self.right_tail
        inside = (idx >= self.lo) & (idx <= self.hi)
        out[inside] = self.values[idx[inside] - self.lo]
        return out

    def with_values(self, values: np.ndarray) -> "ChainConfig":
        return ChainConfig(self.lo, self.hi, values, self.left_tail, self.right_tail)

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "values": [float(v) for v in self.values],
            "left_tail": self.left_tail,
            "right_tail": self.right_tail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainConfig":
        return cls(
            int(d["lo"]),
            int(d["hi"]),
            np.asarray(d["values"], dtype=float),
            float(d["left_tail"]),
            float(d["right_tail"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "ChainConfig":
        return cls.from_dict(json.loads(s))

    def to_csv(self) -> str:
        lines = ["i,u"]
        for i in range(self.lo, self.hi + 1):
            lines.append(f"{i},{float(self.values[i - self.lo])!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GapPair:
    """Adjacent uniform ground states v0 < w0 bounding the working slab."""

    v0: float
    w0: float
    rho_bar: float

    def __post_init__(self):
        if not self.v0 < self.w0:
            raise ValueError(f"need v0 < w0, got {self.v0}, {self.w0}")
        if abs(self.rho_bar - (self.w0 - self.v0)) > 1e-12:
            raise ValueError("rho_bar must equal w0 - v0")


def shift(u: ChainConfig, k: int) -> ChainConfig:
    """Translate by k sites: result(i) = u(i + k)."""
    if k == 0:
        return u
    return ChainConfig(u.lo - k, u.hi - k, u.values, u.left_tail, u.right_tail)


def _union_range(u: ChainConfig, v: ChainConfig) -> tuple[int, int]:
    return min(u.lo, v.lo) - TAIL_PAD, max(u.hi, v.hi) + TAIL_PAD


def compare(u: ChainConfig, v: ChainConfig, eps_ord: float = ORDER_EPS) -> Ordering:
    """Sitewise trichotomy of two chains, quotiented by numeric noise.

    EQUAL when sup |u - v| <= eps_ord over the union window padded into the
    tails; LESS/GREATER need one-sided separation beyond eps_ord somewhere
    and no violation beyond eps_ord anywhere; anything else is CROSSING.
    """
    if eps_ord < 0:
        raise ValueError("eps_ord must be nonnegative")
    a, b = _union_range(u, v)
    d = u.window(a, b) - v.window(a, b)
    below = float(np.min(d))
    above = float(np.max(d))
    if above <= eps_ord and -below <= eps_ord:
        return Ordering.EQUAL
    if above <= eps_ord:
        return Ordering.LESS
    if -below <= eps_ord:
        return Ordering.GREATER
    return Ordering.CROSSING


def pointwise_min_max(
    u: ChainConfig, v: ChainConfig
) -> tuple[ChainConfig, ChainConfig]:
    """Sitewise (min, max) over the union window, tails combined sitewise."""
    a = min(u.lo, v.lo)
    b = max(u.hi, v.hi)
    uu = u.window(a, b)
    vv = v.window(a, b)
    lo_t = (min(u.left_tail, v.left_tail), max(u.left_tail, v.left_tail))
    hi_t = (min(u.right_tail, v.right_tail), max(u.right_tail, v.right_tail))
    return (
        ChainConfig(a, b, np.minimum(uu, vv), lo_t[0], hi_t[0]),
        ChainConfig(a, b, np.maximum(uu, vv), lo_t[1], hi_t[1]),
    )


def configs_allclose(u: ChainConfig, v: ChainConfig, tol: float = 0.0) -> bool:
    a, b = _union_range(u, v)
    return bool(np.max(np.abs(u.window(a, b) - v.window(a, b))) <= tol)
