"""Run configuration: INI-style sections, strictly validated.

Every referenced key is validated before any computation starts; unknown
sections or keys are rejected.  The parsed record echoes back into the
archive so a stored run is reproducible from the archive alone.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

from .problems import TransitionKind, TransitionPattern


class ConfigError(Exception):
    """Invalid or unknown configuration content."""


_SECTIONS = {
    "run": {"seed"},
    "potential": {"kind", "n", "r", "lambda", "table"},
    "gap": {"direction"},
    "problem": {"kind", "m", "l", "rho", "window", "front_window"},
    "solve": {"tol", "max_iter", "algorithm"},
    "output": {"directory", "formats"},
    "sweep": {"separations", "l_values", "workers"},
}

_POTENTIAL_KINDS = ("fk_cosine", "user_table")
_ALGORITHMS = ("projected_gradient", "gauss_seidel", "hybrid")


@dataclass
class RunConfig:
    seed: int = 0
    potential_kind: str = "fk_cosine"
    n: int = 2
    r: int = 1
    lam: float = 1.0
    table: tuple[float, ...] = ()
    gap_direction: str = "ascending"
    problem_kind: str = "homoclinic_v0_2k"
    m: tuple[int, ...] = ()
    l: int = 5
    rho: tuple[float, float, float, float] | None = None  # None means auto
    window: tuple[int, int] | None = None
    front_window: tuple[int, int] = (-60, 60)
    tol: float = 1e-10
    max_iter: int = 200_000
    algorithm: str = "hybrid"
    directory: str = "out"
    formats: tuple[str, ...] = ("json", "csv")
    separations: tuple[int, ...] = ()
    l_values: tuple[int, ...] = ()
    workers: int = 1

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "potential": {
                "kind": self.potential_kind,
                "n": self.n,
                "r": self.r,
                "lambda": self.lam,
                "table": list(self.table),
            },
            "gap": {"direction": self.gap_direction},
            "problem": {
                "kind": self.problem_kind,
                "m": list(self.m),
                "l": self.l,
                "rho": list(self.rho) if self.rho else "auto",
                "window": list(self.window) if self.window else None,
                "front_window": list(self.front_window),
            },
            "solve": {
                "tol": self.tol,
                "max_iter": self.max_iter,
                "algorithm": self.algorithm,
            },
            "output": {
                "directory": self.directory,
                "formats": list(self.formats),
            },
            "sweep": {
                "separations": list(self.separations),
                "l_values": list(self.l_values),
                "workers": self.workers,
            },
        }

    def pattern(self) -> TransitionPattern:
        """Build (and thereby validate) the configured transition pattern."""
        try:
            kind = TransitionKind(self.problem_kind)
        except ValueError:
            raise ConfigError(f"unknown problem kind {self.problem_kind!r}")
        try:
            if kind is TransitionKind.BASIC_HETEROCLINIC:
                return TransitionPattern(
                    kind=kind, l=self.l, direction=self.gap_direction
                )
            if not self.m:
                raise ConfigError("problem.m is required for this kind")
            return TransitionPattern(
                kind=kind, l=self.l, m=self.m, rho=self.rho,
                direction=self.gap_direction,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split())


def parse_config(path: str) -> RunConfig:
    """Parse and validate a config file; no computation happens here."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    cfg = RunConfig()
    try:
        if cp.has_option("run", "seed"):
            cfg.seed = cp.getint("run", "seed")
        if cp.has_section("potential"):
            sec = cp["potential"]
            cfg.potential_kind = sec.get("kind", cfg.potential_kind)
            if cfg.potential_kind not in _POTENTIAL_KINDS:
                raise ConfigError(
                    f"unknown potential kind {cfg.potential_kind!r}"
                )
            cfg.n = sec.getint("n", cfg.n)
            cfg.r = sec.getint("r", cfg.r)
            cfg.lam = sec.getfloat("lambda", cfg.lam)
            if "table" in sec:
                cfg.table = _floats(sec["table"])
        if cp.has_option("gap", "direction"):
            cfg.gap_direction = cp.get("gap", "direction")
            if cfg.gap_direction not in ("ascending", "descending"):
                raise ConfigError(
                    f"unknown gap direction {cfg.gap_direction!r}"
                )
        if cp.has_section("problem"):
            sec = cp["problem"]
            cfg.problem_kind = sec.get("kind", cfg.problem_kind)
            if "m" in sec:
                cfg.m = _ints(sec["m"])
            cfg.l = sec.getint("l", cfg.l)
            if "rho" in sec and sec["rho"].strip() != "auto":
                vals = _floats(sec["rho"])
                if len(vals) != 4:
                    raise ConfigError("problem.rho needs 4 reals or 'auto'")
                cfg.rho = (vals[0], vals[1], vals[2], vals[3])
            if "window" in sec:
                w = _ints(sec["window"])
                if len(w) != 2 or w[0] >= w[1]:
                    raise ConfigError("problem.window needs two ints lo < hi")
                cfg.window = (w[0], w[1])
            if "front_window" in sec:
                w = _ints(sec["front_window"])
                if len(w) != 2 or w[0] >= w[1]:
                    raise ConfigError(
                        "problem.front_window needs two ints lo < hi"
                    )
                cfg.front_window = (w[0], w[1])
        if cp.has_section("solve"):
            sec = cp["solve"]
            cfg.tol = sec.getfloat("tol", cfg.tol)
            cfg.max_iter = sec.getint("max_iter", cfg.max_iter)
            cfg.algorithm = sec.get("algorithm", cfg.algorithm)
            if cfg.algorithm not in _ALGORITHMS:
                raise ConfigError(f"unknown algorithm {cfg.algorithm!r}")
            if cfg.tol <= 0:
                raise ConfigError("solve.tol must be positive")
            if cfg.max_iter < 1:
                raise ConfigError("solve.max_iter must be >= 1")
        if cp.has_section("output"):
            sec = cp["output"]
            cfg.directory = sec.get("directory", cfg.directory)
            if "formats" in sec:
                cfg.formats = tuple(sec["formats"].split())
                for fmt in cfg.formats:
                    if fmt not in ("json", "csv"):
                        raise ConfigError(f"unknown output format {fmt!r}")
        if cp.has_section("sweep"):
            sec = cp["sweep"]
            if "separations" in sec:
                cfg.separations = _ints(sec["separations"])
            if "l_values" in sec:
                cfg.l_values = _ints(sec["l_values"])
            cfg.workers = sec.getint("workers", cfg.workers)
            if cfg.workers < 1:
                raise ConfigError("sweep.workers must be >= 1")
    except (ValueError, configparser.Error) as exc:
        raise ConfigError(str(exc)) from exc

    if cfg.n < 2:
        raise ConfigError("potential.n must be >= 2")
    if cfg.r != 1:
        raise ConfigError("built-in potentials have interaction range 1")
    if cfg.potential_kind == "fk_cosine" and cfg.lam <= 0:
        raise ConfigError("potential.lambda must be positive")
    if cfg.potential_kind == "user_table" and len(cfg.table) < 2:
        raise ConfigError("potential.table needs at least 2 samples")

    env_seed = os.environ.get("FK_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"FK_SEED must be an integer, got {env_seed!r}")
    return cfg
