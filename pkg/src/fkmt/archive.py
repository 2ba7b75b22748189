"""Solution archives: self-describing JSON records of a solver run.

An archive carries the config echo, the detected gap, the computed energy
levels, every solve report with its diagnostics block, and timestamps.
Serialization is canonical (sorted keys, fixed separators), so equal
archives produce identical bytes; comparisons that ignore wall-clock
fields use the volatile-stripped form.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "fkmt-1"

# Fields that legitimately differ between reruns of the same computation.
_VOLATILE_ARCHIVE_KEYS = ("created_at",)
_VOLATILE_REPORT_KEYS = ("wall_time",)


@dataclass
class SolutionArchive:
    schema_version: str
    config: dict
    seed: int
    gap: dict | None = None
    levels: dict = field(default_factory=dict)
    reports: list[dict] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    level_checks: list = field(default_factory=list)
    created_at: str = ""

    @classmethod
    def fresh(cls, config: dict, seed: int) -> "SolutionArchive":
        return cls(
            schema_version=SCHEMA_VERSION,
            config=config,
            seed=seed,
            created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "seed": self.seed,
            "gap": self.gap,
            "levels": self.levels,
            "reports": self.reports,
            "diagnostics": self.diagnostics,
            "level_checks": [list(c) for c in self.level_checks],
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionArchive":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported archive schema {d.get('schema_version')!r}"
            )
        return cls(
            schema_version=d["schema_version"],
            config=d["config"],
            seed=int(d["seed"]),
            gap=d.get("gap"),
            levels=d.get("levels", {}),
            reports=d.get("reports", []),
            diagnostics=d.get("diagnostics", []),
            level_checks=[tuple(c) for c in d.get("level_checks", [])],
            created_at=d.get("created_at", ""),
        )

    def canonical_json(self, volatile: bool = True) -> str:
        d = self.to_dict()
        if not volatile:
            for key in _VOLATILE_ARCHIVE_KEYS:
                d.pop(key, None)
            d["reports"] = [
                {k: v for k, v in rep.items() if k not in _VOLATILE_REPORT_KEYS}
                for rep in d["reports"]
            ]
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.canonical_json(volatile=True))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SolutionArchive":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def archives_equal_modulo_volatile(a: SolutionArchive, b: SolutionArchive) -> bool:
    return a.canonical_json(volatile=False) == b.canonical_json(volatile=False)
