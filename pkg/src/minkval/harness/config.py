"""Suite configuration."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class SuiteConfig:
    """Sizes, seeds and tolerance policy for a verification run.

    A stochastic check passes when its gap is at most
    ``max(floor, tol_mult * se)`` (or a stated relative budget for checks
    whose error is a modelling error rather than sampling noise).
    """

    seed: int = 0
    n: int = 3
    degrees: tuple = (1, 2)
    body_count: int = 20
    pair_count: int = 50
    sphere_nodes: int = 20000
    gr_samples: int = 20000
    inner: int = 512
    tol_mult: float = 3.0
    floor: float = 1e-8
    include_n4: bool = False
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        for name in ("body_count", "pair_count", "sphere_nodes", "gr_samples", "inner"):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tol_mult < 1:
            raise ValueError("tol_mult must be at least 1")
        if self.floor < 0:
            raise ValueError("floor must be nonnegative")
        if self.n not in (3, 4):
            raise ValueError("n must be 3 or 4")
        degrees = tuple(int(i) for i in self.degrees)
        if any(not 1 <= i <= self.n - 1 for i in degrees):
            raise ValueError(f"degrees must lie in 1..{self.n - 1}")
        object.__setattr__(self, "degrees", degrees)
        if self.format not in ("json", "csv", "markdown"):
            raise ValueError("format must be json, csv or markdown")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["degrees"] = list(self.degrees)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "SuiteConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **changes) -> "SuiteConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def echo(self) -> dict:
        """Fields that influence results; output location and format excluded."""
        d = self.to_dict()
        d.pop("output")
        d.pop("format")
        return d

    def run_id(self, suite: str) -> str:
        """Stable identifier derived from the suite name and the sizing fields."""
        d = self.echo()
        blob = json.dumps({"suite": suite, "config": d}, sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]
