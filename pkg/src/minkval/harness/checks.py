"""Check results and the helpers that turn estimates into pass/fail verdicts."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

RELATIONS = ("approx", "geq", "gt", "lt")


@dataclass
class CheckResult:
    """Outcome of one comparison.

    ``relation`` fixes how ``gap`` is read: ``approx`` passes when
    ``gap = |lhs - rhs| <= tol``; ``geq`` when ``gap = lhs - rhs >= -tol``;
    ``gt`` when ``gap = lhs - rhs > tol``; ``lt`` when ``gap = rhs - lhs > tol``.
    """

    id: str
    anchor: str
    lhs: float
    rhs: float
    gap: float
    tol: float
    passed: bool
    seed: int
    se: float = 0.0
    relation: str = "approx"
    witness: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "lhs": _f(self.lhs),
            "rhs": _f(self.rhs),
            "gap": _f(self.gap),
            "tol": _f(self.tol),
            "pass": bool(self.passed),
            "seed": int(self.seed),
            "se": _f(self.se),
            "relation": self.relation,
            "witness": self.witness,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckResult":
        return cls(d["id"], d["anchor"], d["lhs"], d["rhs"], d["gap"], d["tol"], d["pass"], d["seed"],
                   d.get("se", 0.0), d.get("relation", "approx"), d.get("witness"), d.get("note", ""))

    def __eq__(self, other) -> bool:
        return isinstance(other, CheckResult) and self.to_dict() == other.to_dict()


def _f(x) -> float:
    x = float(x)
    return x if math.isfinite(x) else (float("inf") if x > 0 else float("-inf") if x < 0 else float("nan"))


def derive_seed(base: int, family: str, instance: int) -> int:
    """Seed for one task; independent of scheduling."""
    ss = np.random.SeedSequence([int(base), zlib.crc32(family.encode()), int(instance)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def verdict(relation: str, gap: float, tol: float) -> bool:
    if not math.isfinite(gap):
        return False
    if relation == "approx":
        return gap <= tol
    if relation == "geq":
        return gap >= -tol
    if relation in ("gt", "lt"):
        return gap > tol
    raise ValueError(f"unknown relation {relation!r}")


def make(id: str, anchor: str, lhs: float, rhs: float, tol: float, seed: int, *, se: float = 0.0,
         relation: str = "approx", witness: dict | None = None, note: str = "") -> CheckResult:
    lhs, rhs = float(lhs), float(rhs)
    if relation == "approx":
        gap = abs(lhs - rhs)
    elif relation in ("geq", "gt"):
        gap = lhs - rhs
    elif relation == "lt":
        gap = rhs - lhs
    else:
        raise ValueError(f"unknown relation {relation!r}")
    ok = verdict(relation, gap, tol)
    return CheckResult(id, anchor, lhs, rhs, gap, float(tol), ok, int(seed), float(se), relation,
                       None if ok else witness, note)


def worst_pointwise(id: str, anchor: str, lhs: np.ndarray, rhs: np.ndarray, tol: np.ndarray, seed: int, *,
                    se: np.ndarray | None = None, witness: dict | None = None, note: str = "") -> CheckResult:
    """Collapse a pointwise comparison into the result at the worst point
    (largest ``|lhs - rhs| / tol``); passes only if every point passes."""
    lhs = np.asarray(lhs, float)
    rhs = np.asarray(rhs, float)
    tol = np.broadcast_to(np.asarray(tol, float), lhs.shape)
    gap = np.abs(lhs - rhs)
    ratio = gap / np.maximum(tol, 1e-300)
    k = int(np.argmax(ratio))
    ok = bool(np.all(gap <= tol))
    s = 0.0 if se is None else float(np.broadcast_to(se, lhs.shape)[k])
    w = None
    if not ok:
        w = dict(witness or {})
        w["point"] = k
        w["failing_points"] = int(np.sum(gap > tol))
    extra = f"{lhs.size} points"
    return CheckResult(id, anchor, float(lhs[k]), float(rhs[k]), float(gap[k]), float(tol[k]), ok, int(seed), s,
                       "approx", w, f"{note}; {extra}" if note else extra)


def se_tol(cfg, *se) -> float:
    """``max(floor, tol_mult * sqrt(sum se^2))``."""
    s = math.sqrt(sum(float(x) ** 2 for x in se))
    return max(cfg.floor, cfg.tol_mult * s)


def rel_or_se_tol(cfg, scale: float, rel: float, *se) -> float:
    """``max(rel * |scale|, tol_mult * sqrt(sum se^2))``."""
    s = math.sqrt(sum(float(x) ** 2 for x in se))
    return max(rel * abs(scale), cfg.tol_mult * s, cfg.floor)
