"""Task scheduling for the verification suites.

A task is ``(suite, family, n, instance)``.  Each task draws its randomness
from its own seed, so the merged result list does not depend on how tasks
are distributed over worker processes.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from . import identities, inequalities
from .checks import CheckResult
from .config import SuiteConfig
from .report import sort_results

SUITES = {"identities": identities.FAMILIES, "inequalities": inequalities.FAMILIES}


def dimensions(cfg: SuiteConfig) -> list[int]:
    dims = [cfg.n]
    if cfg.include_n4 and 4 not in dims:
        dims.append(4)
    return dims


def plan(cfg: SuiteConfig, suite: str, families=None) -> list[tuple[str, str, int, int]]:
    """All tasks of a suite in canonical order."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    registry = SUITES[suite]
    names = list(registry) if not families else [f for f in registry if f in set(families)]
    unknown = set(families or ()) - set(registry)
    if unknown:
        raise ValueError(f"unknown families: {sorted(unknown)}")
    tasks = []
    for n in dimensions(cfg):
        for name in names:
            for inst in range(registry[name][1](cfg)):
                tasks.append((suite, name, n, inst))
    return tasks


def run_task(cfg: SuiteConfig, task: tuple[str, str, int, int]) -> list[CheckResult]:
    """Run one task; failing results get a replayable witness."""
    suite, family, n, inst = task
    fn = SUITES[suite][family][0]
    results = fn(cfg, n, inst)
    for r in results:
        if n != cfg.n:
            r.id = f"n{n}.{r.id}"
        if not r.passed:
            w = dict(r.witness or {})
            w.update({"suite": suite, "family": family, "n": n, "instance": inst, "check": r.id,
                      "config": cfg.to_dict()})
            r.witness = w
    return results


def _run_star(args):
    return run_task(*args)


def run_suite(cfg: SuiteConfig, suite: str, jobs: int = 1, families=None) -> list[CheckResult]:
    """Run every task of ``suite``; ``jobs > 1`` uses worker processes."""
    tasks = plan(cfg, suite, families)
    if jobs <= 1 or len(tasks) <= 1:
        chunks = [run_task(cfg, t) for t in tasks]
    else:
        workers = min(jobs, os.cpu_count() or 1, len(tasks)) if jobs > 0 else None
        with ProcessPoolExecutor(max_workers=max(1, workers or 1)) as ex:
            chunks = list(ex.map(_run_star, [(cfg, t) for t in tasks]))
    return sort_results([r for chunk in chunks for r in chunk])


def replay(witness: dict) -> list[CheckResult]:
    """Re-run the task named in a witness and return the results of its check id."""
    missing = {"suite", "family", "n", "instance", "config"} - set(witness)
    if missing:
        raise ValueError(f"witness lacks {sorted(missing)}")
    cfg = SuiteConfig.from_dict(witness["config"])
    results = run_task(cfg, (witness["suite"], witness["family"], int(witness["n"]), int(witness["instance"])))
    check = witness.get("check")
    return [r for r in results if check is None or r.id == check]
