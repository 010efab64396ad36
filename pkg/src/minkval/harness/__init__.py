"""Verification harness: identity and inequality suites, reports and CLI."""
from .checks import CheckResult, derive_seed
from .config import SuiteConfig
from .report import read_report, render, write_report
from .runner import plan, replay, run_suite


def run_identity_suite(cfg: SuiteConfig, jobs: int = 1) -> list[CheckResult]:
    return run_suite(cfg, "identities", jobs)


def run_inequality_suite(cfg: SuiteConfig, jobs: int = 1) -> list[CheckResult]:
    return run_suite(cfg, "inequalities", jobs)


__all__ = ["CheckResult", "SuiteConfig", "derive_seed", "plan", "read_report", "render", "replay",
           "run_identity_suite", "run_inequality_suite", "run_suite", "write_report"]
