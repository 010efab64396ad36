"""Acceptance suite.

Each test runs one acceptance criterion at full size with the default
tolerance policy, prints a single ``PASS``/``FAIL`` line and enforces the
wall-clock budget where one applies.  The lines are repeated in the pytest
terminal summary (see ``conftest.py``); running this file directly with
``python tests/test_acceptance.py`` prints them as well.
"""
from __future__ import annotations

import math
import subprocess
import sys
import time

import pytest

from minkval.harness.config import SuiteConfig
from minkval.harness.runner import run_suite

CFG = SuiteConfig()  # 20 bodies, 50 pairs, 20k Grassmann samples, 3 SE
LINES: list[str] = []


def _summary(results) -> tuple[bool, str]:
    bad = [r for r in results if not r.passed]
    ratios = [abs(r.gap) / r.tol for r in results if r.relation == "approx" and r.tol > 0]
    worst = f", worst gap/tol {max(ratios):.3f}" if ratios else ""
    detail = f"{len(results) - len(bad)}/{len(results)} checks pass{worst}"
    if bad:
        detail += "; failing: " + ", ".join(sorted({r.id for r in bad})[:5])
    return not bad, detail


def _criterion(name: str, limit: float | None, body) -> None:
    t0 = time.perf_counter()
    ok, detail = body()
    dt = time.perf_counter() - t0
    in_time = limit is None or dt < limit
    budget = f"{dt:.1f} s" + (f" < {limit:.0f} s" if limit is not None else "")
    if not in_time:
        budget = f"{dt:.1f} s exceeds {limit:.0f} s"
    line = f"{'PASS' if ok and in_time else 'FAIL'}  {name}: {detail} [{budget}]"
    LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def _families(suite: str, *families: str, cfg: SuiteConfig = CFG):
    return run_suite(cfg, suite, families=list(families))


def _count(results, prefix: str) -> int:
    return sum(r.id.startswith(prefix) for r in results)


# ---------------------------------------------------------------- criteria


def test_projection_body_two_routes():
    def body():
        res = _families("identities", "cauchy")
        assert len(res) == 1 + CFG.body_count
        return _summary(res)

    _criterion("projection body: cosine transform of S_{n-1} vs direct projection (cube 1e-9, 20 bodies 1e-6 rel)",
               10.0, body)


def test_kubota_vs_steiner():
    def body():
        res = _families("identities", "kubota.steiner")
        assert _count(res, "kubota.cube_target.") == 4
        assert _count(res, "kubota.steiner.W1") == _count(res, "kubota.steiner.W2") == 1 + CFG.body_count
        return _summary(res)

    _criterion("Kubota vs Steiner fit: W_1, W_2 on 20 bodies and the cube targets", 120.0, body)


def test_crofton_realisation_of_pi_i():
    def body():
        res = _families("identities", "crofton.pi_i")
        for i in (1, 2):
            assert _count(res, f"crofton.pi_i.i{i}") == 11
            assert _count(res, f"crofton.pi_i.support_function.i{i}") == 11
        return _summary(res)

    _criterion("Crofton measure of Pi_i reproduces h(Pi_i K) at every node, i = 1, 2, cube + 10 bodies",
               180.0, body)


def test_convolution_identities():
    fams = ("conv.equivariance", "conv.group_consistency", "conv.adjoint", "conv.antihomomorphism",
            "hat.lemma", "hat.zonal", "dirac", "approx_identity")

    def body():
        res = _families("identities", *fams)
        assert _count(res, "hat.invariant_function.") == 2
        assert _count(res, "approx_identity.decreasing.") == 2
        return _summary(res)

    _criterion("convolution calculus: equivariance, adjoint, anti-homomorphism, hat, Dirac, approximate identity",
               120.0, body)


def test_klain_is_cosine_transform():
    def body():
        res = _families("identities", "klain.cosine")
        assert _count(res, "klain.cosine_transform.") == 5 * len(CFG.degrees)
        return _summary(res)

    _criterion("Klain function = cosine transform for 5 signed Crofton measures at 50 subspaces", 60.0, body)


def test_mixed_quermass_symmetry():
    def body():
        res = _families("inequalities", "symmetry")
        for op in ("pi1", "pi2", "lambda1", "lambda2"):
            assert _count(res, f"symmetry.{op}") == CFG.body_count
        return _summary(res)

    _criterion("symmetry W(K, Phi L) = W(L, Phi K) for Pi_1, Pi_2, Lambda_1, Lambda_2 on 20 pairs", 180.0, body)


def test_brunn_minkowski_for_pi_2():
    def body():
        res = [r for r in _families("inequalities", "bm") if r.id.startswith("bm.pi2.")]
        for kind in ("inequality", "strict", "homothetic"):
            assert _count(res, f"bm.pi2.{kind}") == CFG.pair_count
        return _summary(res)

    _criterion("Brunn-Minkowski for Pi_2: inequality, strict gap, homothetic equality on 50 pairs", 300.0, body)


def test_radial_factor_of_pi_2():
    def body():
        res = [r for r in _families("inequalities", "radial.ball", "radial.factor") if r.id.endswith(".pi2")]
        ball = next(r for r in res if r.id == "radial.ball.pi2")
        assert ball.rhs == pytest.approx(math.pi)
        assert _count(res, "radial.factor.pi2") == CFG.body_count
        return _summary(res)

    _criterion("radial factor: r(Pi_2) = pi and W_2(Pi_2 K) = r W_1(K) on 20 bodies", None, body)


def test_identity_report_is_deterministic():
    cmd = [sys.executable, "-m", "minkval.harness.cli", "verify", "identities", "--seed", "7"]

    def body():
        runs = [subprocess.run(cmd + extra, capture_output=True, check=False) for extra in ([], [], ["--jobs", "2"])]
        codes = [p.returncode for p in runs]
        outs = [p.stdout for p in runs]
        same = outs[0] == outs[1]
        par = outs[0] == outs[2]
        ok = same and par and len(outs[0]) > 0 and codes == [0, 0, 0]
        return ok, (f"serial runs identical: {same}, parallel matches serial: {par}, "
                    f"{len(outs[0])} bytes, exit codes {codes}")

    _criterion("determinism: verify identities --seed 7 twice and with --jobs 2", None, body)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
