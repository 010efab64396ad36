import json
import math
import subprocess
import sys

import numpy as np
import pytest

from minkval.harness import identities, inequalities
from minkval.harness.checks import (CheckResult, derive_seed, make, rel_or_se_tol, se_tol, verdict,
                                    worst_pointwise)
from minkval.harness.cli import main
from minkval.harness.config import SuiteConfig
from minkval.harness.report import CSV_COLUMNS, parse_json, read_report, render, summary, write_report
from minkval.harness.runner import plan, replay, run_suite, run_task

SMALL = dict(sphere_nodes=500, gr_samples=500, inner=32, body_count=2, pair_count=2)
SMALL_FLAGS = ["--nodes", "500", "--gr-samples", "500", "--inner", "32", "--bodies", "2", "--pairs", "2"]


@pytest.fixture
def small():
    return SuiteConfig(**SMALL)


# ---------------------------------------------------------------- config


@pytest.mark.parametrize("bad", [dict(n=5), dict(tol_mult=0.5), dict(floor=-1.0), dict(sphere_nodes=0),
                                 dict(degrees=(3,)), dict(format="xml")])
def test_config_rejects_bad_values(bad):
    with pytest.raises(ValueError):
        SuiteConfig(**bad)


def test_config_dict_roundtrip_and_unknown_keys(tmp_path):
    cfg = SuiteConfig(seed=4, n=4, degrees=(1, 3), output="x.json")
    assert SuiteConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError, match="unknown config keys"):
        SuiteConfig.from_dict({"seed": 1, "nodes": 5})
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 9}))
    assert SuiteConfig.from_file(p).seed == 9


def test_config_replace_and_run_id():
    cfg = SuiteConfig()
    assert cfg.replace(seed=None, n=4).n == 4
    assert cfg.replace(seed=None).seed == 0
    assert "output" not in cfg.echo() and "format" not in cfg.echo()
    assert cfg.run_id("identities") == cfg.replace(output="a.json", format="csv").run_id("identities")
    assert cfg.run_id("identities") != cfg.replace(seed=1).run_id("identities")
    assert cfg.run_id("identities") != cfg.run_id("inequalities")


# ---------------------------------------------------------------- checks


def test_derive_seed_is_deterministic_and_separates_tasks():
    assert derive_seed(7, "dirac", 0) == derive_seed(7, "dirac", 0)
    assert len({derive_seed(7, "dirac", 0), derive_seed(7, "dirac", 1), derive_seed(7, "bm", 0),
                derive_seed(8, "dirac", 0)}) == 4


def test_verdict_relations():
    assert verdict("approx", 0.1, 0.1) and not verdict("approx", 0.2, 0.1)
    assert verdict("geq", -0.1, 0.1) and not verdict("geq", -0.2, 0.1)
    assert verdict("gt", 0.2, 0.1) and not verdict("gt", 0.1, 0.1)
    assert not verdict("approx", math.nan, 1.0)
    with pytest.raises(ValueError):
        verdict("ne", 0.0, 1.0)


def test_make_keeps_witness_only_on_failure():
    ok = make("a", "x", 1.0, 1.05, 0.1, 3, witness={"k": 1})
    bad = make("a", "x", 1.0, 1.5, 0.1, 3, witness={"k": 1})
    assert ok.passed and ok.witness is None
    assert not bad.passed and bad.witness == {"k": 1}
    assert make("b", "x", 2.0, 1.0, 0.5, 0, relation="gt").gap == pytest.approx(1.0)
    assert make("c", "x", 1.0, 2.0, 0.5, 0, relation="lt").passed
    with pytest.raises(ValueError):
        make("d", "x", 1.0, 1.0, 0.1, 0, relation="ne")


def test_worst_pointwise_reports_worst_point():
    r = worst_pointwise("w", "x", np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.5, 3.1]), np.array([1.0, 0.1, 1.0]), 0)
    assert not r.passed
    assert r.lhs == 2.0 and r.witness["point"] == 1 and r.witness["failing_points"] == 1
    assert worst_pointwise("w", "x", np.ones(4), np.ones(4), 0.0, 0).passed


def test_tolerance_helpers(small):
    assert se_tol(small, 0.0) == small.floor
    assert se_tol(small, 3.0, 4.0) == pytest.approx(15.0)
    assert rel_or_se_tol(small, 200.0, 0.01, 0.1) == pytest.approx(2.0)
    assert rel_or_se_tol(small, 1.0, 0.01, 1.0) == pytest.approx(3.0)


# ---------------------------------------------------------------- reports


def _results():
    return [make("b.check", "anchor b", 1.0, 1.0, 0.1, 2, se=0.01),
            make("a.check", "anchor a", 1.0, 2.0, 0.1, 1, witness={"k": [1, 2]})]


def test_json_report_roundtrip(tmp_path):
    p = write_report(_results(), tmp_path / "r.json", "json", {"seed": 1}, "abc", {"wall_clock_seconds": 1.5})
    results, doc = read_report(p)
    assert [r.id for r in results] == ["a.check", "b.check"]
    assert results == sorted(_results(), key=lambda r: r.id)
    assert doc["summary"] == {"total": 2, "passed": 1, "failed": 1}
    assert doc["run_id"] == "abc" and doc["wall_clock_seconds"] == 1.5
    assert CheckResult.from_dict(results[0].to_dict()) == results[0]


def test_empty_report():
    results, doc = parse_json(render([], "json"))
    assert results == [] and doc["summary"] == {"total": 0, "passed": 0, "failed": 0}
    assert render([], "csv").strip() == ",".join(CSV_COLUMNS)


def test_csv_and_markdown_reports():
    lines = render(_results(), "csv").splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert lines[1].startswith("a.check,anchor a,") and lines[1].endswith(",false,1")
    md = render(_results(), "markdown", {"seed": 1}, "abc")
    assert "1 of 2 checks passed" in md and "| seed | 1 |" in md and "| NO |" in md
    with pytest.raises(ValueError):
        render([], "xml")


def test_summary_counts():
    assert summary(_results()) == {"total": 2, "passed": 1, "failed": 1}


# ---------------------------------------------------------------- families


def test_perturbed_cosine_kernel_fails_self_adjointness(small):
    cfg = small.replace(gr_samples=20000)
    honest = identities.cosine_selfadjoint(cfg, 3, 0)
    assert all(r.passed for r in honest)
    bad = identities.cosine_selfadjoint(cfg, 3, 0, kernel=identities.perturbed_cosine_kernel,
                                        id_prefix="cosine.selfadjoint.perturbed")
    assert all(not r.passed for r in bad)
    for r in bad:
        assert r.gap > r.tol
        assert r.witness is not None and {"bodies", "i"} <= set(r.witness)


def test_approximate_identity_is_monotone_on_a_coarse_grid(small):
    results = identities.approx_identity(small.replace(sphere_nodes=100), 3, 0)
    assert results and all(r.passed for r in results)


FAMILY_TASKS = [(suite, name, n) for suite, fams in (("identities", identities.FAMILIES),
                                                      ("inequalities", inequalities.FAMILIES))
                for name in fams for n in (3, 4) if (name, n) != ("radial.ball", 4)]


@pytest.mark.parametrize("suite,family,n", FAMILY_TASKS)
def test_family_passes_at_small_sizes(small, suite, family, n):
    results = run_task(small, (suite, family, n, 0))
    failed = [r.id for r in results if not r.passed]
    assert results and not failed


# ---------------------------------------------------------------- runner


def test_plan_counts_and_validation(small):
    tasks = plan(small, "identities", ["dirac", "cauchy"])
    assert tasks == [("identities", "dirac", 3, 0), ("identities", "cauchy", 3, 0), ("identities", "cauchy", 3, 1),
                     ("identities", "cauchy", 3, 2)]
    assert len(plan(small.replace(include_n4=True), "identities", ["dirac"])) == 2
    with pytest.raises(ValueError):
        plan(small, "nope")
    with pytest.raises(ValueError):
        plan(small, "identities", ["nope"])


def test_parallel_run_matches_serial(small):
    fams = ["dirac", "conv.adjoint", "kubota.steiner"]
    a = run_suite(small, "identities", 1, fams)
    b = run_suite(small, "identities", 2, fams)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_replay_reruns_a_task(small):
    results = run_task(small, ("identities", "dirac", 3, 0))
    w = {"suite": "identities", "family": "dirac", "n": 3, "instance": 0, "config": small.to_dict(),
         "check": results[0].id}
    again = replay(w)
    assert [r.to_dict() for r in again] == [results[0].to_dict()]
    with pytest.raises(ValueError):
        replay({"suite": "identities"})


def _always_fails(cfg, n, inst):
    return [make("forced.failure", "deliberate failure", 1.0, 2.0, 0.1, 0, witness={"why": "test"})]


def test_failures_carry_replayable_witness(small, monkeypatch):
    monkeypatch.setitem(identities.FAMILIES, "forced", (_always_fails, lambda c: 1))
    [r] = run_suite(small, "identities", 1, ["forced"])
    assert not r.passed
    assert {"suite", "family", "n", "instance", "check", "config", "why"} <= set(r.witness)
    assert not replay(r.witness)[0].passed


# ---------------------------------------------------------------- CLI


def _verify(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["verify", "identities", "--seed", "7", *SMALL_FLAGS, "--family", "dirac", "--family",
                 "conv.antihomomorphism", "--family", "cauchy", "--out", str(out), *extra])
    return code, out.read_bytes()


def test_cli_verify_is_deterministic_and_parallel_safe(tmp_path):
    c1, a = _verify(tmp_path, "a.json")
    c2, b = _verify(tmp_path, "b.json")
    c3, c = _verify(tmp_path, "c.json", "--jobs", "2")
    assert c1 == c2 == c3 == 0
    assert a == b == c
    doc = json.loads(a)
    assert doc["config"]["seed"] == 7 and doc["run_id"] and "wall_clock_seconds" not in doc
    assert all("se" in r for r in doc["results"])


def test_cli_timing_and_formats(tmp_path, capsys):
    code, data = _verify(tmp_path, "t.json", "--timing")
    assert code == 0 and "wall_clock_seconds" in json.loads(data)
    assert "passed" in capsys.readouterr().err
    assert main(["report", str(tmp_path / "t.json"), "--format", "csv", "--out", str(tmp_path / "t.csv")]) == 0
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_cli_exit_codes_and_replay(tmp_path, monkeypatch):
    monkeypatch.setitem(identities.FAMILIES, "forced", (_always_fails, lambda c: 1))
    out = tmp_path / "fail.json"
    assert main(["verify", "identities", *SMALL_FLAGS, "--family", "forced", "--out", str(out)]) == 1
    assert main(["replay", str(out), "--out", str(tmp_path / "r.json")]) == 1
    witness = json.loads(out.read_text())["results"][0]["witness"]
    (tmp_path / "w.json").write_text(json.dumps(witness))
    assert main(["replay", str(tmp_path / "w.json"), "--out", str(tmp_path / "r2.json")]) == 1
    assert main(["verify", "identities", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["verify", "identities", "--family", "nope"]) == 2


def test_cli_gen_and_compute(tmp_path):
    body = tmp_path / "K.json"
    assert main(["gen", "body", "--kind", "cube", "--out", str(body)]) == 0
    assert main(["gen", "measure", "--body", str(body), "--i", "1", "--out", str(tmp_path / "S.json")]) == 0
    S = json.loads((tmp_path / "S.json").read_text())
    assert sum(a["w"] for a in S["atoms"]) == pytest.approx(3 * math.pi)
    sample = tmp_path / "s.json"
    assert main(["gen", "sample", "--kind", "pi-i", "--i", "1", "--count", "16", "--out", str(sample)]) == 0
    out = tmp_path / "h.json"
    assert main(["compute", "--body", str(body), "--op", "crofton", "--sample", str(sample), "--i", "1",
                 "--nodes", "300", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["is_support_function"] and doc["operator"]["op"] == "crofton"
    assert main(["compute", "--body", str(body), "--op", "quermass", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["W"] == pytest.approx([1.0, 2.0, math.pi, 4 * math.pi / 3], rel=5e-3)


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "minkval.harness.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout
