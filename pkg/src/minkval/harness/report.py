"""Machine-readable reports: JSON, CSV and markdown."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .checks import CheckResult

CSV_COLUMNS = ("id", "anchor", "lhs", "rhs", "gap", "tol", "pass", "seed")


def sort_results(results) -> list[CheckResult]:
    return sorted(results, key=lambda r: (r.id, r.seed, r.anchor, r.note))


def summary(results) -> dict:
    total = len(results)
    passed = sum(1 for r in results if r.passed)
    return {"total": total, "passed": passed, "failed": total - passed}


def render_json(results, config: dict | None = None, run_id: str = "", extra: dict | None = None) -> str:
    results = sort_results(results)
    doc = {
        "run_id": run_id,
        "config": config or {},
        "summary": summary(results),
        "results": [r.to_dict() for r in results],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def render_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sort_results(results):
        d = r.to_dict()
        w.writerow([d["id"], d["anchor"], repr(d["lhs"]), repr(d["rhs"]), repr(d["gap"]), repr(d["tol"]),
                    "true" if d["pass"] else "false", d["seed"]])
    return buf.getvalue()


def render_markdown(results, config: dict | None = None, run_id: str = "") -> str:
    results = sort_results(results)
    s = summary(results)
    lines = [f"# Verification report {run_id}".rstrip(), "",
             f"{s['passed']} of {s['total']} checks passed.", ""]
    if config:
        lines += ["| setting | value |", "|---|---|"]
        lines += [f"| {k} | {v} |" for k, v in config.items()]
        lines.append("")
    lines += ["| id | anchor | lhs | rhs | gap | tol | se | pass | seed |",
              "|---|---|---|---|---|---|---|---|---|"]
    for r in results:
        lines.append(f"| {r.id} | {r.anchor} | {r.lhs:.10g} | {r.rhs:.10g} | {r.gap:.3g} | {r.tol:.3g} | "
                     f"{r.se:.3g} | {'yes' if r.passed else 'NO'} | {r.seed} |")
    return "\n".join(lines) + "\n"


def render(results, fmt: str, config: dict | None = None, run_id: str = "", extra: dict | None = None) -> str:
    if fmt == "json":
        return render_json(results, config, run_id, extra)
    if fmt == "csv":
        return render_csv(results)
    if fmt == "markdown":
        return render_markdown(results, config, run_id)
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(results, path, fmt: str = "json", config: dict | None = None, run_id: str = "",
                 extra: dict | None = None) -> Path:
    p = Path(path)
    p.write_text(render(results, fmt, config, run_id, extra))
    return p


def parse_json(text: str) -> tuple[list[CheckResult], dict]:
    doc = json.loads(text)
    return [CheckResult.from_dict(d) for d in doc.get("results", [])], doc


def read_report(path) -> tuple[list[CheckResult], dict]:
    return parse_json(Path(path).read_text())
