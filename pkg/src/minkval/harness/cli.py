"""Command line interface.

Verbs::

    minkval gen body|measure|sample ...     emit body, area-measure or Grassmann sample files
    minkval compute --op OP --body FILE     apply one operator to one body
    minkval verify identities|inequalities  run a verification suite
    minkval replay WITNESS                  re-run one failing check
    minkval report FILE --format FMT        convert a JSON report

``verify`` and ``replay`` exit with status 0 exactly when every check passes.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .. import geometry as geo
from ..grassmann import sample_grassmann, sample_to_json
from ..measures import area_measure, measure_to_json, quermass_steiner_fit
from ..sphere import build_sphere_grid, function_to_json, grid_to_json, is_support_function
from ..valuations import pi_i_crofton_measure, valuation_from_config
from . import common
from .config import SuiteConfig
from .report import read_report, render, summary
from .runner import SUITES, replay, run_suite


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_size_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, choices=(3, 4))
    p.add_argument("--nodes", type=int, help="sphere grid nodes")
    p.add_argument("--gr-samples", type=int, help="Grassmann samples")
    p.add_argument("--inner", type=int, help="inner Radon samples per direction")
    p.add_argument("--tol-mult", type=float, help="standard-error multiplier")
    p.add_argument("--format", choices=("json", "csv", "markdown"))
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--config", help="JSON file with SuiteConfig fields; flags override it")


def _config(args) -> SuiteConfig:
    cfg = SuiteConfig.from_file(args.config) if args.config else SuiteConfig()
    return cfg.replace(seed=args.seed, n=args.n, sphere_nodes=args.nodes, gr_samples=args.gr_samples,
                       inner=args.inner, tol_mult=args.tol_mult, output=args.out, format=args.format)


# ---------------------------------------------------------------- verbs


def cmd_verify(args) -> int:
    cfg = _config(args)
    extra = {}
    if args.bodies is not None:
        cfg = cfg.replace(body_count=args.bodies)
    if args.pairs is not None:
        cfg = cfg.replace(pair_count=args.pairs)
    if args.n4:
        cfg = cfg.replace(include_n4=True)
    t0 = time.perf_counter()
    results = run_suite(cfg, args.suite, args.jobs, args.family)
    elapsed = time.perf_counter() - t0
    if args.timing:
        extra["wall_clock_seconds"] = round(elapsed, 3)
        print(f"{args.suite}: {len(results)} checks in {elapsed:.1f}s", file=sys.stderr)
    _emit(render(results, cfg.format, cfg.echo(), cfg.run_id(args.suite), extra or None), cfg.output)
    s = summary(results)
    print(f"{args.suite}: {s['passed']}/{s['total']} passed", file=sys.stderr)
    return 0 if s["failed"] == 0 else 1


def cmd_replay(args) -> int:
    data = json.loads(Path(args.witness).read_text())
    if "results" in data:  # a whole report: replay every failing check
        witnesses = [r["witness"] for r in data["results"] if not r["pass"] and r.get("witness")]
    elif "witness" in data:
        witnesses = [data["witness"]]
    else:
        witnesses = [data]
    results = [r for w in witnesses for r in replay(w)]
    fmt = args.format or "json"
    _emit(render(results, fmt), args.out)
    return 0 if all(r.passed for r in results) else 1


def cmd_report(args) -> int:
    results, doc = read_report(args.input)
    fmt = args.format or "markdown"
    _emit(render(results, fmt, doc.get("config"), doc.get("run_id", "")), args.out)
    return 0


def _make_body(args):
    n = args.n or 3
    seed = args.seed or 0
    if args.kind == "cube":
        return geo.cube(n)
    if args.kind == "simplex":
        return geo.simplex(n)
    if args.kind == "ball":
        return geo.Ball.unit(n)
    if args.kind == "sphere-points":
        return geo.random_polytope(n, args.vertices, seed)
    return common.body(n, seed)


def cmd_gen(args) -> int:
    n = args.n or 3
    seed = args.seed or 0
    if args.what == "body":
        obj = geo.body_to_json(_make_body(args))
    elif args.what == "sample":
        if args.i is None:
            raise SystemExit("gen sample needs --i")
        if args.kind == "pi-i":
            obj = sample_to_json(pi_i_crofton_measure(n, args.i, args.count, seed).sample)
        else:
            obj = sample_to_json(sample_grassmann(n, args.i, args.count, seed))
    else:  # measure
        if args.body is None or args.i is None:
            raise SystemExit("gen measure needs --body and --i")
        obj = measure_to_json(area_measure(geo.load_body(args.body), args.i))
    _emit(json.dumps(obj) + "\n", args.out)
    return 0


def cmd_compute(args) -> int:
    body = geo.load_body(args.body)
    n = body.dim
    spec = json.loads(Path(args.op_config).read_text()) if args.op_config else {}
    if args.op:
        spec["op"] = args.op
    if args.i is not None:
        spec["i"] = args.i
    if args.sample:
        spec["sample_file"] = args.sample
    if args.op == "quermass":
        q = quermass_steiner_fit(body)
        _emit(json.dumps({"W": list(q.values), "V": q.intrinsic().tolist(), "residual": q.residual,
                          "hausdorff_error": q.hausdorff_error}) + "\n", args.out)
        return 0
    phi = valuation_from_config(spec, n)
    grid = build_sphere_grid(n, args.nodes or 2000, "fibonacci", args.seed or 0)
    f = phi.on_grid(body, grid)
    ok, witness = is_support_function(f, seed=args.seed or 0)
    doc = {"operator": phi.describe(), "grid": grid_to_json(grid), "support": function_to_json(f),
           "is_support_function": ok, "support_witness": witness}
    _emit(json.dumps(doc, default=lambda o: np.asarray(o).tolist()) + "\n", args.out)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minkval", description="Minkowski valuations as convolution operators")
    sub = p.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    _add_size_flags(v)
    v.add_argument("--bodies", type=int, help="random bodies per family")
    v.add_argument("--pairs", type=int, help="random pairs for Brunn-Minkowski checks")
    v.add_argument("--n4", action="store_true", help="also run the checks in dimension 4")
    v.add_argument("--family", action="append", help="restrict to a family (repeatable)")
    v.add_argument("--jobs", type=int, default=1, help="worker processes")
    v.add_argument("--timing", action="store_true", help="add wall-clock time to the report and stderr")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("replay", help="re-run failing checks from a witness or report file")
    r.add_argument("witness")
    r.add_argument("--format", choices=("json", "csv", "markdown"))
    r.add_argument("--out")
    r.set_defaults(func=cmd_replay)

    rp = sub.add_parser("report", help="convert a JSON report")
    rp.add_argument("input")
    rp.add_argument("--format", choices=("json", "csv", "markdown"))
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report)

    g = sub.add_parser("gen", help="emit body, measure or sample files")
    g.add_argument("what", choices=("body", "measure", "sample"))
    g.add_argument("--kind", default="random",
                   choices=("random", "sphere-points", "cube", "simplex", "ball", "uniform", "pi-i"))
    g.add_argument("--n", type=int, choices=(3, 4))
    g.add_argument("--seed", type=int)
    g.add_argument("--vertices", type=int, default=12)
    g.add_argument("--i", type=int)
    g.add_argument("--count", type=int, default=256)
    g.add_argument("--body")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("compute", help="apply one operator to one body")
    c.add_argument("--body", required=True)
    c.add_argument("--op", choices=("pi", "pi_i", "d", "lambda_i", "mean_section_even", "crofton", "quermass"))
    c.add_argument("--op-config", help="JSON operator description")
    c.add_argument("--i", type=int)
    c.add_argument("--sample", help="Grassmann sample file for --op crofton")
    c.add_argument("--nodes", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compute)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
