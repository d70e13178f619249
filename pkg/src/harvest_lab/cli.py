"""``harvest-lab`` command line.

Exit codes: 0 success, 1 a verification or check failed, 2 usage error.
Settings resolve as flags, then the ``--config`` JSON document, then defaults.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import shlex
import sys
from typing import Sequence

import numpy as np

from . import __version__, checks, nogo, suites, sweeps, udw


class UsageError(Exception):
    pass


DEFAULTS = {
    "lambda": 0.1,
    "omega_a": 3.0,
    "omega_b": 0.0,
    "tb1": 0.0,
    "tb2": None,
    "ta1": 0.5,
    "ta2": 1.0,
    "pattern": None,
    "out": None,
    "format": "csv",
    "jobs": None,
    "seed": 0,
    # sweep-gap
    "gap_min": 0.0,
    "gap_max": 8 * np.pi,
    "gap_steps": 801,
    # sweep-lambda
    "lambda_min": 1e-3,
    "lambda_max": 5.0,
    "lambda_steps": 121,
    "scale": "log",
    # region-map
    "ta1_min": 0.05,
    "ta1_max": 2.0,
    "ta1_steps": 40,
    "ta2_min": 0.05,
    "ta2_max": 2.6,
    "ta2_steps": 40,
    "n_gap": 64,
    # verify
    "trials": None,
}


def _float_or_none(s: str) -> float | None:
    return None if s.lower() in ("none", "null", "") else float(s)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("schedule")
    g.add_argument("--lambda", dest="lambda", type=float, help="per-kick coupling strength (default 0.1)")
    g.add_argument("--omega-a", dest="omega_a", type=float, help="gap of detector A (default 3)")
    g.add_argument("--omega-b", dest="omega_b", type=float, help="gap of detector B (default 0)")
    g.add_argument("--tb1", type=float, help="first B kick time (default 0)")
    g.add_argument("--tb2", type=_float_or_none, help="optional second B kick time")
    g.add_argument("--ta1", type=float, help="first A kick time (default 0.5)")
    g.add_argument("--ta2", type=_float_or_none, help="second A kick time, or 'none' (default 1)")
    g.add_argument("--pattern", type=str.lower, choices=[q.lower() for q in udw.PATTERNS],
                   help="expected coupling pattern; checked against the times")
    o = p.add_argument_group("output")
    o.add_argument("--out", help="output path (default stdout)")
    o.add_argument("--format", choices=["csv", "json"])
    o.add_argument("--jobs", type=int, help="worker processes (fallback: HARVEST_LAB_JOBS, then 1)")
    o.add_argument("--seed", type=int)
    o.add_argument("--config", help="JSON file with default values for any option")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harvest-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"harvest-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("sweep-gap", help="negativity against the gap of detector A")
    _common(g)
    g.add_argument("--gap-min", type=float)
    g.add_argument("--gap-max", type=float)
    g.add_argument("--steps", dest="gap_steps", type=int)

    l = sub.add_parser("sweep-lambda", help="negativity against the coupling strength")
    _common(l)
    l.add_argument("--lambda-min", type=float)
    l.add_argument("--lambda-max", type=float)
    l.add_argument("--steps", dest="lambda_steps", type=int)
    l.add_argument("--scale", choices=["linear", "log"])

    r = sub.add_parser("region-map", help="max negativity over one gap period on a (t_A1, t_A2) grid")
    _common(r)
    for name in ("ta1", "ta2"):
        r.add_argument(f"--{name}-min", type=float)
        r.add_argument(f"--{name}-max", type=float)
        r.add_argument(f"--{name}-steps", type=int)
    r.add_argument("--n-gap", type=int, help="gap samples per period (default 64)")

    v = sub.add_parser("verify", help="run a no-go property suite")
    _common(v)
    v.add_argument("suite", choices=suites.SUITES)
    v.add_argument("--trials", type=int)

    t = sub.add_parser("toy", help="run the CNOT toy circuits")
    _common(t)
    t.add_argument("name", nargs="?", default="all", choices=("all",) + nogo.TOY_NAMES)

    s = sub.add_parser("selftest", help="quadrature, oracle and eigenvalue cross-checks")
    _common(s)
    s.add_argument("--corrupt-f-convention", action="store_true", help=argparse.SUPPRESS)
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else cfg.get(key, default)
    try:
        out["jobs"] = sweeps.resolve_jobs(out["jobs"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return out


def schedule_from(opts: dict) -> udw.DeltaSchedule:
    ta = [opts["ta1"]] + ([opts["ta2"]] if opts["ta2"] is not None else [])
    tb = [opts["tb1"]] + ([opts["tb2"]] if opts["tb2"] is not None else [])
    s = udw.DeltaSchedule.from_times(ta, tb, opts["lambda"], opts["omega_a"], opts["omega_b"])
    if opts["pattern"] and opts["pattern"].upper() != s.pattern:
        raise UsageError(f"--pattern {opts['pattern']} does not match the times, which give {s.pattern.lower()}")
    return s


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _meta(argv: Sequence[str], opts: dict) -> dict:
    return {
        "command": "harvest-lab " + " ".join(shlex.quote(a) for a in argv),
        "seed": opts["seed"],
        "version": __version__,
    }


def _write_json(doc: dict, path: str | None) -> None:
    with _output(path) as fh:
        fh.write(json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n")


def run(args: argparse.Namespace, argv: Sequence[str]) -> int:
    opts = resolve(args)
    cmd = args.command
    try:
        if cmd in ("sweep-gap", "sweep-lambda", "region-map"):
            fixed = schedule_from(opts)
            if cmd == "sweep-gap":
                spec = sweeps.SweepSpec("gap_a", ((opts["gap_min"], opts["gap_max"], opts["gap_steps"]),), fixed)
                result = sweeps.sweep_gap(spec)
            elif cmd == "sweep-lambda":
                spec = sweeps.SweepSpec(
                    "lambda", ((opts["lambda_min"], opts["lambda_max"], opts["lambda_steps"]),), fixed, scale=opts["scale"]
                )
                result = sweeps.sweep_lambda(spec, opts["jobs"])
            else:
                spec = sweeps.SweepSpec(
                    "time_grid",
                    (
                        (opts["ta1_min"], opts["ta1_max"], opts["ta1_steps"]),
                        (opts["ta2_min"], opts["ta2_max"], opts["ta2_steps"]),
                    ),
                    fixed,
                    n_gap=opts["n_gap"],
                )
                result = sweeps.region_map(spec, opts["jobs"])
            with _output(opts["out"]) as fh:
                sweeps.write_result(result, _meta(argv, opts), opts["format"], fh)
            return 0
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    if cmd == "verify":
        report = suites.run_suite(args.suite, opts["trials"], opts["seed"])
        _write_json({"meta": _meta(argv, opts), **report.to_dict()}, opts["out"])
        return 0 if report.passed else 1

    if cmd == "toy":
        names = nogo.TOY_NAMES if args.name == "all" else (args.name,)
        results = [nogo.toy_circuit(n).run() for n in names]
        ok = all(r["fidelity"] >= 1 - 1e-10 and abs(r["negativity_ab"] - 0.5) <= 1e-10 for r in results)
        _write_json({"meta": _meta(argv, opts), "passed": ok, "circuits": results}, opts["out"])
        return 0 if ok else 1

    if cmd == "selftest":
        results = checks.selftest(opts["seed"], args.corrupt_f_convention)
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
        failed = [r for r in results if not r.passed]
        if failed:
            print(f"selftest failed: {failed[0].name}: {failed[0].detail}", file=sys.stderr)
            return 1
        return 0
    raise UsageError(f"unknown command {cmd}")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args, argv)
    except UsageError as exc:
        print(f"harvest-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
