"""Parameter sweeps over gaps, coupling strength and coupling times."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Sequence, TextIO

import numpy as np

from . import udw

Variable = Literal["gap_a", "lambda", "time_grid"]


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep, over which range(s), around which fixed schedule.

    ``ranges`` holds one ``(min, max, steps)`` triple, or two for the time
    grid (``t_A1`` then ``t_A2``).
    """

    variable: Variable
    ranges: tuple[tuple[float, float, int], ...]
    fixed: udw.DeltaSchedule
    scale: Literal["linear", "log"] = "linear"
    n_gap: int = 64

    def __post_init__(self):
        want = 2 if self.variable == "time_grid" else 1
        if self.variable not in ("gap_a", "lambda", "time_grid"):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if len(self.ranges) != want:
            raise ValueError(f"{self.variable} sweeps need {want} range(s)")
        for lo, hi, steps in self.ranges:
            if int(steps) < 2:
                raise ValueError(f"a sweep needs at least 2 steps, got {steps}")
            if not lo < hi:
                raise ValueError(f"sweep range needs min < max, got [{lo}, {hi}]")
            if self.scale == "log" and lo <= 0:
                raise ValueError("a log-scale sweep needs a positive minimum")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.n_gap < 1:
            raise ValueError("n_gap must be positive")

    def values(self, k: int = 0) -> np.ndarray:
        lo, hi, steps = self.ranges[k]
        if self.scale == "log":
            return np.geomspace(lo, hi, int(steps))
        return np.linspace(lo, hi, int(steps))


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        env = os.environ.get("HARVEST_LAB_JOBS")
        jobs = int(env) if env else 1
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    return jobs


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """``map`` over a process pool, results in input order."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# --- gap sweep ---------------------------------------------------------------

def autocorrelation_period(values: np.ndarray, step: float, threshold: float = 0.5) -> float | None:
    """Lag of the first autocorrelation peak above ``threshold``, times ``step``."""
    v = np.asarray(values, dtype=float) - np.mean(values)
    n = len(v)
    if n < 4 or not np.any(np.abs(v) > 0):
        return None
    # normalized per lag, so a shift by a whole period scores exactly 1;
    # lags run to 3/4 of the range so that two periods still show a peak
    ac = np.zeros(3 * n // 4 + 1)
    for k in range(len(ac)):
        a, b = v[: n - k], v[k:]
        den = np.sqrt(np.dot(a, a) * np.dot(b, b))
        ac[k] = np.dot(a, b) / den if den > 0 else 0.0
    for k in range(1, len(ac) - 1):
        if ac[k] >= threshold and ac[k] >= ac[k - 1] and ac[k] >= ac[k + 1] and np.min(ac[1:k + 1]) < threshold:
            return k * step
    return None


def sweep_gap(spec: SweepSpec) -> SweepResult:
    gaps = spec.values()
    n, e = udw.negativity_over_gaps(spec.fixed, gaps)
    step = float(gaps[1] - gaps[0])
    period = autocorrelation_period(n, step)
    ta = spec.fixed.times("A")
    expected = 2 * np.pi / (ta[1] - ta[0]) if len(ta) == 2 and ta[1] > ta[0] else None
    rows = [(float(g), float(nv), *(float(x) for x in ev)) for g, nv, ev in zip(gaps, n, e)]
    return SweepResult(
        ["omega_a", "negativity", "E1", "E2", "E3", "E4"],
        rows,
        {
            "pattern": spec.fixed.pattern,
            "detected_period": period,
            "expected_period": expected,
            "resolution": step,
            "max_negativity": float(np.max(n)),
        },
    )


# --- lambda sweep ------------------------------------------------------------

def _negativity_at_lambda(args) -> float:
    schedule, lam = args
    return udw.negativity_of(schedule.with_lambda(float(lam)))


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float | None:
    ok = (x > 0) & (y > 0)
    if np.count_nonzero(ok) < 2:
        return None
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def lambda_summary(lams: np.ndarray, n: np.ndarray, zero_atol: float = udw.ZERO_NEGATIVITY_ATOL) -> dict:
    """Small-lambda slope, the maximizing lambda and where negativity dies."""
    decade = lams <= lams[0] * 10.0 * (1 + 1e-12)
    k = int(np.argmax(n))
    after = np.nonzero(n[k:] <= zero_atol)[0]
    first_zero = float(lams[k + after[0]]) if len(after) else None
    trailing = bool(len(after) and np.all(n[k + after[0]:] <= zero_atol))
    return {
        "slope_smallest_decade": loglog_slope(lams[decade], n[decade]),
        "decade": [float(lams[0]), float(lams[decade][-1])],
        "argmax_lambda": float(lams[k]),
        "max_negativity": float(n[k]),
        "first_zero_after_max": first_zero,
        "zero_beyond_first_zero": trailing,
    }


def sweep_lambda(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    lams = spec.values()
    n = np.array(parallel_map(_negativity_at_lambda, [(spec.fixed, l) for l in lams], jobs))
    rows = [(float(l), float(v), float(np.sqrt(max(v, 0.0)))) for l, v in zip(lams, n)]
    return SweepResult(["lambda", "negativity", "sqrt_negativity"], rows, lambda_summary(lams, n))


# --- region map --------------------------------------------------------------

def commutator_flags(t_b1: float, t_a1: float, t_a2: float) -> str:
    """``"1"`` where ``[U_B1,U_A1]``, ``[U_B1,U_A2]``, ``[U_A1,U_A2]`` can be nonzero."""
    return "".join("1" if f else "0" for f in udw.nonvanishing_commutators(t_b1, t_a1, t_a2))


def _region_point(args) -> float:
    base, ta1, ta2, n_gap = args
    s = udw.DeltaSchedule.from_times([ta1, ta2], base.times("B"), base.lam, base.gap_a, base.gap_b)
    return udw.max_negativity_over_period(s, n_gap)


def region_points(spec: SweepSpec) -> tuple[list[tuple[float, float]], int]:
    """Grid points with ``t_A1 <= t_A2`` and no A-B time ties; also the skip count."""
    tb = set(spec.fixed.times("B"))
    pts, skipped = [], 0
    for ta1 in spec.values(0):
        for ta2 in spec.values(1):
            if ta1 > ta2:
                continue
            if ta1 in tb or ta2 in tb:
                skipped += 1
                continue
            pts.append((float(ta1), float(ta2)))
    return pts, skipped


def region_map(spec: SweepSpec, jobs: int = 1, points: Iterable[tuple[float, float]] | None = None) -> SweepResult:
    if points is None:
        pts, skipped = region_points(spec)
    else:
        pts, skipped = list(points), 0
    tb = spec.fixed.times("B")
    vals = parallel_map(_region_point, [(spec.fixed, a, b, spec.n_gap) for a, b in pts], jobs)
    rows = []
    for (ta1, ta2), v in zip(pts, vals):
        rows.append((ta1, ta2, float(v), commutator_flags(tb[0], ta1, ta2)))
    # with two B kicks the flags refer to the first one
    positive = [r for r in rows if r[2] > udw.ZERO_NEGATIVITY_ATOL]
    two_vanish = [r for r in rows if r[3].count("0") >= 2]
    return SweepResult(
        ["t_a1", "t_a2", "max_negativity", "commutator_flags"],
        rows,
        {
            "points": len(rows),
            "skipped_ties": skipped,
            "positive_points": len(positive),
            "max_negativity": max((r[2] for r in rows), default=0.0),
            "positive_with_t_a2_above_2": sum(1 for r in positive if r[1] > 2.0),
            "two_vanishing_points": len(two_vanish),
            "two_vanishing_max_negativity": max((r[2] for r in two_vanish), default=0.0),
        },
    )


# --- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_result(result: SweepResult, meta: dict, fmt: str, stream: TextIO) -> None:
    """Write CSV with ``#`` metadata lines, or a single JSON document."""
    if fmt == "csv":
        for key, val in meta.items():
            stream.write(f"# {key}: {val}\n")
        stream.write(f"# summary: {json.dumps(result.summary, sort_keys=True)}\n")
        stream.write(",".join(result.columns) + "\n")
        for row in result.rows:
            stream.write(",".join(_fmt(v) for v in row) + "\n")
    elif fmt == "json":
        doc = {
            "meta": meta,
            "summary": result.summary,
            "columns": result.columns,
            "rows": [list(r) for r in result.rows],
        }
        stream.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
