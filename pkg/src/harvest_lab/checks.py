"""Independent numerical oracles and the ``selftest`` command.

``quad_i_s`` and ``quad_i_c`` integrate the defining integrals directly.  The
integrand is ``j1(k)^2 / k * trig(x k)``: a finite piece is handled by adaptive
quadrature and the tail is expanded into terms ``k^-n trig(w k)``, each done by
a Fourier-weighted quadrature or, for ``w = 0``, in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import fock_oracle, qmat, udw

HEAD = 40.0


def _head(x: float, trig: Callable) -> float:
    f = lambda k: special.spherical_jn(1, k) ** 2 / k * trig(x * k) if k > 0 else 0.0  # noqa: E731
    edges = np.linspace(0.0, HEAD, 161)
    parts = [integrate.quad(f, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0] for a, b in zip(edges, edges[1:])]
    return math.fsum(parts)


def _tail_terms(x: float, kind: str) -> list[tuple[float, int, str, float]]:
    """``(coef, n, trig, w)`` with integrand ``coef k^-n trig(w k)`` on ``[HEAD, inf)``.

    Uses ``(sin k - k cos k)^2 = (1 - cos 2k)/2 - k sin 2k + k^2 (1 + cos 2k)/2``.
    """
    if kind == "sin":
        return [
            (0.5, 5, "sin", x), (0.5, 3, "sin", x),
            (0.25, 3, "sin", x + 2), (0.25, 3, "sin", x - 2),
            (-0.25, 5, "sin", x + 2), (-0.25, 5, "sin", x - 2),
            (-0.5, 4, "cos", x - 2), (0.5, 4, "cos", x + 2),
        ]
    return [
        (0.5, 5, "cos", x), (0.5, 3, "cos", x),
        (0.25, 3, "cos", x + 2), (0.25, 3, "cos", x - 2),
        (-0.25, 5, "cos", x + 2), (-0.25, 5, "cos", x - 2),
        (-0.5, 4, "sin", 2 + x), (-0.5, 4, "sin", 2 - x),
    ]


def _tail(x: float, kind: str) -> float:
    parts = []
    for coef, n, trig, w in _tail_terms(x, kind):
        if trig == "sin" and w < 0:
            coef, w = -coef, -w
        w = abs(w)
        if w == 0.0:
            parts.append(0.0 if trig == "sin" else coef * HEAD ** (1 - n) / (n - 1))
            continue
        val = integrate.quad(lambda k, n=n: k ** (-n), HEAD, np.inf, weight=trig, wvar=w, epsabs=1e-15, limlst=100)[0]
        parts.append(coef * val)
    return math.fsum(parts)


def quad_i_s(x: float) -> float:
    """``int_0^inf (sin k - k cos k)^2 / k^5 sin(k x) dk`` by quadrature."""
    return _head(x, np.sin) + _tail(x, "sin")


def quad_i_c(x: float) -> float:
    """``int_0^inf (sin k - k cos k)^2 / k^5 cos(k x) dk`` by quadrature."""
    return _head(x, np.cos) + _tail(x, "cos")


SPECIAL_SAMPLES = np.linspace(-3.0, 3.0, 25)


def special_function_errors(xs=SPECIAL_SAMPLES) -> tuple[float, float]:
    """Largest closed-form vs quadrature deviation of ``I_s`` and ``I_c``."""
    es = max(abs(float(udw.i_s(x)) - quad_i_s(float(x))) for x in xs)
    ec = max(abs(float(udw.i_c(x)) - quad_i_c(float(x))) for x in xs)
    return es, ec


# --- random instances for oracle comparisons ---------------------------------

def random_schedule(rng: np.random.Generator, lam_range=(0.05, 1.5)) -> udw.DeltaSchedule:
    """Random two- or three-kick-per-detector schedule with generic times."""
    n_b = int(rng.integers(1, 3))
    ta = rng.uniform(0.0, 2.5, size=2)
    tb = rng.uniform(0.0, 2.5, size=n_b)
    return udw.DeltaSchedule.from_times(
        ta, tb, float(rng.uniform(*lam_range)), float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5))
    )


def random_even_pattern(rng: np.random.Generator) -> tuple[int, ...]:
    while True:
        l = tuple(int(x) for x in rng.choice([1, -1], size=8))
        if l.count(-1) % 2 == 0:
            return l


def oracle_case(seed: int, trial: int, f=None) -> dict:
    """Compare ``h_function`` with the Fock brute force on one random draw."""
    rng = np.random.default_rng([seed, trial])
    s = random_schedule(rng)
    l = random_even_pattern(rng)
    cfg = fock_oracle.match_amplitudes(s, cutoff=4)
    closed = udw.h_function(l, s, f=f)
    brute = fock_oracle.brute_h(l, cfg)
    return {
        "trial": trial,
        "pattern": s.pattern,
        "labels": list(l),
        "lambda": s.lam,
        "closed": closed,
        "brute": brute,
        "error": abs(closed - brute),
    }


def random_xstate(rng: np.random.Generator) -> udw.XState:
    d = rng.exponential(size=4)
    d /= d.sum()
    r14 = np.sqrt(d[0] * d[3]) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    r23 = np.sqrt(d[1] * d[2]) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    return udw.XState(*(float(v) for v in d), complex(r14), complex(r23))


def eigen_route_error(x: udw.XState) -> float:
    closed = np.sort(udw.pt_eigenvalues(x))
    numeric, _ = qmat.herm_eig(qmat.partial_transpose(qmat.DensityMatrix(x.matrix(), (2, 2)), 1))
    return float(np.max(np.abs(closed - numeric)))


# --- selftest ----------------------------------------------------------------

# the literal "f = -1 if l = p = -1 and 0 otherwise" reading
F_LITERAL = np.array([[0.0, 0.0], [0.0, -1.0]])


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def selftest(seed: int = 0, corrupt_f_convention: bool = False) -> list[CheckResult]:
    """Quadrature, closed-form constants, Fock-oracle agreement and eigenvalue routes."""
    out = []
    es, ec = special_function_errors(np.linspace(-2.9, 2.9, 9))
    out.append(CheckResult("i_s quadrature", es < 1e-8, f"max error {es:.3e}"))
    out.append(CheckResult("i_c quadrature", ec < 1e-8, f"max error {ec:.3e}"))
    exact = (5 - 8 * math.log(2)) / 12
    e2 = abs(float(udw.i_c(2.0)) - exact)
    out.append(CheckResult("i_c(2) = (5 - 8 ln 2)/12", e2 < 1e-15, f"i_c(2) = {float(udw.i_c(2.0))!r}"))
    e0 = abs(float(udw.i_c(0.0)) - 0.25)
    out.append(CheckResult("i_c(0) = 1/4", e0 == 0.0, f"i_c(0) = {float(udw.i_c(0.0))!r}"))

    f = F_LITERAL if corrupt_f_convention else None
    cases = [oracle_case(seed, t, f=f) for t in range(10)]
    worst = max(cases, key=lambda c: c["error"])
    out.append(CheckResult(
        "fock-oracle agreement (10 draws)",
        worst["error"] < 1e-6,
        f"max |h - brute| = {worst['error']:.3e} at trial {worst['trial']} ({worst['pattern']}, labels {worst['labels']})",
    ))

    rng = np.random.default_rng([seed, 10**6])
    ee = max(eigen_route_error(random_xstate(rng)) for _ in range(200))
    out.append(CheckResult("partial-transpose eigenvalue routes (200 X-states)", ee < 1e-10, f"max error {ee:.3e}"))
    return out
