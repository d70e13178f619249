"""Randomized and grid verification suites behind ``harvest-lab verify``.

Every random trial draws from ``np.random.default_rng([seed, trial])`` so any
failing instance can be replayed from the two integers in its report.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import nogo, qmat, udw
from .qmat import DensityMatrix, HermitianOp

NEGATIVITY_ATOL = 1e-10
FIELD_ATOL = 1e-12
SUITES = ("eb", "commutators", "two_qubit_source", "toys", "nogo_aab")


@dataclass
class SuiteReport:
    suite: str
    trials: int
    seed: int | None
    max_violation: float
    tolerance: float
    passed: bool
    failing_instance: dict | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _mat(m) -> list:
    m = qmat.as_array(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _describe(seq: nogo.InteractionSequence) -> dict:
    return {
        "order": seq.order,
        "dims": list(seq.dims),
        "couplings": [{"target": c.target, "m": _mat(c.m), "x": _mat(c.x)} for c in seq.couplings],
    }


def _random_product_state(dims, rng) -> DensityMatrix:
    ranks = [int(rng.integers(1, d + 1)) for d in dims]
    return DensityMatrix(qmat.kron_all([qmat.random_density(d, rng, r) for d, r in zip(dims, ranks)]), dims)


# --- sequence generators -----------------------------------------------------

def eb_instance(rng: np.random.Generator, source_dims=(2, 3)) -> tuple[nogo.InteractionSequence, DensityMatrix]:
    """A random sequence whose last coupling is the only one on its target."""
    d_s = int(rng.choice(source_dims))
    last = "A" if rng.integers(2) == 0 else "B"
    other = "B" if last == "A" else "A"
    prefix = [
        nogo.SimpleCoupling(other, HermitianOp(qmat.random_hermitian(2, rng)), HermitianOp(qmat.random_hermitian(d_s, rng)))
        for _ in range(int(rng.integers(1, 4)))
    ]
    final = nogo.SimpleCoupling(last, HermitianOp(qmat.random_hermitian(2, rng)), HermitianOp(qmat.random_hermitian(d_s, rng)))
    seq = nogo.InteractionSequence(tuple(prefix) + (final,), (2, d_s, 2))
    return seq, _random_product_state(seq.dims, rng)


_BLOCKS = {2: [(2,), (1, 1)], 3: [(2, 1), (1, 1, 1)], 4: [(2, 2), (3, 1), (2, 1, 1)]}


def _block_observables(d: int, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A central observable commuting with two other, generally non-commuting, ones.

    All three are block diagonal in a random basis; the central one is a
    scalar on each block.
    """
    options = _BLOCKS[d]
    blocks = options[int(rng.integers(len(options)))]
    w = qmat.random_unitary(d, rng)
    central = np.zeros(d)
    others = [np.zeros((d, d), dtype=complex), np.zeros((d, d), dtype=complex)]
    k = 0
    for b in blocks:
        central[k:k + b] = rng.normal()
        for o in others:
            o[k:k + b, k:k + b] = qmat.random_hermitian(b, rng)
        k += b
    conj = lambda m: w @ m @ w.conj().T  # noqa: E731
    return conj(np.diag(central).astype(complex)), conj(others[0]), conj(others[1])


def two_commutator_instance(rng: np.random.Generator, source_dims=(2, 3, 4)):
    """Three couplings B1, A1, A2 with at least two vanishing source commutators."""
    d_s = int(rng.choice(source_dims))
    central, x1, x2 = _block_observables(d_s, rng)
    # which of B1, A1, A2 carries the central observable
    c = int(rng.integers(3))
    xs = [x1, x2]
    x_b = central if c == 0 else xs.pop(0)
    x_a1 = central if c == 1 else xs.pop(0)
    x_a2 = central if c == 2 else xs.pop(0)
    mk = lambda t, x: nogo.SimpleCoupling(t, HermitianOp(qmat.random_hermitian(2, rng)), HermitianOp(x))  # noqa: E731
    b1, a1, a2 = mk("B", x_b), mk("A", x_a1), mk("A", x_a2)
    # A1 precedes A2; B1 goes anywhere
    pos = int(rng.integers(3))
    order = [a1, a2]
    order.insert(pos, b1)
    seq = nogo.InteractionSequence(tuple(order), (2, d_s, 2))
    return seq, _random_product_state(seq.dims, rng)


# --- suites ------------------------------------------------------------------

def _random_suite(
    name: str,
    trials: int,
    seed: int,
    draw: Callable[[np.random.Generator], tuple[float, dict]],
) -> SuiteReport:
    worst, failing = 0.0, None
    for trial in range(trials):
        value, info = draw(np.random.default_rng([seed, trial]))
        if value > worst:
            worst = value
        if value > NEGATIVITY_ATOL and failing is None:
            failing = {"seed": seed, "trial": trial, "value": value, **info}
    return SuiteReport(name, trials, seed, worst, NEGATIVITY_ATOL, failing is None, failing)


def suite_eb(trials: int = 500, seed: int = 0) -> SuiteReport:
    """Simple couplings applied last, checked as sequences and against a reference."""

    def draw(rng):
        seq, rho0 = eb_instance(rng)
        _, n_seq = nogo.run_sequence(seq, rho0)
        n_ref = nogo.eb_witness(seq.couplings[-1], trials=1, seed=int(rng.integers(2**31)), ref_dim=int(rng.integers(2, 4)))
        return max(n_seq, n_ref), {"sequence": _describe(seq), "sequence_negativity": n_seq, "reference_negativity": n_ref}

    return _random_suite("eb", trials, seed, draw)


def suite_commutators(trials: int = 500, seed: int = 0) -> SuiteReport:
    def draw(rng):
        seq, rho0 = two_commutator_instance(rng)
        profile = nogo.commutator_profile(seq)
        if profile.n_vanishing < 2:
            raise AssertionError(f"construction produced only {profile.n_vanishing} vanishing commutators")
        _, n = nogo.run_sequence(seq, rho0)
        return n, {"sequence": _describe(seq), "commutator_norms": list(profile.norms)}

    return _random_suite("commutators", trials, seed, draw)


def suite_two_qubit_source(trials: int = 200, seed: int = 0) -> SuiteReport:
    def draw(rng):
        seq, rho0 = nogo.twoqubit_source_instance(rng)
        _, n = nogo.run_sequence(seq, rho0)
        return n, {"sequence": _describe(seq)}

    return _random_suite("two_qubit_source", trials, seed, draw)


def suite_toys(trials: int | None = None, seed: int | None = None) -> SuiteReport:
    results = [nogo.toy_circuit(name).run() for name in nogo.TOY_NAMES]
    worst, failing = 0.0, None
    for r in results:
        v = max(1.0 - r["fidelity"], abs(r["negativity_ab"] - 0.5))
        worst = max(worst, v)
        if v > NEGATIVITY_ATOL and failing is None:
            failing = dict(r)
    return SuiteReport("toys", len(results), seed, worst, NEGATIVITY_ATOL, failing is None, failing, {"circuits": results})


def aab_grid() -> list[tuple[float, float]]:
    """``(t_A1, t_A2)`` pairs before a B kick at 0, with separations inside and beyond 2."""
    pairs = []
    for ta1 in np.linspace(-1.9, -0.2, 10):
        for frac in np.linspace(0.05, 0.95, 10):
            pairs.append((float(ta1), float(ta1 * (1.0 - frac))))
    return pairs


AAB_LAMBDAS = (0.1, 0.5, 1.0, 2.0)
AAB_GAPS = np.linspace(0.0, 10.0, 10)


def suite_nogo_aab(trials: int | None = None, seed: int | None = None) -> SuiteReport:
    """AAB schedules on a 10x10x10 grid of ``(t_A1, t_A2, gap_a)`` for each lambda."""
    worst, failing, count = 0.0, None, 0
    for lam in AAB_LAMBDAS:
        for ta1, ta2 in aab_grid():
            s = udw.DeltaSchedule.from_times([ta1, ta2], [0.0], lam)
            n, _ = udw.negativity_over_gaps(s, AAB_GAPS, 0.0)
            count += n.size
            k = int(np.argmax(n))
            if n[k] > worst:
                worst = float(n[k])
            if n[k] > FIELD_ATOL and failing is None:
                failing = {"t_a1": ta1, "t_a2": ta2, "t_b1": 0.0, "lambda": lam, "omega_a": float(AAB_GAPS[k]), "value": float(n[k])}
    return SuiteReport("nogo_aab", count, seed, worst, FIELD_ATOL, failing is None, failing)


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> SuiteReport:
    if name == "eb":
        return suite_eb(500 if trials is None else trials, seed)
    if name == "commutators":
        return suite_commutators(500 if trials is None else trials, seed)
    if name == "two_qubit_source":
        return suite_two_qubit_source(200 if trials is None else trials, seed)
    if name == "toys":
        return suite_toys(trials, seed)
    if name == "nogo_aab":
        return suite_nogo_aab(trials, seed)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
