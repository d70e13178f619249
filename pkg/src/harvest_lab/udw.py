"""Closed-form two-detector state after delta couplings to the scalar vacuum.

Two Unruh-DeWitt qubits sit at the origin with hard-sphere smearing of
radius 1 and couple to a massless 3+1D scalar field through up to two
instantaneous kicks each.  Every kick ``i`` contributes a factor
``cosh(Y_i) + m_i sinh(Y_i)``; tracing out the field reduces the joint state
to vacuum expectation values ``h`` of ordered cosh/sinh products, which in turn
are sums of displaced-vacuum overlaps ``K``.

Internally every schedule is widened to four time-ordered *slots*.  A detector
that couples only once is given two coincident slots, each of strength
``lambda``, so its merged kick has strength ``2 lambda``.  The eight arguments
of ``h`` and ``K`` refer to slots ``1, 2, 3, 4, 4, 3, 2, 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from . import qmat

Detector = Literal["A", "B"]

PATTERNS = ("AAB", "ABA", "BAA", "AB", "BA", "AABB", "ABBA", "ABAB", "BAAB", "BABA", "BBAA")
N_SLOTS = 4
ZERO_NEGATIVITY_ATOL = 1e-12

# bit i of a pattern index is 1 when label i is -1; label 1 is the most significant bit
SIGN_PATTERNS = np.array(list(itertools.product([1, -1], repeat=2 * N_SLOTS)), dtype=np.int8)
F_HYPERBOLIC = np.array([[1.0, 1.0], [1.0, -1.0]])


# --- special functions -------------------------------------------------------

def i_s(x):
    """Sine transform of the squared smearing profile, ``pi/96 x (2-|x|)^2 (4+|x|)`` on ``|x| < 2``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.where(ax < 2.0, np.pi / 96.0 * x * (2.0 - ax) ** 2 * (4.0 + ax), 0.0)
    return out[()] if out.ndim == 0 else out


def i_c(x):
    """Cosine transform of the squared smearing profile.

    Even in ``x``; equals ``1/4`` at 0 and ``(5 - 8 ln 2)/12`` at ``|x| = 2``,
    where the generic expression has removable ``0 * log 0`` terms.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        l2 = np.log(2.0 + ax)
        lx = np.where(ax > 0, np.log(ax), 0.0)
        lm = np.where(ax != 2.0, np.log(np.abs(ax - 2.0)), 0.0)
        gen = (
            24.0 + 4.0 * ax**2 - 2.0 * ax**2 * (ax**2 - 12.0) * lx
            - 16.0 * ax * l2 - 12.0 * ax**2 * l2 + ax**4 * l2
            + ax * (ax - 2.0) ** 2 * (4.0 + ax) * lm
        ) / 96.0
    out = np.where(ax == 0.0, 0.25, np.where(ax == 2.0, (5.0 - 8.0 * np.log(2.0)) / 12.0, gen))
    return out[()] if out.ndim == 0 else out


def kappa(lam: float) -> float:
    """``9 lambda^2 / 8 pi^2``, the field Gram-matrix prefactor for strength ``lambda``."""
    return 9.0 * lam**2 / (8.0 * np.pi**2)


def theta(dt, lam: float):
    """Commutator angle ``(9 lambda^2 / 4 pi^2) I_s(dt)`` between two kicks ``dt`` apart."""
    return 9.0 * lam**2 / (4.0 * np.pi**2) * i_s(dt)


def vacuum_overlap(s: Sequence[int], times: Sequence[float], lam: float) -> float:
    """``<0|D_alpha|0>`` for ``alpha = sum_i s_i alpha_i``.

    ``s`` holds the four effective signs ``p_i + p_(9-i)`` (each in
    ``{-2, 0, 2}``) and ``times`` the matching slot times.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(times, dtype=float)
    if s.shape != t.shape:
        raise ValueError("need one effective sign per coupling time")
    if np.any(~np.isin(s, (-2.0, 0.0, 2.0))):
        raise ValueError(f"effective signs must lie in {{-2, 0, 2}}, got {s.tolist()}")
    q = s @ i_c(t[:, None] - t[None, :]) @ s
    return float(np.exp(-9.0 * lam**2 / (16.0 * np.pi**2) * q))


# --- schedules ---------------------------------------------------------------

@dataclass(frozen=True)
class DeltaEvent:
    detector: Detector
    time: float
    slot: int = 1

    def __post_init__(self):
        if self.detector not in ("A", "B"):
            raise ValueError(f"detector must be 'A' or 'B', got {self.detector!r}")
        if not np.isfinite(self.time):
            raise ValueError(f"event time must be finite, got {self.time!r}")
        if self.slot not in (1, 2):
            raise ValueError(f"slot must be 1 or 2, got {self.slot!r}")


@dataclass(frozen=True)
class DeltaSchedule:
    """Delta-coupling events plus the per-kick strength and the two gaps.

    Times are in units of the smearing radius and gaps in its inverse.  The
    events of one detector may coincide; events of different detectors may
    not, since their order would then be ambiguous.
    """

    events: tuple[DeltaEvent, ...]
    lam: float
    gap_a: float = 0.0
    gap_b: float = 0.0
    pattern: str = field(init=False)

    def __post_init__(self):
        events = tuple(sorted(self.events, key=lambda e: (e.time, e.detector, e.slot)))
        object.__setattr__(self, "events", events)
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam!r}")
        if not (np.isfinite(self.gap_a) and np.isfinite(self.gap_b)):
            raise ValueError("gaps must be finite")
        for det in "AB":
            slots = [e.slot for e in events if e.detector == det]
            if not 1 <= len(slots) <= 2:
                raise ValueError(f"detector {det} needs one or two events, got {len(slots)}")
            if sorted(slots) != list(range(1, len(slots) + 1)):
                raise ValueError(f"detector {det} slots must be numbered 1..{len(slots)} in time order")
        for e, f in zip(events, events[1:]):
            if e.time == f.time and e.detector != f.detector:
                raise ValueError(f"A and B events coincide at t={e.time}; cross-detector ties are not allowed")
        by_slot = {(e.detector, e.slot): e.time for e in events}
        for det in "AB":
            if (det, 2) in by_slot and by_slot[(det, 2)] < by_slot[(det, 1)]:
                raise ValueError(f"detector {det} slot 2 precedes slot 1")
        pattern = "".join(e.detector for e in events)
        if pattern not in PATTERNS:
            raise ValueError(f"unsupported coupling pattern {pattern}; allowed: {', '.join(PATTERNS)}")
        object.__setattr__(self, "pattern", pattern)

    @classmethod
    def from_times(
        cls,
        ta: Iterable[float],
        tb: Iterable[float],
        lam: float,
        gap_a: float = 0.0,
        gap_b: float = 0.0,
    ) -> "DeltaSchedule":
        """Build a schedule from the coupling times of each detector."""
        events = []
        for det, ts in (("A", ta), ("B", tb)):
            for k, t in enumerate(sorted(float(t) for t in ts)):
                events.append(DeltaEvent(det, t, k + 1))
        return cls(tuple(events), float(lam), float(gap_a), float(gap_b))

    def times(self, detector: Detector) -> tuple[float, ...]:
        return tuple(e.time for e in self.events if e.detector == detector)

    def with_gaps(self, gap_a: float | None = None, gap_b: float | None = None) -> "DeltaSchedule":
        return replace(
            self,
            gap_a=self.gap_a if gap_a is None else gap_a,
            gap_b=self.gap_b if gap_b is None else gap_b,
        )

    def with_lambda(self, lam: float) -> "DeltaSchedule":
        return replace(self, lam=lam)

    def slots(self) -> tuple[tuple[Detector, float], ...]:
        """The four time-ordered ``(detector, time)`` kicks of strength ``lambda``."""
        out = []
        for e in self.events:
            n = 2 if len(self.times(e.detector)) == 1 else 1
            out.extend([(e.detector, e.time)] * n)
        return tuple(out)


# --- K and h -----------------------------------------------------------------

def _check_sign_pattern(p) -> np.ndarray:
    p = np.asarray(p)
    if p.shape[-1] != 2 * N_SLOTS or not np.all(np.isin(p, (-1, 1))):
        raise ValueError(f"a sign pattern is eight entries of +1/-1, got {np.asarray(p).tolist()}")
    return p.astype(np.int8)


def _pattern_index(p) -> int:
    return int("".join("1" if x == -1 else "0" for x in p), 2)


def _k_values(p: np.ndarray, times: np.ndarray, lam: float) -> np.ndarray:
    """K for each row of ``p`` (shape ``(n, 8)``) on time-ordered slot ``times``."""
    first = p[:, :N_SLOTS].astype(float)
    mirror = p[:, N_SLOTS:][:, ::-1].astype(float)
    s = first + mirror
    d = first - mirror
    kap = kappa(lam)
    q = np.einsum("pa,ab,pb->p", s, i_c(times[:, None] - times[None, :]), s)
    phase = np.zeros(len(p))
    for a in range(N_SLOTS):
        for b in range(a + 1, N_SLOTS):
            phase += 2.0 * kap * i_s(times[b] - times[a]) * d[:, a] * s[:, b]
    return np.exp(-0.5 * kap * q) * np.exp(-0.5j * phase)


def _slot_times(schedule: DeltaSchedule) -> np.ndarray:
    return np.array([t for _, t in schedule.slots()], dtype=float)


def k_function(p, schedule: DeltaSchedule) -> complex:
    """``<0| e^{p1 Y1} e^{p2 Y2} e^{p3 Y3} e^{p4 Y4} e^{p5 Y4} e^{p6 Y3} e^{p7 Y2} e^{p8 Y1} |0>``."""
    p = _check_sign_pattern(p)
    return complex(_k_values(p[None, :], _slot_times(schedule), schedule.lam)[0])


def k_table(schedule: DeltaSchedule) -> np.ndarray:
    """K for all 256 sign patterns, indexed as in :data:`SIGN_PATTERNS`."""
    return _k_values(SIGN_PATTERNS, _slot_times(schedule), schedule.lam)


@lru_cache(maxsize=8)
def _sign_transform(f_bytes: bytes) -> np.ndarray:
    f = np.frombuffer(f_bytes, dtype=float).reshape(2, 2)
    s = np.ones((1, 1))
    for _ in range(2 * N_SLOTS):
        s = np.kron(s, f)
    return s


def _f_matrix(f) -> np.ndarray:
    f = F_HYPERBOLIC if f is None else np.asarray(f, dtype=float)
    if f.shape != (2, 2):
        raise ValueError("f must be a 2x2 table indexed by (l is -1, p is -1)")
    return np.ascontiguousarray(f)


def h_table(schedule: DeltaSchedule, f=None) -> np.ndarray:
    """``h`` for all 256 label patterns.

    ``h(l) = 2^-8 sum_p prod_i f(l_i, p_i) K(p)``, where by default
    ``f(-1, -1) = -1`` and ``f = 1`` otherwise, i.e. the expansion
    ``cosh/sinh Y = (e^Y +/- e^-Y)/2``.  ``f`` may be replaced by any 2x2
    table ``f[l is -1][p is -1]``.
    """
    s = _sign_transform(_f_matrix(f).tobytes())
    h = s @ k_table(schedule) / 2 ** (2 * N_SLOTS)
    if f is None:
        h[SIGN_PATTERNS.sum(axis=1) % 4 != 0] = 0.0
    return h


def h_function(l, schedule: DeltaSchedule, f=None) -> complex:
    """``<0| y1^l1 y2^l2 y3^l3 y4^l4 y4^l5 y3^l6 y2^l7 y1^l8 |0>`` with ``y^+ = cosh Y``, ``y^- = sinh Y``.

    Exactly zero when an odd number of labels is ``-1`` (under the default ``f``).
    """
    l = _check_sign_pattern(l)
    fm = _f_matrix(f)
    if f is None and np.count_nonzero(l == -1) % 2:
        return 0j
    weights = np.prod(fm[(l == -1).astype(int)[None, :], (SIGN_PATTERNS == -1).astype(int)], axis=1)
    return complex(weights @ k_table(schedule) / 2 ** (2 * N_SLOTS))


# --- evolved state and density matrix ----------------------------------------

@dataclass(frozen=True)
class Term:
    """One summand of an AB component: ``phase`` times ordered cosh/sinh factors.

    ``labels`` run in operator order, latest kick first, with ``+1`` for cosh
    and ``-1`` for sinh.  ``phase = exp(i (gap_a * alpha + gap_b * beta))``.
    """

    phase: complex
    labels: tuple[int, ...]
    alpha: float
    beta: float


BASIS = ("gg", "ge", "eg", "ee")


@lru_cache(maxsize=None)
def _term_structure(dets: tuple[str, ...]):
    """Basis index, time-ordered labels and signed flip times for the 16 terms."""
    basis, labels, flips = [], [], []
    for lab in itertools.product([1, -1], repeat=len(dets)):
        excited = {"A": 0, "B": 0}
        fl = []
        for det, l in zip(dets, lab):
            if l == -1:
                fl.append(1 if excited[det] == 0 else -1)
                excited[det] ^= 1
            else:
                fl.append(0)
        basis.append(2 * excited["A"] + excited["B"])
        labels.append(lab)
        flips.append(fl)
    return np.array(basis), np.array(labels), np.array(flips, dtype=float)


@lru_cache(maxsize=None)
def _pair_structure(dets: tuple[str, ...]):
    """For all term pairs: flat matrix entry, h-table index and the sinh sign."""
    basis, labels, _ = _term_structure(dets)
    n = len(basis)
    entry, hidx, sign, ti, tj = [], [], [], [], []
    for i in range(n):
        for j in range(n):
            entry.append(4 * basis[i] + basis[j])
            # bra side runs in time order, ket side in reverse
            hidx.append(_pattern_index(list(labels[j]) + list(labels[i][::-1])))
            # sinh(Y)^dagger = -sinh(Y)
            sign.append(-1.0 if np.count_nonzero(labels[j] == -1) % 2 else 1.0)
            ti.append(i)
            tj.append(j)
    scatter = np.zeros((n * n, 16))
    scatter[np.arange(n * n), entry] = 1.0
    return np.array(hidx), np.array(sign), np.array(ti), np.array(tj), scatter


def evolved_coefficients(schedule: DeltaSchedule) -> tuple[list[Term], list[Term], list[Term], list[Term]]:
    """Expansion of ``U |g_A g_B>|0>`` over the AB basis ``gg, ge, eg, ee``.

    A kick that flips a detector up multiplies by ``exp(i gap t)``, one that
    flips it down by ``exp(-i gap t)``.
    """
    slots = schedule.slots()
    dets = tuple(d for d, _ in slots)
    times = np.array([t for _, t in slots])
    basis, labels, flips = _term_structure(dets)
    is_a = np.array([d == "A" for d in dets])
    out: tuple[list[Term], ...] = ([], [], [], [])
    for k in range(len(basis)):
        alpha = float(np.sum(flips[k] * times * is_a))
        beta = float(np.sum(flips[k] * times * ~is_a))
        phase = complex(np.exp(1j * (schedule.gap_a * alpha + schedule.gap_b * beta)))
        out[basis[k]].append(Term(phase, tuple(int(x) for x in labels[k][::-1]), alpha, beta))
    return out


class RhoKernel:
    """Gap-independent part of the AB density matrix for fixed times and ``lambda``.

    ``h`` does not depend on the gaps, so one kernel evaluates the density
    matrix for whole arrays of ``(gap_a, gap_b)`` at once.
    """

    def __init__(self, schedule: DeltaSchedule, f=None):
        slots = schedule.slots()
        dets = tuple(d for d, _ in slots)
        times = np.array([t for _, t in slots])
        _, _, flips = _term_structure(dets)
        hidx, sign, ti, tj, scatter = _pair_structure(dets)
        is_a = np.array([d == "A" for d in dets])
        alpha = flips @ (times * is_a)
        beta = flips @ (times * ~is_a)
        self.weights = sign * h_table(schedule, f)[hidx]
        self.d_alpha = alpha[ti] - alpha[tj]
        self.d_beta = beta[ti] - beta[tj]
        self.scatter = scatter

    def matrices(self, gap_a, gap_b=0.0) -> np.ndarray:
        """Density matrices of shape ``broadcast(gap_a, gap_b).shape + (4, 4)``."""
        ga, gb = np.broadcast_arrays(np.asarray(gap_a, float), np.asarray(gap_b, float))
        shape = ga.shape
        ph = np.exp(1j * (np.outer(ga.ravel(), self.d_alpha) + np.outer(gb.ravel(), self.d_beta)))
        rho = (ph * self.weights) @ self.scatter
        return rho.reshape(shape + (4, 4))


@dataclass(frozen=True)
class XState:
    """Two-qubit state supported on the diagonal and anti-diagonal."""

    r11: float
    r22: float
    r33: float
    r44: float
    r14: complex
    r23: complex

    def __post_init__(self):
        tr = self.r11 + self.r22 + self.r33 + self.r44
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"X-state trace is {tr!r}, expected 1")
        if abs(self.r14) ** 2 > self.r11 * self.r44 + 1e-9 or abs(self.r23) ** 2 > self.r22 * self.r33 + 1e-9:
            raise ValueError("X-state blocks are not positive semidefinite")

    @classmethod
    def from_matrix(cls, m) -> "XState":
        m = np.asarray(m)
        return cls(
            float(m[0, 0].real), float(m[1, 1].real), float(m[2, 2].real), float(m[3, 3].real),
            complex(m[0, 3]), complex(m[1, 2]),
        )

    def matrix(self) -> np.ndarray:
        m = np.diag([self.r11, self.r22, self.r33, self.r44]).astype(complex)
        m[0, 3], m[3, 0] = self.r14, np.conj(self.r14)
        m[1, 2], m[2, 1] = self.r23, np.conj(self.r23)
        return m

    def density_matrix(self) -> qmat.DensityMatrix:
        return qmat.DensityMatrix(self.matrix(), (2, 2))


def rho_ab(schedule: DeltaSchedule) -> XState:
    """Joint detector state after the schedule, in the basis ``gg, ge, eg, ee``."""
    return XState.from_matrix(RhoKernel(schedule).matrices(schedule.gap_a, schedule.gap_b))


def _pt_eigs(r11, r22, r33, r44, r14, r23) -> np.ndarray:
    # the partial transpose moves r14 into the (2,3) block and r23 into (1,4)
    root_mid = np.sqrt((r22 - r33) ** 2 + 4.0 * np.abs(r14) ** 2)
    root_out = np.sqrt((r11 - r44) ** 2 + 4.0 * np.abs(r23) ** 2)
    return np.stack([
        0.5 * (r22 + r33 + root_mid),
        0.5 * (r22 + r33 - root_mid),
        0.5 * (r11 + r44 + root_out),
        0.5 * (r11 + r44 - root_out),
    ], axis=-1)


def pt_eigenvalues(x: XState) -> tuple[float, float, float, float]:
    """Eigenvalues of the partial transpose of an X-state, in closed form."""
    return tuple(float(e) for e in _pt_eigs(x.r11, x.r22, x.r33, x.r44, x.r14, x.r23))


def pt_eigenvalues_batch(rho: np.ndarray) -> np.ndarray:
    """:func:`pt_eigenvalues` over a stack of 4x4 matrices, shape ``(..., 4)``."""
    return _pt_eigs(
        rho[..., 0, 0].real, rho[..., 1, 1].real, rho[..., 2, 2].real, rho[..., 3, 3].real,
        rho[..., 0, 3], rho[..., 1, 2],
    )


def negativity_from_eigenvalues(e) -> np.ndarray:
    return 0.0 - np.sum(np.minimum(e, 0.0), axis=-1)


def negativity_of(schedule: DeltaSchedule) -> float:
    return float(negativity_from_eigenvalues(np.array(pt_eigenvalues(rho_ab(schedule)))))


def negativity_over_gaps(schedule: DeltaSchedule, gap_a, gap_b=None) -> tuple[np.ndarray, np.ndarray]:
    """Negativity and partial-transpose eigenvalues for arrays of gaps.

    ``gap_b`` defaults to the schedule's own value.  Returns ``(N, E)`` with
    ``E`` carrying a trailing axis of length 4.
    """
    gap_b = schedule.gap_b if gap_b is None else gap_b
    e = pt_eigenvalues_batch(RhoKernel(schedule).matrices(gap_a, gap_b))
    return negativity_from_eigenvalues(e), e


def max_negativity_over_period(schedule: DeltaSchedule, n_gap: int = 64) -> float:
    """Largest negativity over ``n_gap`` values of ``gap_a`` spanning one period.

    The state is periodic in ``gap_a`` with period ``2 pi / (t_A2 - t_A1)``;
    for a single A kick the state does not depend on ``gap_a`` at all.
    """
    ta = schedule.times("A")
    if len(ta) == 2 and ta[1] > ta[0]:
        gaps = np.linspace(0.0, 2 * np.pi / (ta[1] - ta[0]), n_gap, endpoint=False)
    else:
        gaps = np.array([schedule.gap_a])
    return float(np.max(negativity_over_gaps(schedule, gaps)[0]))


def nonvanishing_commutators(t_b1: float, t_a1: float, t_a2: float) -> tuple[bool, bool, bool]:
    """Whether ``[U_B1,U_A1]``, ``[U_B1,U_A2]``, ``[U_A1,U_A2]`` can be nonzero.

    The field commutator between two kicks vanishes outside ``0 < |dt| < 2``.
    """
    return tuple(0.0 < abs(d) < 2.0 for d in (t_a1 - t_b1, t_a2 - t_b1, t_a2 - t_a1))
