"""Brute-force vacuum expectation values in a truncated few-mode Fock space.

The continuum field enters the detector problem only through the Gram matrix
of the kick amplitudes, ``G_ij = <a_i, a_j>``.  Factoring ``G`` gives a handful
of bosonic modes whose displacement generators

    Y_i = sum_m a_i[m] b_m^dag - conj(a_i[m]) b_m

have exactly the continuum overlaps and commutators.  Everything below is
plain matrix arithmetic on those modes; only the target values ``I_s`` and
``I_c`` are shared with the closed-form engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, stats

from .udw import DeltaSchedule, i_c, i_s

TAIL_TOL = 1e-10
AGREE_TOL = 1e-8
DEFAULT_CUTOFF = 24
MAX_STATE_SIZE = 2**23
GRAM_PSD_ATOL = 1e-10
RANK_RTOL = 1e-12


class ConsistencyError(ArithmeticError):
    """The target Gram matrix is not positive semidefinite."""


class PrecisionError(ArithmeticError):
    """The Fock truncation could not be made accurate enough."""


@dataclass(frozen=True, eq=False)
class ModeConfig:
    """Mode amplitudes per kick slot and the number of Fock levels per mode.

    ``amplitudes[i, m]`` is the component of kick ``i`` on mode ``m``;
    ``cutoffs[m]`` levels (occupations ``0 .. cutoffs[m]-1``) are kept.
    """

    amplitudes: np.ndarray
    cutoffs: tuple[int, ...]

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex, ndmin=2)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        cut = tuple(int(c) for c in self.cutoffs)
        if len(cut) != a.shape[1] or min(cut, default=2) < 2:
            raise ValueError("need one cutoff >= 2 per mode")
        object.__setattr__(self, "cutoffs", cut)
        if not all(stats.poisson.sf(c - 1, mu) < TAIL_TOL for c, mu in zip(cut, self.mode_means())):
            raise PrecisionError(f"cutoffs {cut} leave Poisson tail mass above {TAIL_TOL}")

    @property
    def n_modes(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def n_slots(self) -> int:
        return self.amplitudes.shape[0]

    def mode_means(self) -> np.ndarray:
        """Occupation bound per mode for any product of ``e^{+-Y_i}``, each kick used at most twice."""
        return (2.0 * np.abs(self.amplitudes).sum(axis=0)) ** 2

    def with_cutoffs(self, cutoffs: Sequence[int]) -> "ModeConfig":
        return ModeConfig(self.amplitudes, tuple(cutoffs))

    def gram(self) -> np.ndarray:
        return self.amplitudes @ self.amplitudes.conj().T


def _tail_cutoff(mu: float) -> int:
    return max(4, int(stats.poisson.isf(TAIL_TOL, mu)) + 2)


def target_gram(times: Sequence[float], lam: float) -> np.ndarray:
    """Continuum Gram matrix ``(9 lambda^2 / 8 pi^2) (I_c + i I_s)(t_i - t_j)``."""
    t = np.asarray(times, dtype=float)
    dt = t[:, None] - t[None, :]
    return 9.0 * lam**2 / (8.0 * np.pi**2) * (i_c(dt) + 1j * i_s(dt))


def match_amplitudes(
    schedule: DeltaSchedule | None = None,
    *,
    times: Sequence[float] | None = None,
    lam: float | None = None,
    cutoff: int | None = None,
) -> ModeConfig:
    """Few-mode amplitudes reproducing the continuum Gram matrix.

    Pass a schedule (its four time-ordered kicks) or explicit ``times`` and
    ``lam``.  ``G = V diag(w) V^dag`` is factored and modes with negligible
    weight dropped, so coincident kicks share modes.  Cutoffs default to the
    larger of ``DEFAULT_CUTOFF`` and the Poisson tail bound when ``cutoff`` is
    None; an explicit ``cutoff`` is raised to the bound if needed.
    """
    if schedule is not None:
        times = [t for _, t in schedule.slots()]
        lam = schedule.lam
    if times is None or lam is None:
        raise ValueError("give a schedule or both times and lam")
    g = target_gram(times, lam)
    w, v = np.linalg.eigh(g)
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if w[0] < -GRAM_PSD_ATOL * max(scale, 1.0):
        raise ConsistencyError(f"Gram matrix has eigenvalue {w[0]:.3e}")
    keep = w > RANK_RTOL * scale
    amps = v[:, keep] * np.sqrt(w[keep])
    if amps.shape[1] == 0:
        amps = np.zeros((len(times), 1), dtype=complex)
    base = DEFAULT_CUTOFF if cutoff is None else int(cutoff)
    means = (2.0 * np.abs(amps).sum(axis=0)) ** 2
    return ModeConfig(amps, tuple(max(base, _tail_cutoff(mu)) for mu in means))


def minimal_config(cfg: ModeConfig) -> ModeConfig:
    """Same amplitudes with cutoffs lowered to the tail bound."""
    return cfg.with_cutoffs([_tail_cutoff(mu) for mu in cfg.mode_means()])


class _Displacements:
    """Single-mode factors of ``exp(+-Y_i)`` for one configuration."""

    def __init__(self, cfg: ModeConfig):
        self.cfg = cfg
        self._cache: dict[tuple[int, int], list[np.ndarray]] = {}
        self._ladders = [np.diag(np.sqrt(np.arange(1, c)), 1) for c in cfg.cutoffs]

    def factors(self, slot: int, sign: int) -> list[np.ndarray]:
        key = (slot, sign)
        if key not in self._cache:
            out = []
            for m, b in enumerate(self._ladders):
                a = sign * self.cfg.amplitudes[slot, m]
                out.append(linalg.expm(a * b.conj().T - np.conj(a) * b))
            self._cache[key] = out
        return self._cache[key]

    def apply(self, slot: int, sign: int, psi: np.ndarray, offset: int = 0) -> np.ndarray:
        """Apply ``exp(sign * Y_slot)`` to the field axes of ``psi`` starting at ``offset``."""
        for m, u in enumerate(self.factors(slot, sign)):
            psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [offset + m])), 0, offset + m)
        return psi


def _vacuum(cfg: ModeConfig) -> np.ndarray:
    if int(np.prod(cfg.cutoffs)) > MAX_STATE_SIZE:
        raise PrecisionError(f"Fock space with cutoffs {cfg.cutoffs} is too large")
    psi = np.zeros(cfg.cutoffs, dtype=complex)
    psi[(0,) * cfg.n_modes] = 1.0
    return psi


def _mirror_slots(n_slots: int) -> list[int]:
    return list(range(n_slots)) + list(range(n_slots))[::-1]


def _check_labels(l, n: int) -> list[int]:
    l = [int(x) for x in l]
    if len(l) != n or any(x not in (-1, 1) for x in l):
        raise ValueError(f"expected {n} labels of +1/-1, got {l}")
    return l


def _brute_h_fixed(l: Sequence[int], cfg: ModeConfig) -> complex:
    disp = _Displacements(cfg)
    psi = _vacuum(cfg)
    for slot, lab in reversed(list(zip(_mirror_slots(cfg.n_slots), l))):
        plus = disp.apply(slot, 1, psi)
        minus = disp.apply(slot, -1, psi)
        psi = 0.5 * (plus + lab * minus)
    return complex(psi[(0,) * cfg.n_modes])


def _brute_k_fixed(p: Sequence[int], cfg: ModeConfig) -> complex:
    disp = _Displacements(cfg)
    psi = _vacuum(cfg)
    for slot, sign in reversed(list(zip(_mirror_slots(cfg.n_slots), p))):
        psi = disp.apply(slot, sign, psi)
    return complex(psi[(0,) * cfg.n_modes])


def adaptive(fn: Callable[[ModeConfig], np.ndarray | complex], cfg: ModeConfig, tol: float = AGREE_TOL):
    """Evaluate ``fn`` with cutoffs doubled until two runs agree within ``tol``."""
    prev = np.asarray(fn(cfg))
    while True:
        cfg = cfg.with_cutoffs([2 * c for c in cfg.cutoffs])
        cur = np.asarray(fn(cfg))
        if np.max(np.abs(cur - prev), initial=0.0) < tol:
            return cur[()] if cur.ndim == 0 else cur
        prev = cur


def brute_h(l, cfg: ModeConfig) -> complex:
    """``<0| y_1^l1 y_2^l2 ... y_2^l7 y_1^l8 |0>`` with ``y^+ = cosh Y``, ``y^- = sinh Y``.

    Slots follow the mirror order ``1 .. n, n .. 1``.
    """
    l = _check_labels(l, 2 * cfg.n_slots)
    return complex(adaptive(lambda c: _brute_h_fixed(l, c), cfg))


def brute_k(p, cfg: ModeConfig) -> complex:
    """``<0| e^{p1 Y_1} ... e^{p8 Y_1} |0>`` in the mirror slot order."""
    p = _check_labels(p, 2 * cfg.n_slots)
    return complex(adaptive(lambda c: _brute_k_fixed(p, c), cfg))


def _rho_fixed(schedule: DeltaSchedule, cfg: ModeConfig) -> np.ndarray:
    disp = _Displacements(cfg)
    psi = np.zeros((2, 2) + cfg.cutoffs, dtype=complex)
    psi[(0, 0) + (0,) * cfg.n_modes] = 1.0
    sigma_plus = np.array([[0, 0], [1, 0]], dtype=complex)
    for k, (det, t) in enumerate(schedule.slots()):
        gap = schedule.gap_a if det == "A" else schedule.gap_b
        m = sigma_plus * np.exp(1j * gap * t)
        m = m + m.conj().T
        # cosh Y + m sinh Y = P_+ e^{Y} + P_- e^{-Y} since m^2 = 1
        axis = 0 if det == "A" else 1
        out = np.zeros_like(psi)
        for sign in (1, -1):
            proj = 0.5 * (np.eye(2) + sign * m)
            branch = np.moveaxis(np.tensordot(proj, psi, axes=([1], [axis])), 0, axis)
            out += disp.apply(k, sign, branch, offset=2)
        psi = out
    flat = psi.reshape(4, -1)
    return flat @ flat.conj().T


def brute_rho_ab(schedule: DeltaSchedule, cfg: ModeConfig | None = None) -> np.ndarray:
    """Joint detector state by explicit evolution of detectors plus modes."""
    cfg = minimal_config(match_amplitudes(schedule)) if cfg is None else cfg
    return adaptive(lambda c: _rho_fixed(schedule, c), cfg)


def gram_residual(cfg: ModeConfig, times: Sequence[float], lam: float) -> float:
    return float(np.max(np.abs(cfg.gram() - target_gram(times, lam))))
