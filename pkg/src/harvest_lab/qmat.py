"""Small dense complex linear algebra for finite-dimensional quantum states.

Everything here works on plain ``numpy`` arrays.  :class:`HermitianOp` and
:class:`DensityMatrix` are thin validated wrappers holding read-only arrays;
all functions accept either the wrappers or raw arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DIM_CAP = 4096
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10


class DimensionError(ValueError):
    """Matrix dimensions are inconsistent or exceed the configured cap."""


class NumericalError(ArithmeticError):
    """An eigensolve failed or produced non-finite output."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_array(x) -> np.ndarray:
    """Return the underlying matrix of a wrapper, or ``x`` as a complex array."""
    if isinstance(x, (HermitianOp, DensityMatrix)):
        return x.matrix
    return np.asarray(x, dtype=complex)


def _check_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > DIM_CAP:
        raise DimensionError(f"dimension {a.shape[0]} exceeds cap {DIM_CAP}")
    return a.shape[0]


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"{what} has non-finite entries")


@dataclass(frozen=True, eq=False)
class HermitianOp:
    """A Hermitian matrix, checked to ``HERMITIAN_ATOL`` in the max norm."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(as_array(self.matrix), dtype=complex)
        _check_square(m)
        _check_finite(m, "operator")
        dev = np.max(np.abs(m - m.conj().T), initial=0.0)
        if dev > HERMITIAN_ATOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A unit-trace positive semidefinite matrix over a tensor product.

    ``subsystem_dims`` defaults to a single system of the full dimension.
    Eigenvalues down to ``-PSD_ATOL`` are tolerated as rounding noise.
    """

    matrix: np.ndarray
    subsystem_dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        m = np.asarray(as_array(self.matrix), dtype=complex)
        n = _check_square(m)
        _check_finite(m, "density matrix")
        dims = tuple(int(d) for d in self.subsystem_dims) or (n,)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != n:
            raise DimensionError(f"subsystem dims {dims} do not multiply to {n}")
        dev = np.max(np.abs(m - m.conj().T), initial=0.0)
        if dev > HERMITIAN_ATOL:
            raise ValueError(f"density matrix is not Hermitian (max deviation {dev:.3e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -PSD_ATOL:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e} < -{PSD_ATOL}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "subsystem_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, psi, subsystem_dims: Sequence[int] = ()) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), tuple(subsystem_dims))


def kron(a, b, cap: int | None = None) -> np.ndarray:
    """Kronecker product ``a (x) b`` with a guard on the resulting dimension."""
    a, b = as_array(a), as_array(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("kron expects two matrices")
    cap = DIM_CAP if cap is None else cap
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise DimensionError(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def kron_all(mats: Iterable, cap: int | None = None) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m, cap=cap)
    return out


def herm_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and a unitary whose columns are the
    corresponding eigenvectors.  Backed by LAPACK ``zheevd``.
    """
    m = as_array(h)
    _check_square(m)
    _check_finite(m, "operator")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(m)
        raise NumericalError(f"Hermitian eigensolve failed (condition number {cond:.3e})") from exc
    _check_finite(w, "eigenvalues")
    return w, v


def unitary_from_generator(h) -> np.ndarray:
    """``exp(-i H)`` for Hermitian ``H`` via its spectral decomposition."""
    w, v = herm_eig(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


def _subsystem_tensor(rho) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(rho, DensityMatrix):
        m, dims = rho.matrix, rho.subsystem_dims
    else:
        m = as_array(rho)
        dims = (m.shape[0],)
    return m.reshape(dims + dims), dims


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce ``rho`` onto the subsystems listed in ``keep`` (kept in order)."""
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    t, dims = _subsystem_tensor(rho)
    n = len(dims)
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"keep={keep} is not a nonempty subset of range({n})")
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    spec = "".join(row) + "".join(col) + "->" + "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    kept = tuple(dims[i] for i in keep)
    d = int(np.prod(kept))
    return DensityMatrix(np.einsum(spec, t).reshape(d, d), kept)


def partial_transpose(rho: DensityMatrix, subsystem: int) -> np.ndarray:
    """Transpose the indices of one subsystem; the result need not be PSD."""
    t, dims = _subsystem_tensor(rho)
    n = len(dims)
    if not 0 <= subsystem < n:
        raise IndexError(f"subsystem {subsystem} out of range for {n} subsystems")
    axes = list(range(2 * n))
    axes[subsystem], axes[n + subsystem] = axes[n + subsystem], axes[subsystem]
    d = int(np.prod(dims))
    return t.transpose(axes).reshape(d, d)


def negativity(rho: DensityMatrix, subsystem: int = 0) -> float:
    """Sum of the magnitudes of the negative partial-transpose eigenvalues."""
    w, _ = herm_eig(partial_transpose(rho, subsystem))
    return float(-np.sum(w[w < 0]))


def equal_up_to_phase(a, b, atol: float = 1e-10) -> bool:
    """Compare two arrays after aligning the phase on ``b``'s largest entry."""
    a, b = as_array(a), as_array(b)
    if a.shape != b.shape:
        return False
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) == 0:
        return bool(np.max(np.abs(a), initial=0.0) <= atol)
    if abs(a[k]) == 0:
        return False
    phase = (a[k] / abs(a[k])) / (b[k] / abs(b[k]))
    return bool(np.max(np.abs(a - phase * b)) <= atol)


def fidelity_with_pure(rho, psi) -> float:
    """``<psi| rho |psi>`` for a normalized ket ``psi``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ as_array(rho) @ psi))


# Pauli matrices and a few standard states used throughout the tests and toys.
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KETP = np.array([1, 1], dtype=complex) / np.sqrt(2)
KETM = np.array([1, -1], dtype=complex) / np.sqrt(2)


def ket(*factors) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


# --- random draws -----------------------------------------------------------

def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian complex matrix symmetrized to a Hermitian one."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real
