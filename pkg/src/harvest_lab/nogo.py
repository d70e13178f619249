"""Finite-dimensional bench for simple-generated target-source couplings.

A simple-generated coupling is ``U = exp(-i m (x) X)`` with ``m`` acting on a
target (A or B) and ``X`` on the shared source S.  The full Hilbert space is
always ordered ``A (x) S (x) B``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import qmat
from .qmat import DensityMatrix, HermitianOp

Target = Literal["A", "B"]

COMMUTATOR_ATOL = 1e-10
DEGENERACY_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class SimpleCoupling:
    """One interaction ``exp(-i m (x) X)`` between a target and the source."""

    target: Target
    m: HermitianOp
    x: HermitianOp

    def __post_init__(self):
        if self.target not in ("A", "B"):
            raise ValueError(f"target must be 'A' or 'B', got {self.target!r}")
        if not isinstance(self.m, HermitianOp):
            object.__setattr__(self, "m", HermitianOp(self.m))
        if not isinstance(self.x, HermitianOp):
            object.__setattr__(self, "x", HermitianOp(self.x))


@dataclass(frozen=True, eq=False)
class InteractionSequence:
    """Couplings applied left to right in time on ``A (x) S (x) B``."""

    couplings: tuple[SimpleCoupling, ...]
    dims: tuple[int, int, int]

    def __post_init__(self):
        couplings = tuple(self.couplings)
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "dims", dims)
        if len(dims) != 3 or min(dims) < 1:
            raise qmat.DimensionError(f"dims must be three positive integers, got {dims}")
        if not 1 <= len(couplings) <= 6:
            raise ValueError(f"sequence length must be in 1..6, got {len(couplings)}")
        for c in couplings:
            _check_dims(c, dims)

    @property
    def order(self) -> str:
        return "".join(c.target for c in self.couplings)


@dataclass(frozen=True)
class Branch:
    """One spectral branch of a controlled-unitary decomposition."""

    eigenvalue: float
    projector: np.ndarray
    local_unitary: np.ndarray


@dataclass(frozen=True)
class CommutatorProfile:
    """Frobenius norms of ``[X_B1, X_A1]``, ``[X_B1, X_A2]``, ``[X_A1, X_A2]``."""

    norms: tuple[float, float, float]
    vanishing: tuple[bool, bool, bool]

    @property
    def n_vanishing(self) -> int:
        return sum(self.vanishing)


def _check_dims(c: SimpleCoupling, dims: Sequence[int]) -> None:
    d_a, d_s, d_b = dims
    d_t = d_a if c.target == "A" else d_b
    if c.m.dim != d_t or c.x.dim != d_s:
        raise qmat.DimensionError(
            f"coupling on {c.target} has m {c.m.dim}x{c.m.dim}, X {c.x.dim}x{c.x.dim}; "
            f"expected m {d_t}, X {d_s}"
        )


def _embed_local(op_target_source: np.ndarray, target: Target, dims: Sequence[int]) -> np.ndarray:
    """Place an operator on target (x) source into ``A (x) S (x) B``."""
    d_a, d_s, d_b = dims
    if target == "A":
        return np.kron(op_target_source, np.eye(d_b))
    # reorder target (x) source -> source (x) target before padding A
    d_t = d_b
    t = op_target_source.reshape(d_t, d_s, d_t, d_s).transpose(1, 0, 3, 2).reshape(d_s * d_t, d_s * d_t)
    return np.kron(np.eye(d_a), t)


def embed_and_exponentiate(c: SimpleCoupling, dims: Sequence[int]) -> np.ndarray:
    """Full-space unitary of ``c`` obtained by exponentiating ``m (x) X`` directly."""
    _check_dims(c, dims)
    gen = _embed_local(np.kron(c.m.matrix, c.x.matrix), c.target, dims)
    return qmat.unitary_from_generator(gen)


def controlled_decomposition(c: SimpleCoupling) -> list[Branch]:
    """Split ``exp(-i m (x) X)`` into ``sum_k exp(-i x_k m) (x) P_k``.

    Eigenvalues of ``X`` closer than ``DEGENERACY_ATOL`` share one branch, so the
    projectors are onto distinct spectral points.
    """
    w, v = qmat.herm_eig(c.x)
    groups: list[list[int]] = []
    for k in range(len(w)):
        if groups and abs(w[k] - w[groups[-1][0]]) < DEGENERACY_ATOL:
            groups[-1].append(k)
        else:
            groups.append([k])
    branches = []
    for g in groups:
        xk = float(np.mean(w[g]))
        vecs = v[:, g]
        proj = vecs @ vecs.conj().T
        branches.append(Branch(xk, proj, qmat.unitary_from_generator(xk * c.m.matrix)))
    return branches


def controlled_unitary(c: SimpleCoupling, dims: Sequence[int]) -> np.ndarray:
    """Full-space unitary assembled from :func:`controlled_decomposition`."""
    _check_dims(c, dims)
    local = sum(np.kron(b.local_unitary, b.projector) for b in controlled_decomposition(c))
    return _embed_local(local, c.target, dims)


def channel_output(
    c: SimpleCoupling,
    rho_target0,
    rho_source,
    route: Literal["branches", "unitary"] = "branches",
) -> DensityMatrix:
    """Target state after one coupling to a source in state ``rho_source``.

    ``route="branches"`` evaluates the measure-and-prepare form
    ``sum_k Tr(P_k rho_S) U_k rho_0 U_k^dag``; ``route="unitary"`` evolves the
    joint product state and traces out the source.
    """
    r0 = qmat.as_array(rho_target0)
    rs = qmat.as_array(rho_source)
    if r0.shape != (c.m.dim, c.m.dim) or rs.shape != (c.x.dim, c.x.dim):
        raise qmat.DimensionError("state dimensions do not match the coupling")
    if route == "branches":
        out = np.zeros_like(r0)
        for b in controlled_decomposition(c):
            p = np.trace(b.projector @ rs).real
            out += p * (b.local_unitary @ r0 @ b.local_unitary.conj().T)
    elif route == "unitary":
        u = qmat.unitary_from_generator(np.kron(c.m.matrix, c.x.matrix))
        joint = DensityMatrix(u @ np.kron(r0, rs) @ u.conj().T, (c.m.dim, c.x.dim))
        return qmat.partial_trace(joint, [0])
    else:
        raise ValueError(f"unknown route {route!r}")
    return DensityMatrix(out)


def generator_witness(
    generator,
    d_target: int,
    d_source: int,
    trials: int,
    seed: int,
    ref_dim: int = 2,
) -> float:
    """Largest target-reference negativity produced by ``exp(-i H)``.

    Each trial entangles the source with a reference of dimension ``ref_dim``,
    applies the target-source unitary, traces out the source and measures
    target|reference negativity.  ``H`` is any Hermitian operator on
    target (x) source, simple or not.
    """
    if d_target != 2 or not 2 <= ref_dim <= 3:
        raise ValueError("PPT is conclusive only for a qubit target and a reference of dim 2 or 3")
    h = qmat.as_array(generator)
    u = np.kron(qmat.unitary_from_generator(h), np.eye(ref_dim))
    best = 0.0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        psi_sr = qmat.random_ket(d_source * ref_dim, rng)
        rho_t = qmat.random_density(d_target, rng, rank=int(rng.integers(1, d_target + 1)))
        joint = np.kron(rho_t, np.outer(psi_sr, psi_sr.conj()))
        out = DensityMatrix(u @ joint @ u.conj().T, (d_target, d_source, ref_dim))
        rho_tr = qmat.partial_trace(out, [0, 2])
        best = max(best, qmat.negativity(rho_tr, 0))
    return best


def eb_witness(c: SimpleCoupling, trials: int, seed: int, ref_dim: int = 2) -> float:
    """Largest target-reference negativity after the simple coupling ``c``."""
    return generator_witness(np.kron(c.m.matrix, c.x.matrix), c.m.dim, c.x.dim, trials, seed, ref_dim)


def is_product_state(rho: DensityMatrix, atol: float = 1e-10) -> bool:
    n = len(rho.subsystem_dims)
    marginals = [qmat.partial_trace(rho, [k]).matrix for k in range(n)]
    return bool(np.max(np.abs(rho.matrix - qmat.kron_all(marginals))) <= atol)


def sequence_unitary(seq: InteractionSequence) -> np.ndarray:
    u = np.eye(int(np.prod(seq.dims)), dtype=complex)
    for c in seq.couplings:
        u = embed_and_exponentiate(c, seq.dims) @ u
    return u


def run_sequence(seq: InteractionSequence, rho0: DensityMatrix) -> tuple[DensityMatrix, float]:
    """Apply the couplings in order, trace out S, return ``(rho_AB, negativity)``."""
    if tuple(rho0.subsystem_dims) != seq.dims:
        raise qmat.DimensionError(f"state dims {rho0.subsystem_dims} != sequence dims {seq.dims}")
    if not is_product_state(rho0):
        raise ValueError("initial state must be a product state over A, S, B")
    u = sequence_unitary(seq)
    final = DensityMatrix(u @ rho0.matrix @ u.conj().T, seq.dims)
    rho_ab = qmat.partial_trace(final, [0, 2])
    return rho_ab, qmat.negativity(rho_ab, 0)


def _frob_comm(a: HermitianOp, b: HermitianOp) -> float:
    return float(np.linalg.norm(a.matrix @ b.matrix - b.matrix @ a.matrix))


def commutator_profile(seq: InteractionSequence) -> CommutatorProfile:
    """Source-observable commutators of a three-coupling A, A, B sequence."""
    targets = [c.target for c in seq.couplings]
    if len(targets) != 3 or targets.count("A") != 2 or targets.count("B") != 1:
        raise ValueError(f"need exactly two A couplings and one B coupling, got {''.join(targets)}")
    a1, a2 = (c.x for c in seq.couplings if c.target == "A")
    b1 = next(c.x for c in seq.couplings if c.target == "B")
    norms = (_frob_comm(b1, a1), _frob_comm(b1, a2), _frob_comm(a1, a2))
    return CommutatorProfile(norms, tuple(n < COMMUTATOR_ATOL for n in norms))


# --- randomized no-go checks -------------------------------------------------

def _random_coupling(target: Target, d_t: int, x: np.ndarray, rng) -> SimpleCoupling:
    return SimpleCoupling(target, HermitianOp(qmat.random_hermitian(d_t, rng)), HermitianOp(x))


def twoqubit_source_instance(rng: np.random.Generator) -> tuple[InteractionSequence, DensityMatrix]:
    """B on one source qubit, A once on each source qubit, random time order."""
    qb = int(rng.integers(2))
    on = [
        lambda o: np.kron(o, qmat.I2),
        lambda o: np.kron(qmat.I2, o),
    ]
    couplings = [
        _random_coupling("B", 2, on[qb](qmat.random_hermitian(2, rng)), rng),
        _random_coupling("A", 2, on[0](qmat.random_hermitian(2, rng)), rng),
        _random_coupling("A", 2, on[1](qmat.random_hermitian(2, rng)), rng),
    ]
    order = rng.permutation(3)
    seq = InteractionSequence(tuple(couplings[i] for i in order), (2, 4, 2))
    rho_s = qmat.random_density(4, rng, rank=int(rng.integers(1, 5)))
    rho0 = DensityMatrix(
        qmat.kron_all([qmat.random_density(2, rng), rho_s, qmat.random_density(2, rng)]), (2, 4, 2)
    )
    return seq, rho0


def twoqubit_source_nogo(trials: int, seed: int) -> float:
    """Max AB negativity when a two-qubit source is probed by three couplings."""
    best = 0.0
    for trial in range(trials):
        seq, rho0 = twoqubit_source_instance(np.random.default_rng([seed, trial]))
        best = max(best, run_sequence(seq, rho0)[1])
    return best


def single_source_qubit_contrast(trials: int, seed: int) -> float:
    """Max AB negativity when all three couplings hit the same source qubit.

    Trial 0 is the ``commute-b-a2`` circuit run on a weakly entangled two-qubit
    source; the rest draw random observables, orders and source states.
    """
    best = 0.0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        if trial == 0:
            toy = toy_circuit("commute-b-a2")
            cs = [SimpleCoupling(c.target, c.m, HermitianOp(np.kron(c.x.matrix, qmat.I2)))
                  for c in toy.sequence.couplings]
            seq = InteractionSequence(tuple(cs), (2, 4, 2))
            a = 0.2
            psi_s = np.cos(a) * qmat.ket(qmat.KET0, qmat.KET0) + np.sin(a) * qmat.ket(qmat.KET1, qmat.KET1)
            rho0 = DensityMatrix(qmat.kron_all([
                np.outer(qmat.KET0, qmat.KET0),
                np.outer(psi_s, psi_s.conj()),
                np.outer(qmat.KETP, qmat.KETP.conj()),
            ]), (2, 4, 2))
        else:
            couplings = [
                _random_coupling(t, 2, np.kron(qmat.random_hermitian(2, rng), qmat.I2), rng)
                for t in "BAA"
            ]
            seq = InteractionSequence(tuple(couplings[i] for i in rng.permutation(3)), (2, 4, 2))
            rho0 = DensityMatrix(qmat.kron_all([
                qmat.random_density(2, rng, rank=1),
                qmat.random_density(4, rng, rank=1),
                qmat.random_density(2, rng, rank=1),
            ]), (2, 4, 2))
        best = max(best, run_sequence(seq, rho0)[1])
    return best


# --- qubit toy circuits ------------------------------------------------------

# CNOT written as exp(-i pi (2|0><0| + |1><1|) (x) (2|+><+| + 3|-><-|)); the
# first factor sits on the control qubit.
CNOT_CONTROL_OBS = np.diag([2.0, 1.0]).astype(complex)
CNOT_TARGET_OBS = 2 * np.outer(qmat.KETP, qmat.KETP.conj()) + 3 * np.outer(qmat.KETM, qmat.KETM.conj())


def cnot_generator() -> np.ndarray:
    """``pi (2|0><0| + |1><1|) (x) (2|+><+| + 3|-><-|)`` on control (x) target."""
    return np.pi * np.kron(CNOT_CONTROL_OBS, CNOT_TARGET_OBS)


def cnot_coupling(target: Target, control: Literal["target", "source"], source_op=None) -> SimpleCoupling:
    """CNOT between a target qubit and the source, as a simple-generated coupling.

    ``control="target"`` lets the target qubit control a flip of the source;
    ``control="source"`` the reverse.  ``source_op`` embeds the source factor
    into a larger source (e.g. ``lambda o: np.kron(o, I2)``).
    """
    if control == "target":
        m, x = np.pi * CNOT_CONTROL_OBS, CNOT_TARGET_OBS
    elif control == "source":
        m, x = np.pi * CNOT_TARGET_OBS, CNOT_CONTROL_OBS
    else:
        raise ValueError(f"control must be 'target' or 'source', got {control!r}")
    if source_op is not None:
        x = source_op(x)
    return SimpleCoupling(target, HermitianOp(m), HermitianOp(x))


@dataclass(frozen=True)
class ToyCircuit:
    name: str
    sequence: InteractionSequence
    rho0: DensityMatrix
    expected: np.ndarray

    def run(self) -> dict:
        u = sequence_unitary(self.sequence)
        final = u @ self.rho0.matrix @ u.conj().T
        rho_ab, neg = run_sequence(self.sequence, self.rho0)
        return {
            "name": self.name,
            "order": self.sequence.order,
            "fidelity": qmat.fidelity_with_pure(final, self.expected),
            "negativity_ab": neg,
        }


TOY_NAMES = ("commute-b-a2", "commute-b-a1", "commute-a1-a2", "bell-swap")


def _pure(*factors) -> np.ndarray:
    psi = qmat.ket(*factors)
    return np.outer(psi, psi.conj())


def toy_circuit(name: str) -> ToyCircuit:
    """The CNOT circuits that entangle two target qubits through a source.

    ``commute-*`` use a single source qubit and three CNOTs; the name gives
    the pair of couplings that commutes.  ``bell-swap`` swaps a Bell pair held by a
    two-qubit source onto the targets with four CNOTs.
    """
    k0, k1, kp = qmat.KET0, qmat.KET1, qmat.KETP
    bell_s0 = (qmat.ket(k0, k0, k0) + qmat.ket(k1, k0, k1)) / np.sqrt(2)
    if name == "commute-b-a2":
        # [U_B1, U_A2] = 0
        cs = (cnot_coupling("B", "target"), cnot_coupling("A", "source"), cnot_coupling("A", "target"))
        rho0, expected = _pure(k0, k0, kp), bell_s0
    elif name == "commute-b-a1":
        # [U_B1, U_A1] = 0
        cs = (cnot_coupling("A", "source"), cnot_coupling("B", "source"), cnot_coupling("A", "target"))
        rho0, expected = _pure(k0, kp, k0), bell_s0
    elif name == "commute-a1-a2":
        # [U_A1, U_A2] = 0
        cs = (cnot_coupling("A", "source"), cnot_coupling("B", "target"), cnot_coupling("A", "source"))
        rho0 = _pure(k0, kp, kp)
        expected = (qmat.ket(k0, kp, k0) + qmat.ket(k1, kp, k1)) / np.sqrt(2)
    elif name == "bell-swap":
        on1 = lambda o: np.kron(o, qmat.I2)  # noqa: E731
        on2 = lambda o: np.kron(qmat.I2, o)  # noqa: E731
        cs = (
            cnot_coupling("A", "source", on1),
            cnot_coupling("B", "source", on2),
            cnot_coupling("A", "target", on1),
            cnot_coupling("B", "target", on2),
        )
        phi = (qmat.ket(k0, k0) + qmat.ket(k1, k1)) / np.sqrt(2)
        rho0 = np.kron(np.kron(_pure(k0), np.outer(phi, phi.conj())), _pure(k0))
        expected = (qmat.ket(k0, k0, k0, k0) + qmat.ket(k1, k0, k0, k1)) / np.sqrt(2)
        seq = InteractionSequence(cs, (2, 4, 2))
        return ToyCircuit(name, seq, DensityMatrix(rho0, (2, 4, 2)), expected)
    else:
        raise ValueError(f"unknown toy circuit {name!r}; choose from {TOY_NAMES}")
    seq = InteractionSequence(cs, (2, 2, 2))
    return ToyCircuit(name, seq, DensityMatrix(rho0, (2, 2, 2)), expected)


def all_orders(couplings: Sequence[SimpleCoupling]):
    """Every time ordering of ``couplings``."""
    return itertools.permutations(couplings)
